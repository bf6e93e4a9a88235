#include "varblur/blurmap.hpp"

#include <algorithm>
#include <numeric>

namespace varblur {

Image blur_map(const KernelBasis& basis, const MixingField& field) {
    return kernel_norm_map(basis, field);
}

Image blur_score_map(const Image& sharpness) {
    if (sharpness.channels != 1) throw ValidationError("blur_score_map expects a single channel");
    const auto [mn, mx] = std::minmax_element(sharpness.data.begin(), sharpness.data.end());
    Image out = sharpness;
    const double range = *mx - *mn;
    if (range <= 0.0) {
        std::fill(out.data.begin(), out.data.end(), 0.0);
        return out;
    }
    for (double& v : out.data) v = 1.0 - (v - *mn) / range;
    return out;
}

ApResult average_precision(const Image& scores, const std::vector<std::uint8_t>& positive_mask) {
    if (scores.channels != 1) throw ValidationError("average_precision expects a single channel");
    if (scores.data.size() != positive_mask.size())
        throw ValidationError("average_precision: score map and mask sizes differ");

    const std::size_t n = scores.data.size();
    std::size_t positives = 0;
    for (auto m : positive_mask) positives += m ? 1 : 0;
    if (positives == 0) return {0.0, false};

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scores.data[a] > scores.data[b];
    });

    double ap = 0.0;
    double prev_recall = 0.0;
    std::size_t tp = 0, seen = 0;
    std::size_t i = 0;
    while (i < n) {
        // Group all pixels sharing this score: one threshold.
        std::size_t j = i;
        while (j < n && scores.data[order[j]] == scores.data[order[i]]) {
            if (positive_mask[order[j]]) ++tp;
            ++seen;
            ++j;
        }
        const double recall = static_cast<double>(tp) / static_cast<double>(positives);
        const double precision = static_cast<double>(tp) / static_cast<double>(seen);
        ap += (recall - prev_recall) * precision;
        prev_recall = recall;
        i = j;
    }
    return {ap, true};
}

}  // namespace varblur
