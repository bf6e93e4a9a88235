#pragma once

#include "varblur/types.hpp"

namespace varblur {

/// Per-pixel weights w_i = 1 / (pixel count of i's segment), so no single
/// region dominates a loss.
struct SegmentWeights {
    int height = 0;
    int width = 0;
    std::vector<double> w;

    static SegmentWeights from_segments(const SegmentMap& map);
    static SegmentWeights constant(int h, int w, double value);

    double at(int y, int x) const { return w[static_cast<std::size_t>(y) * width + x]; }
};

/// Dense ground-truth per-pixel kernels (one K x K kernel per pixel).
struct KernelField {
    int height = 0;
    int width = 0;
    int k = 1;
    std::vector<double> taps;  // (y * W + x) * K * K + tap

    KernelField() = default;
    KernelField(int h, int w, int side);

    std::span<const double> at(int y, int x) const {
        return {taps.data() + (static_cast<std::size_t>(y) * width + x) * k * k,
                static_cast<std::size_t>(k) * k};
    }
    std::span<double> at(int y, int x) {
        return {taps.data() + (static_cast<std::size_t>(y) * width + x) * k * k,
                static_cast<std::size_t>(k) * k};
    }
};

/// sum_i w_i (v_i^gamma - v_i^GT^gamma)^2, summed over channels.
double reblur_loss(const Image& v_pred, const Image& v_gt, const SegmentWeights& w, double gamma);

/// sum_i w_i || sum_b m^b_i k^b - k_i^GT ||_2^2.
double kernel_loss(const KernelBasis& basis, const MixingField& field, const KernelField& gt,
                   const SegmentWeights& w);

/// sum_i (u_i - u_i^GT)^2 over all samples.
double restoration_loss(const Image& u_pred, const Image& u_gt);

/// Mean over pixels of ||k_i||_2^2 of the synthesized kernels.
double kernel_l2_reg(const KernelBasis& basis, const MixingField& field);

/// Mean over coefficient planes of the per-pixel-normalized anisotropic
/// total variation (|dx| + |dy|).
double mask_tv_reg(const MixingField& field);

/// Anisotropic TV of one raw plane: sum of |horizontal| + |vertical|
/// forward differences (unnormalized). Usable on arbitrary buffers, e.g.
/// masks before normalization.
double plane_tv(std::span<const double> plane, int height, int width);

}  // namespace varblur
