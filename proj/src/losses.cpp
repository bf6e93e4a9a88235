#include "varblur/losses.hpp"

#include <cmath>

namespace varblur {

SegmentWeights SegmentWeights::from_segments(const SegmentMap& map) {
    SegmentWeights out;
    out.height = map.height;
    out.width = map.width;
    out.w.resize(map.labels.size());
    for (std::size_t i = 0; i < map.labels.size(); ++i)
        out.w[i] = 1.0 / static_cast<double>(map.sizes[map.labels[i]]);
    return out;
}

SegmentWeights SegmentWeights::constant(int h, int w, double value) {
    SegmentWeights out;
    out.height = h;
    out.width = w;
    out.w.assign(static_cast<std::size_t>(h) * w, value);
    return out;
}

double reblur_loss(const Image& v_pred, const Image& v_gt, const SegmentWeights& w, double gamma) {
    if (!v_pred.same_shape(v_gt)) throw ValidationError("reblur loss: image shapes differ");
    if (w.height != v_pred.height || w.width != v_pred.width)
        throw ValidationError("reblur loss: weight map shape differs");
    const std::size_t plane = static_cast<std::size_t>(v_pred.height) * v_pred.width;
    double loss = 0.0;
    for (int c = 0; c < v_pred.channels; ++c) {
        const auto a = v_pred.plane(c);
        const auto b = v_gt.plane(c);
        for (std::size_t i = 0; i < plane; ++i) {
            const double d = std::pow(std::max(a[i], 0.0), gamma) -
                             std::pow(std::max(b[i], 0.0), gamma);
            loss += w.w[i] * d * d;
        }
    }
    return loss;
}

double kernel_loss(const KernelBasis& basis, const MixingField& field, const KernelField& gt,
                   const SegmentWeights& w) {
    if (field.height != gt.height || field.width != gt.width)
        throw ValidationError("kernel loss: field and ground truth dims differ");
    if (basis.k != gt.k) throw ValidationError("kernel loss: kernel sides differ");
    if (w.height != field.height || w.width != field.width)
        throw ValidationError("kernel loss: weight map shape differs");
    const int kk = basis.k * basis.k;
    const std::size_t plane = static_cast<std::size_t>(field.height) * field.width;
    double loss = 0.0;
    std::vector<double> synth(kk);
    for (int y = 0; y < field.height; ++y) {
        for (int x = 0; x < field.width; ++x) {
            std::fill(synth.begin(), synth.end(), 0.0);
            const std::size_t pix = static_cast<std::size_t>(y) * field.width + x;
            for (int b = 0; b < basis.count; ++b) {
                const double m = field.coeffs[static_cast<std::size_t>(b) * plane + pix];
                const double* kt = basis.taps.data() + static_cast<std::size_t>(b) * kk;
                for (int t = 0; t < kk; ++t) synth[t] += m * kt[t];
            }
            const auto gtk = gt.at(y, x);
            double ss = 0.0;
            for (int t = 0; t < kk; ++t) {
                const double d = synth[t] - gtk[t];
                ss += d * d;
            }
            loss += w.w[pix] * ss;
        }
    }
    return loss;
}

double restoration_loss(const Image& u_pred, const Image& u_gt) {
    if (!u_pred.same_shape(u_gt)) throw ValidationError("restoration loss: image shapes differ");
    double loss = 0.0;
    for (std::size_t i = 0; i < u_pred.data.size(); ++i) {
        const double d = u_pred.data[i] - u_gt.data[i];
        loss += d * d;
    }
    return loss;
}

double kernel_l2_reg(const KernelBasis& basis, const MixingField& field) {
    const Image norms = kernel_norm_map(basis, field);
    double acc = 0.0;
    for (double v : norms.data) acc += v * v;
    return acc / static_cast<double>(norms.data.size());
}

double plane_tv(std::span<const double> plane, int height, int width) {
    if (plane.size() != static_cast<std::size_t>(height) * width)
        throw ValidationError("plane_tv: buffer size != H*W");
    const double* p = plane.data();
    double tv = 0.0;
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x + 1 < width; ++x)
            tv += std::abs(p[static_cast<std::size_t>(y) * width + x + 1] -
                           p[static_cast<std::size_t>(y) * width + x]);
    }
    for (int y = 0; y + 1 < height; ++y) {
        for (int x = 0; x < width; ++x)
            tv += std::abs(p[(static_cast<std::size_t>(y) + 1) * width + x] -
                           p[static_cast<std::size_t>(y) * width + x]);
    }
    return tv;
}

double mask_tv_reg(const MixingField& field) {
    const std::size_t plane = static_cast<std::size_t>(field.height) * field.width;
    double acc = 0.0;
    for (int b = 0; b < field.count; ++b)
        acc += plane_tv(field.plane(b), field.height, field.width) / static_cast<double>(plane);
    return acc / static_cast<double>(field.count);
}

KernelField::KernelField(int h, int w, int side)
    : height(h), width(w), k(side),
      taps(static_cast<std::size_t>(h) * w * side * side, 0.0) {
    if (h <= 0 || w <= 0) throw ValidationError("kernel field dimensions must be positive");
    if (side <= 0 || side % 2 == 0) throw ValidationError("kernel side must be odd and positive");
}

}  // namespace varblur
