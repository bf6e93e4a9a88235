#include "varblur/blur_op.hpp"

#include <algorithm>
#include <cmath>

#include "varblur/rng.hpp"

namespace varblur {

ValidationReport validate(const SaturationParams& p) {
    if (!(p.a > 0.0)) return ValidationReport::fail("saturation smoothness a must be > 0");
    if (!(p.gamma > 0.0)) return ValidationReport::fail("gamma exponent must be > 0");
    return ValidationReport::pass();
}

BlurOperator::BlurOperator(KernelBasis b, MixingField f, int alpha)
    : basis(std::move(b)), field(std::move(f)), downsample(alpha) {
    if (basis.count != field.count)
        throw ValidationError("basis count != mixing field count");
    if (downsample < 1) throw ValidationError("downsample factor must be >= 1");
    if (downsample > 1 && (field.height % downsample != 0 || field.width % downsample != 0))
        throw ValidationError("field dims must be divisible by the downsample factor");
}

namespace {

inline int clampi(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }

// sum_b m^b ⊙ (k^b ⋆ plane), replicate boundary, full resolution.
void blur_plane(const BlurOperator& op, const double* src, double* dst) {
    const int h = op.field.height, w = op.field.width;
    const int k = op.basis.k, c = k / 2;
    const std::size_t plane = static_cast<std::size_t>(h) * w;
    std::fill(dst, dst + plane, 0.0);
    for (int b = 0; b < op.basis.count; ++b) {
        const double* kt = op.basis.taps.data() + static_cast<std::size_t>(b) * k * k;
        const double* m = op.field.coeffs.data() + static_cast<std::size_t>(b) * plane;
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                double acc = 0.0;
                for (int r = 0; r < k; ++r) {
                    const int sy = clampi(y + r - c, 0, h - 1);
                    const double* srow = src + static_cast<std::size_t>(sy) * w;
                    const double* krow = kt + static_cast<std::size_t>(r) * k;
                    for (int q = 0; q < k; ++q) {
                        const int sx = clampi(x + q - c, 0, w - 1);
                        acc += krow[q] * srow[sx];
                    }
                }
                dst[static_cast<std::size_t>(y) * w + x] += m[static_cast<std::size_t>(y) * w + x] * acc;
            }
        }
    }
}

// Adjoint of blur_plane: scatter m^b(i) y(i) k^b(t) into the clamped source
// positions, mirroring the gather above tap for tap.
void blur_plane_adjoint(const BlurOperator& op, const double* y_full, double* dst) {
    const int h = op.field.height, w = op.field.width;
    const int k = op.basis.k, c = k / 2;
    const std::size_t plane = static_cast<std::size_t>(h) * w;
    std::fill(dst, dst + plane, 0.0);
    for (int b = 0; b < op.basis.count; ++b) {
        const double* kt = op.basis.taps.data() + static_cast<std::size_t>(b) * k * k;
        const double* m = op.field.coeffs.data() + static_cast<std::size_t>(b) * plane;
        for (int yy = 0; yy < h; ++yy) {
            for (int x = 0; x < w; ++x) {
                const double v = m[static_cast<std::size_t>(yy) * w + x] *
                                 y_full[static_cast<std::size_t>(yy) * w + x];
                if (v == 0.0) continue;
                for (int r = 0; r < k; ++r) {
                    const int sy = clampi(yy + r - c, 0, h - 1);
                    double* drow = dst + static_cast<std::size_t>(sy) * w;
                    const double* krow = kt + static_cast<std::size_t>(r) * k;
                    for (int q = 0; q < k; ++q) {
                        const int sx = clampi(x + q - c, 0, w - 1);
                        drow[sx] += v * krow[q];
                    }
                }
            }
        }
    }
}

}  // namespace

Image apply(const BlurOperator& op, const Image& u) {
    if (u.height != op.in_height() || u.width != op.in_width())
        throw ValidationError("image dims do not match the operator field");
    const int a = op.downsample;
    Image out(op.out_height(), op.out_width(), u.channels, 0.0, u.encoding);
    std::vector<double> full(static_cast<std::size_t>(u.height) * u.width);
    for (int ch = 0; ch < u.channels; ++ch) {
        blur_plane(op, u.plane(ch).data(), full.data());
        auto dst = out.plane(ch);
        if (a == 1) {
            std::copy(full.begin(), full.end(), dst.begin());
        } else {
            for (int y = 0; y < out.height; ++y)
                for (int x = 0; x < out.width; ++x)
                    dst[static_cast<std::size_t>(y) * out.width + x] =
                        full[static_cast<std::size_t>(y) * a * u.width + static_cast<std::size_t>(x) * a];
        }
    }
    return out;
}

Image adjoint(const BlurOperator& op, const Image& y) {
    if (y.height != op.out_height() || y.width != op.out_width())
        throw ValidationError("image dims do not match the operator output");
    const int a = op.downsample;
    const int h = op.in_height(), w = op.in_width();
    Image out(h, w, y.channels, 0.0, y.encoding);
    std::vector<double> full(static_cast<std::size_t>(h) * w);
    for (int ch = 0; ch < y.channels; ++ch) {
        auto src = y.plane(ch);
        if (a == 1) {
            std::copy(src.begin(), src.end(), full.begin());
        } else {
            std::fill(full.begin(), full.end(), 0.0);  // zero-insertion upsample
            for (int yy = 0; yy < y.height; ++yy)
                for (int x = 0; x < y.width; ++x)
                    full[static_cast<std::size_t>(yy) * a * w + static_cast<std::size_t>(x) * a] =
                        src[static_cast<std::size_t>(yy) * y.width + x];
        }
        blur_plane_adjoint(op, full.data(), out.plane(ch).data());
    }
    return out;
}

double saturation_response(double z, const SaturationParams& p) {
    const double t = p.a * (z - 1.0);
    // For t > 0, log(1+e^t) = t + log(1+e^{-t}), so R = 1 - log(1+e^{-t})/a;
    // this form keeps the exponent negative and avoids cancellation.
    if (t > 0.0) return 1.0 - std::log1p(std::exp(-t)) / p.a;
    return z - std::log1p(std::exp(t)) / p.a;
}

Image saturation_response(const Image& z, const SaturationParams& p) {
    Image out = z;
    for (double& v : out.data) v = saturation_response(v, p);
    return out;
}

double saturation_response_deriv(double z, const SaturationParams& p) {
    const double t = p.a * (z - 1.0);
    if (t > 0.0) {
        const double e = std::exp(-t);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(t));
}

Image saturation_response_deriv(const Image& z, const SaturationParams& p) {
    Image out = z;
    for (double& v : out.data) v = saturation_response_deriv(v, p);
    return out;
}

Image pow_image(const Image& u, double exponent) {
    Image out = u;
    for (double& v : out.data) v = std::pow(std::max(v, 0.0), exponent);
    return out;
}

Image convolve(const Image& img, const Kernel& kr) {
    const int h = img.height, w = img.width;
    const int k = kr.k, c = k / 2;
    Image out(h, w, img.channels, 0.0, img.encoding);
    for (int ch = 0; ch < img.channels; ++ch) {
        const auto src = img.plane(ch);
        auto dst = out.plane(ch);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                double acc = 0.0;
                for (int r = 0; r < k; ++r) {
                    const int sy = clampi(y + r - c, 0, h - 1);
                    for (int q = 0; q < k; ++q) {
                        const int sx = clampi(x + q - c, 0, w - 1);
                        acc += kr.taps[static_cast<std::size_t>(r) * k + q] *
                               src[static_cast<std::size_t>(sy) * w + sx];
                    }
                }
                dst[static_cast<std::size_t>(y) * w + x] = acc;
            }
        }
    }
    return out;
}

Image degrade(const BlurOperator& op, const Image& u, const SaturationParams& p,
              double noise_sigma, std::uint64_t seed) {
    if (noise_sigma < 0.0) throw ValidationError("noise sigma must be >= 0");
    auto pr = validate(p);
    if (!pr.ok) throw ValidationError(pr.message);

    Image blurred = apply(op, pow_image(u, p.gamma));
    if (noise_sigma > 0.0) {
        Rng rng(seed);
        for (double& v : blurred.data) v += noise_sigma * rng.normal();
    }
    Image out = saturation_response(blurred, p);
    const double inv_gamma = 1.0 / p.gamma;
    for (double& v : out.data) {
        v = std::pow(std::max(v, 0.0), inv_gamma);
        v = std::clamp(v, 0.0, 1.0);
    }
    out.encoding = Encoding::Gamma;
    return out;
}

}  // namespace varblur
