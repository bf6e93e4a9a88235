#pragma once

#include <cstdint>

#include "varblur/types.hpp"

namespace varblur {

/// Smooth sensor response parameters: R(z) = z - (1/a) log(1 + e^{a(z-1)}).
struct SaturationParams {
    double a = 50.0;
    double gamma = 2.2;
};

ValidationReport validate(const SaturationParams& p);

/// Spatially-varying blur H: x -> subsample_alpha( sum_b m^b ⊙ (k^b ⋆ x) ),
/// with replicate edge handling. ⋆ is correlation: output pixel i is the
/// window around i dotted with the synthesized kernel, so a centered delta
/// basis makes H the identity.
struct BlurOperator {
    KernelBasis basis;
    MixingField field;
    int downsample = 1;  // subsampling stride alpha, top-left phase

    BlurOperator() = default;
    BlurOperator(KernelBasis b, MixingField f, int alpha = 1);

    int in_height() const { return field.height; }
    int in_width() const { return field.width; }
    int out_height() const { return field.height / downsample; }
    int out_width() const { return field.width / downsample; }
};

/// Forward blur. Per-channel; output dims are field dims / alpha.
Image apply(const BlurOperator& op, const Image& u);

/// Exact adjoint of apply under the standard inner product, including the
/// replicate-boundary fold and zero-insertion upsampling.
Image adjoint(const BlurOperator& op, const Image& y);

/// R(z), evaluated with log1p(e^t) = t + log1p(e^{-t}) for t > 0 so large
/// arguments cannot overflow.
double saturation_response(double z, const SaturationParams& p);
Image saturation_response(const Image& z, const SaturationParams& p);

/// R'(z) = 1 / (1 + e^{a(z-1)}), in (0, 1).
double saturation_response_deriv(double z, const SaturationParams& p);
Image saturation_response_deriv(const Image& z, const SaturationParams& p);

/// Full degradation of Eq.-3 form: clip( R( H(u^gamma) + n )^{1/gamma} )
/// with n seeded i.i.d. Gaussian noise of std noise_sigma added in the
/// blurred linear domain. Clipping to [0,1] happens last. Deterministic per
/// seed.
Image degrade(const BlurOperator& op, const Image& u, const SaturationParams& p,
              double noise_sigma, std::uint64_t seed);

/// Elementwise power helper (u^gamma on non-negative images; negatives are
/// clamped to 0 first).
Image pow_image(const Image& u, double exponent);

/// Single-kernel correlation with replicate boundary, all channels.
Image convolve(const Image& img, const Kernel& k);

}  // namespace varblur
