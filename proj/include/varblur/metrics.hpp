#pragma once

#include <cstdint>

#include "varblur/types.hpp"

namespace varblur {

/// Rec. 709 luminance (3-channel) or a copy (1-channel).
Image to_gray(const Image& img);

/// 10 log10(1 / MSE) on [0,1] images; +infinity when identical.
double psnr(const Image& a, const Image& b);

/// Mean SSIM, 11x11 Gaussian window (sigma 1.5), standard stabilization
/// constants on a [0,1] dynamic range, averaged over channels.
double ssim(const Image& a, const Image& b);

struct RegistrationResult {
    double psnr = 0.0;
    double ssim = 0.0;
    int dx = 0;           // gt(y, x) compared against restored(y + dy, x + dx)
    int dy = 0;
    double scale = 1.0;   // least-squares intensity factor applied to restored
};

/// Exhaustive integer translation search in [-max_shift, max_shift]^2; at
/// each shift the least-squares intensity scale is applied and PSNR computed
/// on the overlap. Reports the PSNR-maximizing shift (smallest shift wins
/// ties) with its SSIM.
RegistrationResult registered_psnr_ssim(const Image& restored, const Image& gt, int max_shift);

/// Re-blur metric, 0 = no blur, 1 = maximum blur: per axis, the variation
/// (|adjacent difference|) destroyed by a length-h averaging filter, as a
/// fraction of the original variation, maximized over axes. Axes with no
/// variation are skipped; a constant image scores 1.0 by convention.
double blur_strength(const Image& img, int filter_size = 11);

struct CpbdResult {
    double value = 0.0;
    bool no_edges = false;
};

/// Cumulative probability of blur detection: fraction of detected edges
/// whose blur probability 1 - exp(-(w / w_JNB)^3.6) stays below 0.63, with
/// w_JNB = 5 when the edge contrast is <= 50 (0-255 scale) and 3 above.
CpbdResult cpbd(const Image& img);

struct SharpnessIndexResult {
    double value = 0.0;
    double std_error = 0.0;   // Monte-Carlo standard error estimate
    bool degenerate = false;  // constant image: moments undefined
};

/// SI(u) = -log10 Phi((mu - TV(u)) / sigma), with mu and sigma the moments
/// of TV(u * W) under periodic convolution with Gaussian white noise of
/// variance 1/(H*W), estimated from `realizations` seeded draws. Phi is the
/// Gaussian upper tail, evaluated through an asymptotic expansion when the
/// direct formula would underflow.
SharpnessIndexResult sharpness_index(const Image& img, int realizations, std::uint64_t seed);

/// Anisotropic total variation with periodic differences (the SI
/// convention).
double periodic_tv(const Image& gray);

/// Numerically stable log10 of the Gaussian upper tail.
double log10_gaussian_tail(double t);

}  // namespace varblur
