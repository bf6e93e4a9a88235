#pragma once

#include <cstdint>

#include "varblur/types.hpp"

namespace varblur {

/// Camera-shake trajectory parameters. The trajectory is a 2D damped
/// stochastic harmonic oscillator (independent axes) with natural frequency
/// drawn from the tremor band, integrated at exposure_steps uniform samples
/// over a fixed 0.5 s exposure. amplitude_scale is the RMS trajectory radius
/// in pixels; amplitudes that do not fit strictly inside K x K are resampled
/// and then shrunk.
struct ShakeParams {
    int k = 33;
    int exposure_steps = 2000;
    double tremor_low_hz = 2.0;
    double tremor_high_hz = 10.0;
    double damping = 0.15;          // in (0, 1)
    double amplitude_scale = -1.0;  // pixels; < 0 means k / 5
    std::uint64_t seed = 0;
};

ValidationReport validate(const ShakeParams& p);

/// Non-negative unit-sum kernel whose support fits strictly inside K x K.
/// Deterministic per seed.
Kernel generate_shake_kernel(const ShakeParams& p);

/// Antialiased unit-mass segment through the kernel center: `length` point
/// samples at unit spacing along `angle`, bilinear-deposited.
Kernel line_kernel(int length, double angle, int k);

/// Isotropic Gaussian kernel; side defaults to 2*ceil(3 sigma)+1. sigma = 0
/// gives a delta.
Kernel gaussian_kernel(double sigma, int k = 0);

}  // namespace varblur
