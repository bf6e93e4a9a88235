#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "varblur/blur_op.hpp"
#include "varblur/types.hpp"

namespace varblur {

/// One synthetic blurry/sharp pair with the ground truth that generated it.
/// The mixing field holds the blurred, renormalized segment masks; blurry
/// regenerates exactly as degrade(sharp) under the stored basis/field with
/// the stored seed.
struct DatasetSample {
    Image sharp;
    Image blurry;
    KernelBasis basis;
    MixingField field;
    SegmentMap segments;
    double noise_sigma = 0.0;
    SaturationParams params;
    std::uint64_t seed = 0;
};

/// Blurs each segment's mask with its kernel, renormalizes the blurred masks
/// pixel-wise into a convex mixing field (soft transitions between regions),
/// then degrades the sharp image under that operator. At most 4 segments
/// (background + 3 objects); one kernel per segment, all of one side.
DatasetSample make_sample(const Image& sharp, const SegmentMap& segments,
                          const std::vector<Kernel>& kernels, const SaturationParams& params,
                          double noise_sigma, std::uint64_t seed);

/// Scales the HSV value channel by `factor` (no clipping; values may leave
/// [0,1] until a later degrade step clips).
Image brightness_scale(const Image& rgb, double factor);

/// brightness_scale with the factor drawn uniformly in [0.5, 1.5].
Image brightness_augment(const Image& rgb, std::uint64_t seed);

/// Composites `count` bright elongated Gaussian-profile streaks (peak
/// pre-clip value in [1.5, 4], length 3-15 px) at seeded random positions,
/// placed apart so each forms its own saturated region.
Image light_streak_augment(const Image& rgb, int count, std::uint64_t seed);

// "VBS1" container: magic, u32 version, f32 noise_sigma, f32 a, f32 gamma,
// u64 seed, then embedded VBI1 (sharp), VBI1 (blurry), VBK1 (basis+field)
// and VBL1 (labels) blocks. Lossless at f32.
void write_sample(const std::filesystem::path& path, const DatasetSample& sample);
DatasetSample read_sample(const std::filesystem::path& path);

// Color helpers (h, s in [0,1]; v unbounded above).
void rgb_to_hsv(double r, double g, double b, double& h, double& s, double& v);
void hsv_to_rgb(double h, double s, double v, double& r, double& g, double& b);

}  // namespace varblur
