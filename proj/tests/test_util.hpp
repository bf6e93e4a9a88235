#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "varblur/types.hpp"

namespace varblur::testutil {

/// Deterministic procedural scene with natural-image character: smooth
/// background gradient, sharp-edged rectangles and disks at varied
/// contrasts, soft blobs and mild texture. Values stay inside [0.03, 0.97].
Image make_test_scene(int height, int width, std::uint64_t seed, int channels = 1);

/// Uniform random image in [lo, hi].
Image random_image(int height, int width, int channels, std::uint64_t seed,
                   double lo = 0.0, double hi = 1.0);

/// Valid random basis: strictly positive kernels, renormalized.
KernelBasis random_basis(int count, int k, std::uint64_t seed);

/// Valid random mixing field: strictly positive coefficients, renormalized.
MixingField random_field(int count, int height, int width, std::uint64_t seed);

/// Separable Gaussian blur, replicate boundary (test fixture).
Image gaussian_blur(const Image& img, double sigma);

/// Translates content by (dx, dy): out(y, x) = img(y - dy, x - dx), edge
/// values replicated.
Image shift_image(const Image& img, int dx, int dy);

/// 8-connected component count of the pre-clip > threshold region.
int count_regions_above(const Image& img, double threshold);

/// Temporary working directory for CLI round-trips; removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag);
    ~TempDir();
    const std::string& path() const { return path_; }
    std::string file(const std::string& name) const { return path_ + "/" + name; }

private:
    std::string path_;
};

/// Runs a command, returns its exit code; appends " > log 2>&1" capture.
int run_command(const std::string& cmd);

/// Whole file as bytes.
std::vector<unsigned char> read_bytes(const std::string& path);

}  // namespace varblur::testutil
