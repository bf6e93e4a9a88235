#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace varblur {

/// Invariant violation detected while constructing or validating a core type.
/// The CLI maps this to exit code 3.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// File / serialization problem. The CLI maps this to exit code 2.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

/// Result of a non-throwing validation pass. `message` names the first
/// violated invariant and its location.
struct ValidationReport {
    bool ok = true;
    std::string message;

    static ValidationReport pass() { return {}; }
    static ValidationReport fail(std::string msg) { return {false, std::move(msg)}; }
};

/// Whether sample values are linear-light or gamma-encoded. Metadata only;
/// no operation changes its arithmetic based on the tag.
enum class Encoding : std::uint8_t { Linear = 0, Gamma = 1 };

ValidationReport validate_image(int height, int width, int channels,
                                std::span<const double> data);

/// Planar raster: all of channel 0 (row-major), then channel 1, ...
/// Samples are nominally in [0,1] but intermediate results may leave that
/// range; the construction invariants are shape and finiteness only.
struct Image {
    int height = 0;
    int width = 0;
    int channels = 1;
    Encoding encoding = Encoding::Linear;
    std::vector<double> data;

    Image() = default;
    Image(int h, int w, int c, double fill = 0.0, Encoding enc = Encoding::Linear);
    Image(int h, int w, int c, std::vector<double> samples, Encoding enc = Encoding::Linear);

    double& at(int y, int x, int c = 0) {
        return data[(static_cast<std::size_t>(c) * height + y) * width + x];
    }
    double at(int y, int x, int c = 0) const {
        return data[(static_cast<std::size_t>(c) * height + y) * width + x];
    }

    std::span<double> plane(int c) {
        return {data.data() + static_cast<std::size_t>(c) * height * width,
                static_cast<std::size_t>(height) * width};
    }
    std::span<const double> plane(int c) const {
        return {data.data() + static_cast<std::size_t>(c) * height * width,
                static_cast<std::size_t>(height) * width};
    }

    std::size_t sample_count() const { return data.size(); }
    bool same_shape(const Image& o) const {
        return height == o.height && width == o.width && channels == o.channels;
    }
};

ValidationReport validate_kernel(int k, std::span<const double> taps, double tol = 1e-6);

/// Single K x K blur kernel, non-negative, unit sum, K odd. The zero
/// displacement tap sits at (K/2, K/2).
struct Kernel {
    int k = 1;
    std::vector<double> taps;  // row-major k*k

    Kernel() : taps(1, 1.0) {}
    Kernel(int side, std::vector<double> t);

    static Kernel delta(int side);

    double& at(int r, int q) { return taps[static_cast<std::size_t>(r) * k + q]; }
    double at(int r, int q) const { return taps[static_cast<std::size_t>(r) * k + q]; }
    int center() const { return k / 2; }
};

ValidationReport validate_basis(int count, int k, std::span<const double> taps,
                                double tol = 1e-6);

/// B kernels of identical odd side K. Entries >= 0; each kernel is
/// renormalized to exact unit sum on construction (inputs must already sum
/// to 1 within `tol`).
struct KernelBasis {
    int count = 0;
    int k = 1;
    std::vector<double> taps;  // count * k * k, kernel-major

    KernelBasis() = default;
    KernelBasis(int b, int side, std::vector<double> t, double tol = 1e-6);
    explicit KernelBasis(const std::vector<Kernel>& kernels);

    std::span<const double> kernel_taps(int b) const {
        return {taps.data() + static_cast<std::size_t>(b) * k * k,
                static_cast<std::size_t>(k) * k};
    }
    Kernel kernel(int b) const;
};

ValidationReport validate_mixing(int count, int height, int width,
                                 std::span<const double> coeffs, double tol = 1e-6);

/// Per-pixel convex weights over the basis, stored planar (all of b = 0,
/// then b = 1, ...). Each pixel's weights are renormalized to exact unit sum
/// on construction.
struct MixingField {
    int count = 0;
    int height = 0;
    int width = 0;
    std::vector<double> coeffs;  // count * height * width

    MixingField() = default;
    MixingField(int b, int h, int w, std::vector<double> c, double tol = 1e-6);

    /// Constant field: every pixel weights all basis elements by 1/b.
    static MixingField uniform(int b, int h, int w);

    double& at(int b, int y, int x) {
        return coeffs[(static_cast<std::size_t>(b) * height + y) * width + x];
    }
    double at(int b, int y, int x) const {
        return coeffs[(static_cast<std::size_t>(b) * height + y) * width + x];
    }
    std::span<const double> plane(int b) const {
        return {coeffs.data() + static_cast<std::size_t>(b) * height * width,
                static_cast<std::size_t>(height) * width};
    }
};

ValidationReport validate_segment_map(int height, int width, int segment_count,
                                      std::span<const int> labels,
                                      std::span<const std::int64_t> sizes);

/// Integer label per pixel in [0, segment_count); sizes[s] counts pixels of
/// label s.
struct SegmentMap {
    int height = 0;
    int width = 0;
    int segment_count = 0;
    std::vector<int> labels;
    std::vector<std::int64_t> sizes;

    SegmentMap() = default;
    SegmentMap(int h, int w, std::vector<int> lab);

    /// Single segment covering the whole image.
    static SegmentMap whole(int h, int w);

    int label(int y, int x) const { return labels[static_cast<std::size_t>(y) * width + x]; }
};

/// Remaps arbitrary raw label values (e.g. palette indices) to contiguous
/// labels [0, S) in ascending raw-value order.
SegmentMap segment_map_from_labels(int height, int width, const std::vector<int>& raw);

/// Keeps the background (most populous label) plus the `max_objects` largest
/// other segments; everything else is merged into the background. Background
/// becomes label 0.
SegmentMap reduce_segments(const SegmentMap& map, int max_objects = 3);

/// Per-pixel kernel synthesis: sum_b m^b(y,x) * k^b. Output is non-negative
/// and unit-sum for valid inputs.
Kernel pixel_kernel(const KernelBasis& basis, const MixingField& field, int y, int x);

/// Per-pixel L2 norm of the synthesized kernel, computed tap-for-tap as
/// pixel_kernel followed by a norm loop so brute-force oracles match
/// bitwise. Values in (0, 1].
Image kernel_norm_map(const KernelBasis& basis, const MixingField& field);

// Non-throwing validation of constructed instances.
ValidationReport validate(const Image& img);
ValidationReport validate(const Kernel& k);
ValidationReport validate(const KernelBasis& basis);
ValidationReport validate(const MixingField& field);
ValidationReport validate(const SegmentMap& map);

}  // namespace varblur
