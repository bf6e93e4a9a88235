#include "varblur/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>

namespace varblur {

namespace {

std::string loc2(const char* what, int a, int b) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%s at (%d, %d)", what, a, b);
    return buf;
}

void throw_if_bad(const ValidationReport& r) {
    if (!r.ok) throw ValidationError(r.message);
}

}  // namespace

ValidationReport validate_image(int height, int width, int channels,
                                std::span<const double> data) {
    if (height <= 0 || width <= 0) return ValidationReport::fail("image dimensions must be positive");
    if (channels != 1 && channels != 3) return ValidationReport::fail("image channels must be 1 or 3");
    const std::size_t expect = static_cast<std::size_t>(height) * width * channels;
    if (data.size() != expect)
        return ValidationReport::fail("image data length " + std::to_string(data.size()) +
                                      " != H*W*C = " + std::to_string(expect));
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (!std::isfinite(data[i]))
            return ValidationReport::fail("non-finite sample at flat index " + std::to_string(i));
    }
    return ValidationReport::pass();
}

Image::Image(int h, int w, int c, double fill, Encoding enc)
    : height(h), width(w), channels(c), encoding(enc),
      data(static_cast<std::size_t>(std::max(h, 0)) * std::max(w, 0) * std::max(c, 0), fill) {
    throw_if_bad(validate_image(height, width, channels, data));
}

Image::Image(int h, int w, int c, std::vector<double> samples, Encoding enc)
    : height(h), width(w), channels(c), encoding(enc), data(std::move(samples)) {
    throw_if_bad(validate_image(height, width, channels, data));
}

ValidationReport validate_kernel(int k, std::span<const double> taps, double tol) {
    if (k <= 0 || k % 2 == 0) return ValidationReport::fail("kernel side must be odd and positive");
    if (taps.size() != static_cast<std::size_t>(k) * k)
        return ValidationReport::fail("kernel tap count != K*K");
    double sum = 0.0;
    for (int r = 0; r < k; ++r) {
        for (int q = 0; q < k; ++q) {
            const double v = taps[static_cast<std::size_t>(r) * k + q];
            if (!std::isfinite(v)) return ValidationReport::fail(loc2("non-finite kernel tap", r, q));
            if (v < 0.0) return ValidationReport::fail(loc2("negative kernel tap", r, q));
            sum += v;
        }
    }
    if (std::abs(sum - 1.0) > tol)
        return ValidationReport::fail("kernel sum " + std::to_string(sum) + " not 1 within tolerance");
    return ValidationReport::pass();
}

Kernel::Kernel(int side, std::vector<double> t) : k(side), taps(std::move(t)) {
    throw_if_bad(validate_kernel(k, taps));
    const double sum = std::accumulate(taps.begin(), taps.end(), 0.0);
    for (double& v : taps) v /= sum;
}

Kernel Kernel::delta(int side) {
    if (side <= 0 || side % 2 == 0) throw ValidationError("kernel side must be odd and positive");
    std::vector<double> t(static_cast<std::size_t>(side) * side, 0.0);
    t[static_cast<std::size_t>(side / 2) * side + side / 2] = 1.0;
    return Kernel(side, std::move(t));
}

ValidationReport validate_basis(int count, int k, std::span<const double> taps, double tol) {
    if (count <= 0) return ValidationReport::fail("basis must have at least one kernel");
    if (k <= 0 || k % 2 == 0) return ValidationReport::fail("kernel side must be odd and positive");
    if (taps.size() != static_cast<std::size_t>(count) * k * k)
        return ValidationReport::fail("basis tap count != B*K*K");
    for (int b = 0; b < count; ++b) {
        auto r = validate_kernel(k, taps.subspan(static_cast<std::size_t>(b) * k * k,
                                                 static_cast<std::size_t>(k) * k), tol);
        if (!r.ok) return ValidationReport::fail("basis kernel " + std::to_string(b) + ": " + r.message);
    }
    return ValidationReport::pass();
}

KernelBasis::KernelBasis(int b, int side, std::vector<double> t, double tol)
    : count(b), k(side), taps(std::move(t)) {
    throw_if_bad(validate_basis(count, k, taps, tol));
    for (int i = 0; i < count; ++i) {
        double* p = taps.data() + static_cast<std::size_t>(i) * k * k;
        const double sum = std::accumulate(p, p + static_cast<std::size_t>(k) * k, 0.0);
        for (int t2 = 0; t2 < k * k; ++t2) p[t2] /= sum;
    }
}

KernelBasis::KernelBasis(const std::vector<Kernel>& kernels) {
    if (kernels.empty()) throw ValidationError("basis must have at least one kernel");
    count = static_cast<int>(kernels.size());
    k = kernels.front().k;
    taps.reserve(static_cast<std::size_t>(count) * k * k);
    for (const Kernel& kr : kernels) {
        if (kr.k != k) throw ValidationError("basis kernels must share one side length");
        taps.insert(taps.end(), kr.taps.begin(), kr.taps.end());
    }
}

Kernel KernelBasis::kernel(int b) const {
    auto s = kernel_taps(b);
    return Kernel(k, std::vector<double>(s.begin(), s.end()));
}

ValidationReport validate_mixing(int count, int height, int width,
                                 std::span<const double> coeffs, double tol) {
    if (count <= 0) return ValidationReport::fail("mixing field needs at least one plane");
    if (height <= 0 || width <= 0) return ValidationReport::fail("mixing field dimensions must be positive");
    if (coeffs.size() != static_cast<std::size_t>(count) * height * width)
        return ValidationReport::fail("mixing coefficient count != B*H*W");
    const std::size_t plane = static_cast<std::size_t>(height) * width;
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * width + x;
            double sum = 0.0;
            for (int b = 0; b < count; ++b) {
                const double v = coeffs[static_cast<std::size_t>(b) * plane + i];
                if (!std::isfinite(v)) return ValidationReport::fail(loc2("non-finite mixing coefficient", y, x));
                if (v < 0.0) return ValidationReport::fail(loc2("negative mixing coefficient", y, x));
                sum += v;
            }
            if (std::abs(sum - 1.0) > tol)
                return ValidationReport::fail(loc2("mixing coefficients do not sum to 1", y, x));
        }
    }
    return ValidationReport::pass();
}

MixingField::MixingField(int b, int h, int w, std::vector<double> c, double tol)
    : count(b), height(h), width(w), coeffs(std::move(c)) {
    throw_if_bad(validate_mixing(count, height, width, coeffs, tol));
    const std::size_t plane = static_cast<std::size_t>(height) * width;
    for (std::size_t i = 0; i < plane; ++i) {
        double sum = 0.0;
        for (int bb = 0; bb < count; ++bb) sum += coeffs[bb * plane + i];
        for (int bb = 0; bb < count; ++bb) coeffs[bb * plane + i] /= sum;
    }
}

MixingField MixingField::uniform(int b, int h, int w) {
    return MixingField(b, h, w,
                       std::vector<double>(static_cast<std::size_t>(b) * h * w, 1.0 / b));
}

ValidationReport validate_segment_map(int height, int width, int segment_count,
                                      std::span<const int> labels,
                                      std::span<const std::int64_t> sizes) {
    if (height <= 0 || width <= 0) return ValidationReport::fail("segment map dimensions must be positive");
    if (segment_count <= 0) return ValidationReport::fail("segment map needs at least one segment");
    if (labels.size() != static_cast<std::size_t>(height) * width)
        return ValidationReport::fail("label count != H*W");
    if (sizes.size() != static_cast<std::size_t>(segment_count))
        return ValidationReport::fail("size table length != segment count");
    std::vector<std::int64_t> counted(segment_count, 0);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const int l = labels[static_cast<std::size_t>(y) * width + x];
            if (l < 0 || l >= segment_count)
                return ValidationReport::fail(loc2("label out of range", y, x));
            ++counted[l];
        }
    }
    for (int s = 0; s < segment_count; ++s) {
        if (counted[s] != sizes[s])
            return ValidationReport::fail("segment " + std::to_string(s) + " size mismatch");
    }
    return ValidationReport::pass();
}

SegmentMap::SegmentMap(int h, int w, std::vector<int> lab)
    : height(h), width(w), labels(std::move(lab)) {
    if (h <= 0 || w <= 0) throw ValidationError("segment map dimensions must be positive");
    if (labels.size() != static_cast<std::size_t>(h) * w)
        throw ValidationError("label count != H*W");
    int max_label = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0) throw ValidationError("negative label at flat index " + std::to_string(i));
        max_label = std::max(max_label, labels[i]);
    }
    segment_count = max_label + 1;
    sizes.assign(segment_count, 0);
    for (int l : labels) ++sizes[l];
    for (int s = 0; s < segment_count; ++s) {
        if (sizes[s] == 0)
            throw ValidationError("segment " + std::to_string(s) + " has no pixels (labels must be contiguous)");
    }
}

SegmentMap SegmentMap::whole(int h, int w) {
    return SegmentMap(h, w, std::vector<int>(static_cast<std::size_t>(h) * w, 0));
}

SegmentMap segment_map_from_labels(int height, int width, const std::vector<int>& raw) {
    std::map<int, int> remap;
    for (int v : raw) remap.emplace(v, 0);
    int next = 0;
    for (auto& [value, idx] : remap) idx = next++;
    std::vector<int> labels(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) labels[i] = remap.at(raw[i]);
    return SegmentMap(height, width, std::move(labels));
}

SegmentMap reduce_segments(const SegmentMap& map, int max_objects) {
    const int background =
        static_cast<int>(std::max_element(map.sizes.begin(), map.sizes.end()) - map.sizes.begin());
    // Other segments ordered by size descending, ties by label for determinism.
    std::vector<int> others;
    for (int s = 0; s < map.segment_count; ++s)
        if (s != background) others.push_back(s);
    std::sort(others.begin(), others.end(), [&](int a, int b) {
        if (map.sizes[a] != map.sizes[b]) return map.sizes[a] > map.sizes[b];
        return a < b;
    });
    if (static_cast<int>(others.size()) > max_objects) others.resize(max_objects);

    std::vector<int> remap(map.segment_count, 0);
    int next = 1;
    for (int s : others) remap[s] = next++;
    std::vector<int> labels(map.labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = remap[map.labels[i]];
    return SegmentMap(map.height, map.width, std::move(labels));
}

Kernel pixel_kernel(const KernelBasis& basis, const MixingField& field, int y, int x) {
    if (basis.count != field.count)
        throw ValidationError("basis count " + std::to_string(basis.count) +
                              " != mixing field count " + std::to_string(field.count));
    if (y < 0 || y >= field.height || x < 0 || x >= field.width)
        throw ValidationError("pixel index out of bounds");
    const int kk = basis.k * basis.k;
    std::vector<double> out(kk, 0.0);
    for (int b = 0; b < basis.count; ++b) {
        const double m = field.at(b, y, x);
        const double* kt = basis.taps.data() + static_cast<std::size_t>(b) * kk;
        for (int t = 0; t < kk; ++t) out[t] += m * kt[t];
    }
    return Kernel(basis.k, std::move(out));
}

Image kernel_norm_map(const KernelBasis& basis, const MixingField& field) {
    if (basis.count != field.count)
        throw ValidationError("basis count != mixing field count");
    Image out(field.height, field.width, 1);
    for (int y = 0; y < field.height; ++y) {
        for (int x = 0; x < field.width; ++x) {
            const Kernel kr = pixel_kernel(basis, field, y, x);
            double ss = 0.0;
            for (double t : kr.taps) ss += t * t;
            out.at(y, x) = std::sqrt(ss);
        }
    }
    return out;
}

ValidationReport validate(const Image& img) {
    return validate_image(img.height, img.width, img.channels, img.data);
}
ValidationReport validate(const Kernel& k) { return validate_kernel(k.k, k.taps); }
ValidationReport validate(const KernelBasis& basis) {
    return validate_basis(basis.count, basis.k, basis.taps);
}
ValidationReport validate(const MixingField& field) {
    return validate_mixing(field.count, field.height, field.width, field.coeffs);
}
ValidationReport validate(const SegmentMap& map) {
    return validate_segment_map(map.height, map.width, map.segment_count, map.labels, map.sizes);
}

}  // namespace varblur
