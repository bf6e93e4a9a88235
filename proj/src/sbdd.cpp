#include "varblur/sbdd.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "varblur/rng.hpp"

namespace varblur {

void rgb_to_hsv(double r, double g, double b, double& h, double& s, double& v) {
    const double mx = std::max({r, g, b});
    const double mn = std::min({r, g, b});
    const double d = mx - mn;
    v = mx;
    s = mx > 0.0 ? d / mx : 0.0;
    if (d <= 0.0) {
        h = 0.0;
        return;
    }
    double hh;
    if (mx == r)
        hh = std::fmod((g - b) / d, 6.0);
    else if (mx == g)
        hh = (b - r) / d + 2.0;
    else
        hh = (r - g) / d + 4.0;
    if (hh < 0.0) hh += 6.0;
    h = hh / 6.0;
}

void hsv_to_rgb(double h, double s, double v, double& r, double& g, double& b) {
    const double hh = std::fmod(std::max(h, 0.0), 1.0) * 6.0;
    const int sector = std::min(static_cast<int>(hh), 5);
    const double f = hh - sector;
    const double p = v * (1.0 - s);
    const double q = v * (1.0 - s * f);
    const double t = v * (1.0 - s * (1.0 - f));
    switch (sector) {
        case 0: r = v; g = t; b = p; break;
        case 1: r = q; g = v; b = p; break;
        case 2: r = p; g = v; b = t; break;
        case 3: r = p; g = q; b = v; break;
        case 4: r = t; g = p; b = v; break;
        default: r = v; g = p; b = q; break;
    }
}

Image brightness_scale(const Image& rgb, double factor) {
    if (rgb.channels != 3) throw ValidationError("brightness augmentation needs a 3-channel image");
    Image out = rgb;
    const std::size_t px = static_cast<std::size_t>(rgb.height) * rgb.width;
    for (std::size_t i = 0; i < px; ++i) {
        double h, s, v;
        rgb_to_hsv(rgb.data[i], rgb.data[px + i], rgb.data[2 * px + i], h, s, v);
        hsv_to_rgb(h, s, v * factor, out.data[i], out.data[px + i], out.data[2 * px + i]);
    }
    return out;
}

Image brightness_augment(const Image& rgb, std::uint64_t seed) {
    Rng rng(seed);
    return brightness_scale(rgb, rng.uniform(0.5, 1.5));
}

namespace {

struct StreakBox {
    int x0, y0, x1, y1;  // inclusive
    bool overlaps(const StreakBox& o, int pad) const {
        return !(x1 + pad < o.x0 || o.x1 + pad < x0 || y1 + pad < o.y0 || o.y1 + pad < y0);
    }
};

}  // namespace

Image light_streak_augment(const Image& rgb, int count, std::uint64_t seed) {
    if (rgb.channels != 3) throw ValidationError("light streak augmentation needs a 3-channel image");
    if (count < 0) throw ValidationError("streak count must be >= 0");
    Image out = rgb;
    if (count == 0) return out;

    Rng rng(seed);
    const int h = rgb.height, w = rgb.width;
    const std::size_t px = static_cast<std::size_t>(h) * w;
    std::vector<StreakBox> placed;

    for (int i = 0; i < count; ++i) {
        double cx = w / 2.0, cy = h / 2.0, angle = 0.0, length = 3.0, sw = 0.8, peak = 2.0;
        StreakBox box{0, 0, 0, 0};
        bool found = false;
        for (int attempt = 0; attempt < 40 && !found; ++attempt) {
            angle = rng.uniform(0.0, 3.141592653589793);
            length = rng.uniform(3.0, 15.0);
            sw = rng.uniform(0.6, 1.2);
            peak = rng.uniform(1.5, 4.0);
            const double ex = 0.5 * length * std::abs(std::cos(angle)) + 3.0 * sw + 1.0;
            const double ey = 0.5 * length * std::abs(std::sin(angle)) + 3.0 * sw + 1.0;
            cx = rng.uniform(std::min(ex, w / 2.0), std::max(w - 1.0 - ex, w / 2.0));
            cy = rng.uniform(std::min(ey, h / 2.0), std::max(h - 1.0 - ey, h / 2.0));
            box = StreakBox{static_cast<int>(std::floor(cx - ex)), static_cast<int>(std::floor(cy - ey)),
                            static_cast<int>(std::ceil(cx + ex)), static_cast<int>(std::ceil(cy + ey))};
            found = true;
            for (const auto& other : placed)
                if (box.overlaps(other, 2)) { found = false; break; }
        }
        placed.push_back(box);  // after bounded retries, place anyway

        const double ax = 0.5 * length * std::cos(angle), ay = 0.5 * length * std::sin(angle);
        const double cutoff = 3.0 * sw;
        const int y0 = std::max(0, box.y0), y1 = std::min(h - 1, box.y1);
        const int x0 = std::max(0, box.x0), x1 = std::min(w - 1, box.x1);
        for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) {
                // distance from the pixel to the streak's center segment
                const double dx = x - cx, dy = y - cy;
                const double t = std::clamp((dx * ax + dy * ay) / (ax * ax + ay * ay + 1e-12), -1.0, 1.0);
                const double ddx = dx - t * ax, ddy = dy - t * ay;
                const double d = std::sqrt(ddx * ddx + ddy * ddy);
                if (d > cutoff) continue;
                const double add = peak * std::exp(-d * d / (2.0 * sw * sw));
                const std::size_t idx = static_cast<std::size_t>(y) * w + x;
                out.data[idx] += add;
                out.data[px + idx] += add;
                out.data[2 * px + idx] += add;
            }
        }
    }
    return out;
}

DatasetSample make_sample(const Image& sharp, const SegmentMap& segments,
                          const std::vector<Kernel>& kernels, const SaturationParams& params,
                          double noise_sigma, std::uint64_t seed) {
    if (sharp.height != segments.height || sharp.width != segments.width)
        throw ValidationError("sharp image and segment map dims differ");
    if (segments.segment_count > 4)
        throw ValidationError("at most 4 segments (background + 3 objects) are supported");
    if (static_cast<int>(kernels.size()) != segments.segment_count)
        throw ValidationError("need exactly one kernel per segment");

    const int S = segments.segment_count;
    const int h = sharp.height, w = sharp.width;
    const std::size_t plane = static_cast<std::size_t>(h) * w;

    // Blur each segment's indicator mask with that segment's kernel.
    std::vector<double> blurred_masks(static_cast<std::size_t>(S) * plane);
    for (int s = 0; s < S; ++s) {
        Image mask(h, w, 1);
        for (std::size_t i = 0; i < plane; ++i)
            mask.data[i] = segments.labels[i] == s ? 1.0 : 0.0;
        Image bm = convolve(mask, kernels[s]);
        std::copy(bm.data.begin(), bm.data.end(), blurred_masks.begin() + s * plane);
    }
    // Renormalize pixel-wise into convex weights; degenerate pixels (all
    // blurred masks zero) fall back to uniform weights.
    for (std::size_t i = 0; i < plane; ++i) {
        double sum = 0.0;
        for (int s = 0; s < S; ++s) sum += blurred_masks[s * plane + i];
        if (sum < 1e-12) {
            for (int s = 0; s < S; ++s) blurred_masks[s * plane + i] = 1.0 / S;
        } else {
            for (int s = 0; s < S; ++s) blurred_masks[s * plane + i] /= sum;
        }
    }

    DatasetSample sample;
    sample.basis = KernelBasis(kernels);
    sample.field = MixingField(S, h, w, std::move(blurred_masks));
    sample.segments = segments;
    sample.noise_sigma = noise_sigma;
    sample.params = params;
    sample.seed = seed;
    sample.sharp = sharp;
    sample.blurry = degrade(BlurOperator(sample.basis, sample.field), sharp, params,
                            noise_sigma, seed);
    return sample;
}

namespace {

void write_u32le(std::ostream& os, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32le(std::istream& is, const char* ctx) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4))
        throw IoError(std::string("truncated file while reading ") + ctx);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void write_f32(std::ostream& os, double v) {
    float f = static_cast<float>(v);
    std::uint32_t u;
    std::memcpy(&u, &f, 4);
    write_u32le(os, u);
}

double read_f32(std::istream& is, const char* ctx) {
    const std::uint32_t u = read_u32le(is, ctx);
    float f;
    std::memcpy(&f, &u, 4);
    return static_cast<double>(f);
}

constexpr std::uint32_t kSampleVersion = 1;

}  // namespace

void write_sample(const std::filesystem::path& path, const DatasetSample& sample) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open for writing: " + path.string());
    os.write("VBS1", 4);
    write_u32le(os, kSampleVersion);
    write_f32(os, sample.noise_sigma);
    write_f32(os, sample.params.a);
    write_f32(os, sample.params.gamma);
    write_u32le(os, static_cast<std::uint32_t>(sample.seed & 0xffffffffu));
    write_u32le(os, static_cast<std::uint32_t>(sample.seed >> 32));

    auto write_image_block = [&](const Image& img) {
        os.write("VBI1", 4);
        write_u32le(os, static_cast<std::uint32_t>(img.height));
        write_u32le(os, static_cast<std::uint32_t>(img.width));
        write_u32le(os, static_cast<std::uint32_t>(img.channels));
        for (double v : img.data) write_f32(os, v);
    };
    write_image_block(sample.sharp);
    write_image_block(sample.blurry);

    os.write("VBK1", 4);
    write_u32le(os, static_cast<std::uint32_t>(sample.basis.count));
    write_u32le(os, static_cast<std::uint32_t>(sample.basis.k));
    write_u32le(os, static_cast<std::uint32_t>(sample.field.height));
    write_u32le(os, static_cast<std::uint32_t>(sample.field.width));
    write_u32le(os, 1u);
    for (double v : sample.basis.taps) write_f32(os, v);
    for (double v : sample.field.coeffs) write_f32(os, v);

    os.write("VBL1", 4);
    write_u32le(os, static_cast<std::uint32_t>(sample.segments.height));
    write_u32le(os, static_cast<std::uint32_t>(sample.segments.width));
    write_u32le(os, static_cast<std::uint32_t>(sample.segments.segment_count));
    for (int l : sample.segments.labels) write_u32le(os, static_cast<std::uint32_t>(l));
    if (!os) throw IoError("write failed: " + path.string());
}

DatasetSample read_sample(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open for reading: " + path.string());
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, "VBS1", 4) != 0)
        throw IoError("bad magic: expected VBS1 in " + path.string());
    const std::uint32_t version = read_u32le(is, "VBS1 version");
    if (version != kSampleVersion)
        throw IoError("unsupported VBS1 version " + std::to_string(version) + " in " + path.string());

    DatasetSample sample;
    sample.noise_sigma = read_f32(is, "noise sigma");
    sample.params.a = read_f32(is, "saturation a");
    sample.params.gamma = read_f32(is, "gamma");
    const std::uint64_t lo = read_u32le(is, "seed lo");
    const std::uint64_t hi = read_u32le(is, "seed hi");
    sample.seed = lo | (hi << 32);

    auto read_image_block = [&](const char* what) {
        char m[4];
        if (!is.read(m, 4) || std::memcmp(m, "VBI1", 4) != 0)
            throw IoError(std::string("bad magic: expected VBI1 for ") + what);
        const std::uint32_t h = read_u32le(is, "VBI1 H");
        const std::uint32_t w = read_u32le(is, "VBI1 W");
        const std::uint32_t c = read_u32le(is, "VBI1 C");
        std::vector<double> data(static_cast<std::size_t>(h) * w * c);
        for (double& v : data) v = read_f32(is, "VBI1 samples");
        return Image(static_cast<int>(h), static_cast<int>(w), static_cast<int>(c), std::move(data));
    };
    sample.sharp = read_image_block("sharp image");
    sample.blurry = read_image_block("blurry image");

    char m[4];
    if (!is.read(m, 4) || std::memcmp(m, "VBK1", 4) != 0)
        throw IoError("bad magic: expected VBK1 block in " + path.string());
    const std::uint32_t b = read_u32le(is, "VBK1 B");
    const std::uint32_t k = read_u32le(is, "VBK1 K");
    const std::uint32_t fh = read_u32le(is, "VBK1 H");
    const std::uint32_t fw = read_u32le(is, "VBK1 W");
    const std::uint32_t flags = read_u32le(is, "VBK1 flags");
    if (!(flags & 1u)) throw IoError("sample VBK1 block must carry a mixing field");
    std::vector<double> taps(static_cast<std::size_t>(b) * k * k);
    for (double& v : taps) v = read_f32(is, "VBK1 kernels");
    sample.basis = KernelBasis(static_cast<int>(b), static_cast<int>(k), std::move(taps));
    std::vector<double> coeffs(static_cast<std::size_t>(b) * fh * fw);
    for (double& v : coeffs) v = read_f32(is, "VBK1 mixing field");
    sample.field = MixingField(static_cast<int>(b), static_cast<int>(fh), static_cast<int>(fw),
                               std::move(coeffs));

    if (!is.read(m, 4) || std::memcmp(m, "VBL1", 4) != 0)
        throw IoError("bad magic: expected VBL1 block in " + path.string());
    const std::uint32_t sh = read_u32le(is, "VBL1 H");
    const std::uint32_t sw = read_u32le(is, "VBL1 W");
    const std::uint32_t sc = read_u32le(is, "VBL1 S");
    std::vector<int> labels(static_cast<std::size_t>(sh) * sw);
    for (int& l : labels) l = static_cast<int>(read_u32le(is, "VBL1 labels"));
    sample.segments = SegmentMap(static_cast<int>(sh), static_cast<int>(sw), std::move(labels));
    if (sample.segments.segment_count != static_cast<int>(sc))
        throw IoError("VBL1 segment count mismatch in " + path.string());
    return sample;
}

}  // namespace varblur
