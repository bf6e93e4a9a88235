#include "varblur/io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <vector>

namespace varblur {

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

void write_f32le(std::ostream& os, const double* src, std::size_t n) {
    std::vector<unsigned char> buf(n * 4);
    for (std::size_t i = 0; i < n; ++i) {
        float f = static_cast<float>(src[i]);
        std::uint32_t u;
        std::memcpy(&u, &f, 4);
        buf[4 * i + 0] = static_cast<unsigned char>(u & 0xff);
        buf[4 * i + 1] = static_cast<unsigned char>((u >> 8) & 0xff);
        buf[4 * i + 2] = static_cast<unsigned char>((u >> 16) & 0xff);
        buf[4 * i + 3] = static_cast<unsigned char>((u >> 24) & 0xff);
    }
    os.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
}

void read_f32le(std::istream& is, double* dst, std::size_t n, const char* ctx) {
    std::vector<unsigned char> buf(n * 4);
    if (!is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size())))
        throw IoError(std::string("truncated file while reading ") + ctx);
    for (std::size_t i = 0; i < n; ++i) {
        std::uint32_t u = static_cast<std::uint32_t>(buf[4 * i + 0]) |
                          (static_cast<std::uint32_t>(buf[4 * i + 1]) << 8) |
                          (static_cast<std::uint32_t>(buf[4 * i + 2]) << 16) |
                          (static_cast<std::uint32_t>(buf[4 * i + 3]) << 24);
        float f;
        std::memcpy(&f, &u, 4);
        dst[i] = static_cast<double>(f);
    }
}

void check_magic(std::istream& is, const char* magic, const char* what) {
    char got[4];
    if (!is.read(got, 4)) throw IoError(std::string("truncated file: no ") + what + " magic");
    if (std::memcmp(got, magic, 4) != 0)
        throw IoError(std::string("bad magic: expected ") + what);
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open for writing: " + path.string());
    return os;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open for reading: " + path.string());
    return is;
}

}  // namespace

void save_kernels(const std::filesystem::path& path, const KernelBasis& basis,
                  const MixingField* field) {
    if (field) {
        if (field->count != basis.count)
            throw ValidationError("mixing field count != basis count");
    }
    auto os = open_out(path);
    os.write("VBK1", 4);
    write_u32le(os, static_cast<std::uint32_t>(basis.count));
    write_u32le(os, static_cast<std::uint32_t>(basis.k));
    write_u32le(os, field ? static_cast<std::uint32_t>(field->height) : 0u);
    write_u32le(os, field ? static_cast<std::uint32_t>(field->width) : 0u);
    write_u32le(os, field ? 1u : 0u);
    write_f32le(os, basis.taps.data(), basis.taps.size());
    if (field) write_f32le(os, field->coeffs.data(), field->coeffs.size());
    if (!os) throw IoError("write failed: " + path.string());
}

KernelContainer load_kernels(const std::filesystem::path& path) {
    auto is = open_in(path);
    check_magic(is, "VBK1", "VBK1");
    const std::uint32_t b = read_u32le(is, "VBK1 B");
    const std::uint32_t k = read_u32le(is, "VBK1 K");
    const std::uint32_t h = read_u32le(is, "VBK1 H");
    const std::uint32_t w = read_u32le(is, "VBK1 W");
    const std::uint32_t flags = read_u32le(is, "VBK1 flags");
    if (b == 0 || b > 4096 || k == 0 || k > 4096)
        throw IoError("implausible VBK1 header in " + path.string());
    std::vector<double> taps(static_cast<std::size_t>(b) * k * k);
    read_f32le(is, taps.data(), taps.size(), "VBK1 kernels");
    KernelContainer out;
    out.basis = KernelBasis(static_cast<int>(b), static_cast<int>(k), std::move(taps));
    if (flags & 1u) {
        std::vector<double> coeffs(static_cast<std::size_t>(b) * h * w);
        read_f32le(is, coeffs.data(), coeffs.size(), "VBK1 mixing field");
        out.field = MixingField(static_cast<int>(b), static_cast<int>(h), static_cast<int>(w),
                                std::move(coeffs));
    }
    return out;
}

void save_vbi1(const std::filesystem::path& path, const Image& img) {
    auto os = open_out(path);
    os.write("VBI1", 4);
    write_u32le(os, static_cast<std::uint32_t>(img.height));
    write_u32le(os, static_cast<std::uint32_t>(img.width));
    write_u32le(os, static_cast<std::uint32_t>(img.channels));
    write_f32le(os, img.data.data(), img.data.size());
    if (!os) throw IoError("write failed: " + path.string());
}

Image load_vbi1(const std::filesystem::path& path) {
    auto is = open_in(path);
    check_magic(is, "VBI1", "VBI1");
    const std::uint32_t h = read_u32le(is, "VBI1 H");
    const std::uint32_t w = read_u32le(is, "VBI1 W");
    const std::uint32_t c = read_u32le(is, "VBI1 C");
    if (h == 0 || w == 0 || (c != 1 && c != 3) || h > 1u << 20 || w > 1u << 20)
        throw IoError("implausible VBI1 header in " + path.string());
    std::vector<double> data(static_cast<std::size_t>(h) * w * c);
    read_f32le(is, data.data(), data.size(), "VBI1 samples");
    return Image(static_cast<int>(h), static_cast<int>(w), static_cast<int>(c), std::move(data));
}

namespace {

struct PngReadCtx {
    png_structp png = nullptr;
    png_infop info = nullptr;
    std::FILE* fp = nullptr;
    ~PngReadCtx() {
        if (png) png_destroy_read_struct(&png, &info, nullptr);
        if (fp) std::fclose(fp);
    }
};

struct PngWriteCtx {
    png_structp png = nullptr;
    png_infop info = nullptr;
    std::FILE* fp = nullptr;
    ~PngWriteCtx() {
        if (png) png_destroy_write_struct(&png, &info);
        if (fp) std::fclose(fp);
    }
};

// Reads rows of raw bytes; `expand_palette` controls whether palette images
// are expanded to RGB (images) or kept as indices (label maps).
struct RawPng {
    int height = 0, width = 0, channels = 0, bit_depth = 8;
    bool was_palette = false;
    std::vector<std::uint8_t> bytes;  // row-major, interleaved, big-endian u16 pairs when 16-bit
};

RawPng read_png_raw(const std::filesystem::path& path, bool expand_palette) {
    PngReadCtx ctx;
    ctx.fp = std::fopen(path.string().c_str(), "rb");
    if (!ctx.fp) throw IoError("cannot open for reading: " + path.string());
    unsigned char sig[8];
    if (std::fread(sig, 1, 8, ctx.fp) != 8 || png_sig_cmp(sig, 0, 8))
        throw IoError("not a PNG file: " + path.string());
    ctx.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!ctx.png) throw IoError("libpng init failed");
    ctx.info = png_create_info_struct(ctx.png);
    if (!ctx.info) throw IoError("libpng init failed");
    if (setjmp(png_jmpbuf(ctx.png))) throw IoError("libpng failed to decode " + path.string());
    png_init_io(ctx.png, ctx.fp);
    png_set_sig_bytes(ctx.png, 8);
    png_read_info(ctx.png, ctx.info);

    const png_byte color = png_get_color_type(ctx.png, ctx.info);
    int depth = png_get_bit_depth(ctx.png, ctx.info);
    RawPng out;
    out.was_palette = (color == PNG_COLOR_TYPE_PALETTE);

    if (out.was_palette && expand_palette) png_set_palette_to_rgb(ctx.png);
    if (out.was_palette && !expand_palette && depth < 8) png_set_packing(ctx.png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(ctx.png);
    if (png_get_valid(ctx.png, ctx.info, PNG_INFO_tRNS) && expand_palette)
        png_set_tRNS_to_alpha(ctx.png);
    if (color & PNG_COLOR_MASK_ALPHA || (out.was_palette && expand_palette))
        png_set_strip_alpha(ctx.png);
    png_read_update_info(ctx.png, ctx.info);

    out.height = static_cast<int>(png_get_image_height(ctx.png, ctx.info));
    out.width = static_cast<int>(png_get_image_width(ctx.png, ctx.info));
    out.bit_depth = png_get_bit_depth(ctx.png, ctx.info);
    out.channels = png_get_channels(ctx.png, ctx.info);
    const std::size_t rowbytes = png_get_rowbytes(ctx.png, ctx.info);
    out.bytes.resize(rowbytes * out.height);
    std::vector<png_bytep> rows(out.height);
    for (int y = 0; y < out.height; ++y) rows[y] = out.bytes.data() + rowbytes * y;
    png_read_image(ctx.png, rows.data());
    png_read_end(ctx.png, nullptr);
    return out;
}

}  // namespace

Image load_png(const std::filesystem::path& path) {
    RawPng raw = read_png_raw(path, /*expand_palette=*/true);
    int c = raw.channels;
    if (c != 1 && c != 3) throw IoError("unsupported PNG channel count in " + path.string());
    Image img(raw.height, raw.width, c, 0.0, Encoding::Gamma);
    const double scale = raw.bit_depth == 16 ? 1.0 / 65535.0 : 1.0 / 255.0;
    const std::size_t px = static_cast<std::size_t>(raw.height) * raw.width;
    for (std::size_t i = 0; i < px; ++i) {
        for (int ch = 0; ch < c; ++ch) {
            double v;
            if (raw.bit_depth == 16) {
                const std::size_t off = (i * c + ch) * 2;  // PNG 16-bit is big-endian
                v = static_cast<double>((raw.bytes[off] << 8) | raw.bytes[off + 1]) * scale;
            } else {
                v = static_cast<double>(raw.bytes[i * c + ch]) * scale;
            }
            img.data[static_cast<std::size_t>(ch) * px + i] = v;
        }
    }
    return img;
}

void save_png(const std::filesystem::path& path, const Image& img, int bit_depth) {
    if (bit_depth != 8 && bit_depth != 16) throw IoError("PNG bit depth must be 8 or 16");
    PngWriteCtx ctx;
    ctx.fp = std::fopen(path.string().c_str(), "wb");
    if (!ctx.fp) throw IoError("cannot open for writing: " + path.string());
    ctx.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!ctx.png) throw IoError("libpng init failed");
    ctx.info = png_create_info_struct(ctx.png);
    if (!ctx.info) throw IoError("libpng init failed");
    if (setjmp(png_jmpbuf(ctx.png))) throw IoError("libpng failed to encode " + path.string());
    png_init_io(ctx.png, ctx.fp);
    // Pinned encoder settings: fixed compression level and filter so the
    // same image always produces the same bytes.
    png_set_compression_level(ctx.png, 6);
    png_set_filter(ctx.png, 0, PNG_FILTER_NONE);
    const int color = img.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB;
    png_set_IHDR(ctx.png, ctx.info, img.width, img.height, bit_depth, color,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(ctx.png, ctx.info);

    const std::size_t px = static_cast<std::size_t>(img.height) * img.width;
    const int c = img.channels;
    const double maxv = bit_depth == 16 ? 65535.0 : 255.0;
    const std::size_t rowbytes = static_cast<std::size_t>(img.width) * c * (bit_depth / 8);
    std::vector<std::uint8_t> row(rowbytes);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            for (int ch = 0; ch < c; ++ch) {
                const double v = img.data[static_cast<std::size_t>(ch) * px +
                                          static_cast<std::size_t>(y) * img.width + x];
                const double clipped = std::clamp(v, 0.0, 1.0);
                const auto q = static_cast<std::uint32_t>(std::lround(clipped * maxv));
                if (bit_depth == 16) {
                    row[(static_cast<std::size_t>(x) * c + ch) * 2] =
                        static_cast<std::uint8_t>((q >> 8) & 0xff);
                    row[(static_cast<std::size_t>(x) * c + ch) * 2 + 1] =
                        static_cast<std::uint8_t>(q & 0xff);
                } else {
                    row[static_cast<std::size_t>(x) * c + ch] = static_cast<std::uint8_t>(q);
                }
            }
        }
        png_write_row(ctx.png, row.data());
    }
    png_write_end(ctx.png, nullptr);
    if (std::fflush(ctx.fp) != 0) throw IoError("write failed: " + path.string());
}

SegmentMap load_label_png(const std::filesystem::path& path) {
    RawPng raw = read_png_raw(path, /*expand_palette=*/false);
    if (raw.bit_depth != 8 || raw.channels != 1)
        throw IoError("label image must be 8-bit single-channel (palette or gray): " + path.string());
    std::vector<int> values(raw.bytes.begin(),
                            raw.bytes.begin() + static_cast<std::size_t>(raw.height) * raw.width);
    return segment_map_from_labels(raw.height, raw.width, values);
}

std::vector<std::uint8_t> load_mask_png(const std::filesystem::path& path, int& height, int& width) {
    RawPng raw = read_png_raw(path, /*expand_palette=*/false);
    height = raw.height;
    width = raw.width;
    const std::size_t px = static_cast<std::size_t>(raw.height) * raw.width;
    std::vector<std::uint8_t> mask(px, 0);
    const int c = raw.channels;
    for (std::size_t i = 0; i < px; ++i) {
        std::uint32_t v = 0;
        if (raw.bit_depth == 16) {
            for (int ch = 0; ch < c; ++ch)
                v |= (raw.bytes[(i * c + ch) * 2] << 8) | raw.bytes[(i * c + ch) * 2 + 1];
        } else {
            for (int ch = 0; ch < c; ++ch) v |= raw.bytes[i * c + ch];
        }
        mask[i] = v != 0 ? 1 : 0;
    }
    return mask;
}

Image load_image(const std::filesystem::path& path) {
    const auto ext = path.extension().string();
    if (ext == ".vbi1") return load_vbi1(path);
    if (ext == ".png") return load_png(path);
    throw IoError("unsupported image extension: " + path.string());
}

void save_image(const std::filesystem::path& path, const Image& img) {
    const auto ext = path.extension().string();
    if (ext == ".vbi1") return save_vbi1(path, img);
    if (ext == ".png") return save_png(path, img);
    throw IoError("unsupported image extension: " + path.string());
}

}  // namespace varblur
