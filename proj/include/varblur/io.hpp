#pragma once

#include <filesystem>
#include <optional>

#include "varblur/types.hpp"

namespace varblur {

/// Kernel container contents: a basis, optionally with a mixing field
/// (gen-kernels writes kernels only; dataset samples carry both).
struct KernelContainer {
    KernelBasis basis;
    std::optional<MixingField> field;
};

// "VBK1": magic, little-endian u32 B, K, H, W, flags, then f32 kernel taps
// (B*K*K) and, when flags bit 0 is set, f32 mixing coefficients (B*H*W).
// H and W are 0 when no field is stored.
void save_kernels(const std::filesystem::path& path, const KernelBasis& basis,
                  const MixingField* field = nullptr);
KernelContainer load_kernels(const std::filesystem::path& path);

// "VBI1": magic, little-endian u32 H, W, C, then f32 samples (planar).
void save_vbi1(const std::filesystem::path& path, const Image& img);
Image load_vbi1(const std::filesystem::path& path);

// PNG, 8- or 16-bit, grayscale or RGB. Values are mapped to [0,1] on load
// (tagged gamma-encoded) and clipped+rounded on save. Encoder settings are
// pinned so identical images produce identical files.
void save_png(const std::filesystem::path& path, const Image& img, int bit_depth = 8);
Image load_png(const std::filesystem::path& path);

/// Label image: palette PNGs yield the raw palette indices, grayscale PNGs
/// the 8-bit values; either way labels are remapped to contiguous [0, S).
SegmentMap load_label_png(const std::filesystem::path& path);

/// Binary mask: nonzero = positive. Accepts grayscale or palette PNG.
std::vector<std::uint8_t> load_mask_png(const std::filesystem::path& path, int& height, int& width);

/// Dispatches on extension: .png or .vbi1.
Image load_image(const std::filesystem::path& path);
void save_image(const std::filesystem::path& path, const Image& img);

}  // namespace varblur
