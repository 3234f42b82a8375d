#pragma once

#include <string>
#include <string_view>

#include "vtsize/image.hpp"

namespace vtsize {

/// Single-channel mask PNG: 0 = background, 255 = mask. Any nonzero sample
/// reads back as set.
BinaryMask read_mask_png(const std::string& path);
void write_mask_png(const BinaryMask& mask, const std::string& path);

/// 8-bit RGB PNG; alpha is dropped, grayscale is expanded.
RgbImage read_rgb_png(const std::string& path);
void write_rgb_png(const RgbImage& img, const std::string& path);

/// 8-bit grayscale PNG mapped to [0,1].
GrayImage read_gray_png(const std::string& path);
void write_gray_png(const GrayImage& img, const std::string& path);

/// Label map: paletted PNGs are read as raw palette indices, 8-bit grayscale
/// as plain label values. Written as 8-bit grayscale of the indices.
LabelMap read_label_png(const std::string& path);
void write_label_png(const LabelMap& labels, const std::string& path);

/// In-memory PNG payloads for the HTTP interfaces.
std::string encode_mask_png(const BinaryMask& mask);
BinaryMask decode_mask_png(std::string_view bytes);
std::string encode_rgb_png(const RgbImage& img);
RgbImage decode_rgb_png(std::string_view bytes);

} // namespace vtsize
