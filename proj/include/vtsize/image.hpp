#pragma once

#include <cstdint>
#include <vector>

#include "vtsize/error.hpp"

namespace vtsize {

/// Single-channel raster of intensities in [0,1], row-major.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<float> data;

    GrayImage() = default;
    GrayImage(int w, int h, float fill = 0.0f)
        : width(w), height(h), data(static_cast<size_t>(w) * h, fill) {}

    float& at(int x, int y) { return data[static_cast<size_t>(y) * width + x]; }
    float at(int x, int y) const { return data[static_cast<size_t>(y) * width + x]; }

    /// Value at (x,y) with edge replication for out-of-bounds coordinates.
    float at_clamped(int x, int y) const {
        if (x < 0) x = 0;
        if (x >= width) x = width - 1;
        if (y < 0) y = 0;
        if (y >= height) y = height - 1;
        return at(x, y);
    }

    bool empty() const { return width <= 0 || height <= 0; }
    size_t size() const { return data.size(); }
};

/// Per-pixel boolean raster, row-major. Values are 0 or 1.
struct BinaryMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;

    BinaryMask() = default;
    BinaryMask(int w, int h, std::uint8_t fill = 0)
        : width(w), height(h), data(static_cast<size_t>(w) * h, fill) {}

    std::uint8_t& at(int x, int y) { return data[static_cast<size_t>(y) * width + x]; }
    std::uint8_t at(int x, int y) const { return data[static_cast<size_t>(y) * width + x]; }

    /// Out-of-bounds pixels count as background.
    bool test(int x, int y) const {
        return x >= 0 && x < width && y >= 0 && y < height && at(x, y) != 0;
    }

    bool empty() const { return width <= 0 || height <= 0; }
    size_t size() const { return data.size(); }

    long long count() const {
        long long n = 0;
        for (auto v : data) n += (v != 0);
        return n;
    }

    bool operator==(const BinaryMask& o) const {
        return width == o.width && height == o.height && data == o.data;
    }
};

/// Interleaved RGB raster, per-channel values in [0,1].
struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<float> data; // r,g,b per pixel

    RgbImage() = default;
    RgbImage(int w, int h, float r = 0, float g = 0, float b = 0)
        : width(w), height(h), data(static_cast<size_t>(w) * h * 3) {
        for (size_t i = 0; i < data.size(); i += 3) {
            data[i] = r;
            data[i + 1] = g;
            data[i + 2] = b;
        }
    }

    float& at(int x, int y, int c) { return data[(static_cast<size_t>(y) * width + x) * 3 + c]; }
    float at(int x, int y, int c) const { return data[(static_cast<size_t>(y) * width + x) * 3 + c]; }

    bool empty() const { return width <= 0 || height <= 0; }
};

/// Per-pixel semantic label indices (human-parse map).
struct LabelMap {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> labels;

    LabelMap() = default;
    LabelMap(int w, int h, std::uint8_t fill = 0)
        : width(w), height(h), labels(static_cast<size_t>(w) * h, fill) {}

    std::uint8_t& at(int x, int y) { return labels[static_cast<size_t>(y) * width + x]; }
    std::uint8_t at(int x, int y) const { return labels[static_cast<size_t>(y) * width + x]; }

    bool empty() const { return width <= 0 || height <= 0; }
};

inline void require_same_size(int w1, int h1, int w2, int h2, const char* what) {
    if (w1 != w2 || h1 != h2)
        throw InvalidInput(std::string(what) + ": dimension mismatch (" + std::to_string(w1) + "x" +
                           std::to_string(h1) + " vs " + std::to_string(w2) + "x" + std::to_string(h2) + ")");
}

/// Mask -> gray image with 0/1 intensities.
GrayImage to_gray(const BinaryMask& mask);

/// Gray image -> mask; pixels strictly above `thresh` are set.
BinaryMask threshold(const GrayImage& img, float thresh);

/// Rec.601 luminance of an RGB image.
GrayImage luminance(const RgbImage& img);

/// Per-pixel logical ops; inputs must agree in size.
BinaryMask mask_and(const BinaryMask& a, const BinaryMask& b);
BinaryMask mask_or(const BinaryMask& a, const BinaryMask& b);
/// Pixels set in `a` but not in `b`.
BinaryMask mask_diff(const BinaryMask& a, const BinaryMask& b);
BinaryMask mask_not(const BinaryMask& a);

/// True if every set pixel of `a` is set in `b`.
bool is_subset(const BinaryMask& a, const BinaryMask& b);

} // namespace vtsize
