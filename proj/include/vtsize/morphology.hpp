#pragma once

#include <utility>
#include <vector>

#include "vtsize/image.hpp"

namespace vtsize {

enum class SEShape { Square, Cross, Disk };

/// Flat structuring element, symmetric about its center.
/// Square: (2r+1)x(2r+1) block. Cross: 4-neighborhood arms of length r.
/// Disk: offsets with dx^2+dy^2 <= r^2.
struct StructuringElement {
    SEShape shape = SEShape::Square;
    int radius = 1;

    StructuringElement() = default;
    StructuringElement(SEShape s, int r) : shape(s), radius(r) {
        if (r < 1) throw InvalidInput("StructuringElement: radius must be >= 1");
    }

    static StructuringElement square(int r) { return {SEShape::Square, r}; }
    static StructuringElement cross(int r) { return {SEShape::Cross, r}; }
    static StructuringElement disk(int r) { return {SEShape::Disk, r}; }

    /// All (dx,dy) offsets of the element, center included.
    std::vector<std::pair<int, int>> offsets() const;
};

/// Minkowski dilation repeated `iterations` times. iterations=0 returns the
/// input unchanged. Out-of-bounds pixels are treated as background.
BinaryMask dilate(const BinaryMask& mask, const StructuringElement& se, int iterations = 1);

/// Morphological erosion; out-of-bounds counts as background, so set pixels
/// whose element window leaves the image are eroded.
BinaryMask erode(const BinaryMask& mask, const StructuringElement& se, int iterations = 1);

/// open = erode^i then dilate^i; close = dilate^i then erode^i.
BinaryMask open(const BinaryMask& mask, const StructuringElement& se, int iterations = 1);
BinaryMask close(const BinaryMask& mask, const StructuringElement& se, int iterations = 1);

/// Grayscale flat-SE morphology (min/max window filters), edge-replicated.
GrayImage gray_dilate(const GrayImage& img, const StructuringElement& se);
GrayImage gray_erode(const GrayImage& img, const StructuringElement& se);
GrayImage gray_open(const GrayImage& img, const StructuringElement& se);
GrayImage gray_close(const GrayImage& img, const StructuringElement& se);

} // namespace vtsize
