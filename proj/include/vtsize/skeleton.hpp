#pragma once

#include "vtsize/image.hpp"

namespace vtsize {

/// Thin a mask to a <=1-pixel-wide medial skeleton via two-subiteration
/// parallel thinning (Guo-Hall conditions). The skeleton is a subset of the
/// input and keeps each component connected.
BinaryMask skeletonize(const BinaryMask& mask);

/// Polyline length of a thinned mask: 1 per 4-neighbor link, sqrt(2) per
/// diagonal link. A diagonal link is skipped when the two pixels already share
/// a set 4-neighbor, so corner cuts are not double counted.
double skeleton_length(const BinaryMask& skel);

} // namespace vtsize
