#pragma once

#include <cstdint>
#include <vector>

#include "vtsize/image.hpp"

namespace vtsize {

/// One connected component of a binary mask.
struct Component {
    std::vector<std::int64_t> pixels; // linear indices into the source mask
    long long area = 0;
    double centroid_x = 0, centroid_y = 0;
    int min_x = 0, min_y = 0, max_x = 0, max_y = 0; // inclusive bounding box
    /// Principal-axis orientation from second central moments, degrees in
    /// [0,90] measured from horizontal. 0 for components of fewer than 2 pixels.
    double orientation_deg = 0;
};

/// Label the set pixels of `mask` into components (connectivity 4 or 8).
std::vector<Component> connected_components(const BinaryMask& mask, int connectivity = 8);

/// Crop a component into a standalone mask of its bounding box.
BinaryMask component_mask(const Component& comp, int mask_width);

} // namespace vtsize
