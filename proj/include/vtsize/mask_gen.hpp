#pragma once

#include <array>

#include "vtsize/image.hpp"
#include "vtsize/morphology.hpp"
#include "vtsize/pose.hpp"

namespace vtsize {

struct CoarseMaskParams {
    StructuringElement se = StructuringElement::square(1); // 3x3
    int iterations_per_level = 5;  // dilations/closings per size step
    double extension_factor = 0.8; // vertical keypoint extension per size step
};

/// Coarse mask for one size level. Lambda 1 returns the tight mask unchanged.
/// For lambda > 1 the Gaussian-smoothed mask is re-binarized at 0.5, dilated
/// and closed 5*(lambda-1) times, then unioned with the keypoint-extension
/// rectangle x in [x4, x4+|x6-x3|], y in [y3, y3+0.8*(lambda-1)*|y9-y3|]
/// (clipped to image bounds).
BinaryMask coarse_mask(const BinaryMask& tight, const PoseKeypoints& kp, SizeLevel level,
                       const CoarseMaskParams& params = {});

/// The three coarse masks, nested: result[0] is a subset of result[1] is a
/// subset of result[2]. result[0] is byte-identical to the input.
std::array<BinaryMask, 3> multi_size_masks(const BinaryMask& tight, const PoseKeypoints& kp,
                                           const CoarseMaskParams& params = {});

/// Garment proportional adjustment: identity for A1; for A2/A3 the height is
/// stretched to 120% (bilinear), width unchanged.
RgbImage adjust_garment(const RgbImage& garment, SizeLevel level);

} // namespace vtsize
