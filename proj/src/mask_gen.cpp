#include "vtsize/mask_gen.hpp"

#include <algorithm>
#include <cmath>

#include "vtsize/filters.hpp"

namespace vtsize {

namespace {

// Keypoint-extension rectangle, clipped to image bounds. Rows/columns are
// inclusive; the vertical extension below y3 is round(factor*(lambda-1)*|y9-y3|).
BinaryMask extension_rectangle(int width, int height, const PoseKeypoints& kp, int lambda,
                               double factor) {
    const auto& relbow = kp.require(kp.map.right_elbow, "right_elbow");
    const auto& rwrist = kp.require(kp.map.right_wrist, "right_wrist");
    const auto& lelbow = kp.require(kp.map.left_elbow, "left_elbow");
    const auto& rhip = kp.require(kp.map.right_hip, "right_hip");

    const int x0 = static_cast<int>(std::lround(rwrist.x));
    const int x1 = x0 + static_cast<int>(std::lround(std::abs(lelbow.x - relbow.x)));
    const int y0 = static_cast<int>(std::lround(relbow.y));
    const int y1 = y0 + static_cast<int>(std::lround(factor * (lambda - 1) * std::abs(rhip.y - relbow.y)));

    BinaryMask rect(width, height);
    for (int y = std::max(0, y0); y <= std::min(height - 1, y1); ++y)
        for (int x = std::max(0, x0); x <= std::min(width - 1, x1); ++x) rect.at(x, y) = 1;
    return rect;
}

} // namespace

BinaryMask coarse_mask(const BinaryMask& tight, const PoseKeypoints& kp, SizeLevel level,
                       const CoarseMaskParams& params) {
    if (tight.empty()) throw InvalidInput("coarse_mask: empty mask");
    const int lambda = level.lambda();
    if (lambda == 1) return tight;

    const int iters = params.iterations_per_level * (lambda - 1);
    BinaryMask grown = threshold(gaussian5x5(to_gray(tight)), 0.5f);
    grown = dilate(grown, params.se, iters);
    grown = close(grown, params.se, iters);

    const auto rect = extension_rectangle(tight.width, tight.height, kp, lambda, params.extension_factor);
    return mask_or(grown, rect);
}

std::array<BinaryMask, 3> multi_size_masks(const BinaryMask& tight, const PoseKeypoints& kp,
                                           const CoarseMaskParams& params) {
    std::array<BinaryMask, 3> out{
        coarse_mask(tight, kp, SizeLevel(1), params),
        coarse_mask(tight, kp, SizeLevel(2), params),
        coarse_mask(tight, kp, SizeLevel(3), params),
    };
    // Smoothing can drop thin structures before the dilation recovers them, so
    // nesting is enforced by accumulating up the ladder.
    out[1] = mask_or(out[1], out[0]);
    out[2] = mask_or(out[2], out[1]);
    return out;
}

RgbImage adjust_garment(const RgbImage& garment, SizeLevel level) {
    if (garment.empty()) throw InvalidInput("adjust_garment: empty image");
    if (level.lambda() == 1) return garment;

    const int new_h = static_cast<int>(std::lround(garment.height * 1.2));
    RgbImage out(garment.width, new_h);
    const double scale = static_cast<double>(garment.height) / new_h;
    for (int y = 0; y < new_h; ++y) {
        // Bilinear along the vertical axis only; width is unchanged.
        const double sy = (y + 0.5) * scale - 0.5;
        const int y0 = std::clamp(static_cast<int>(std::floor(sy)), 0, garment.height - 1);
        const int y1 = std::min(y0 + 1, garment.height - 1);
        const double t = std::clamp(sy - y0, 0.0, 1.0);
        for (int x = 0; x < garment.width; ++x)
            for (int c = 0; c < 3; ++c)
                out.at(x, y, c) = static_cast<float>((1.0 - t) * garment.at(x, y0, c) + t * garment.at(x, y1, c));
    }
    return out;
}

} // namespace vtsize
