#pragma once

#include <vector>

#include "vtsize/image.hpp"

namespace vtsize {

/// Smooth with the normalized 5x5 binomial kernel (sigma ~ 1.1), edge-replicated
/// borders. Output stays in [0,1].
GrayImage gaussian5x5(const GrayImage& img);

/// Separable Gaussian smoothing with arbitrary sigma, kernel truncated at 3*sigma.
GrayImage gaussian(const GrayImage& img, double sigma);

struct FrangiParams {
    std::vector<double> scales{1.5, 2.5, 3.5}; // sigmas in pixels
    double beta = 0.5;                         // blobness sensitivity
    double c = 0.08;                           // structureness, as a fraction of the max Hessian norm
};

/// 2-D Frangi vesselness, bright-ridge polarity, per-pixel max over scales,
/// rescaled so the strongest response is 1 (all-zero stays all-zero).
GrayImage frangi(const GrayImage& img, const FrangiParams& params = {});

struct GaborParams {
    std::vector<double> orientations_deg{0, 22.5, 45, 67.5, 90, 112.5, 135, 157.5};
    double wavelength = 8.0; // carrier wavelength in pixels
    double sigma = 4.0;      // isotropic envelope sigma in pixels
};

/// Mean over orientations of the quadrature Gabor magnitude, rescaled to [0,1].
/// Orientation is the direction of the carrier wave vector (normal to the
/// stripes the filter responds to), degrees from the x axis.
GrayImage gabor_bank(const GrayImage& img, const GaborParams& params = {});

} // namespace vtsize
