#pragma once

#include <string>
#include <vector>

#include "vtsize/filters.hpp"
#include "vtsize/image.hpp"
#include "vtsize/measure.hpp"
#include "vtsize/morphology.hpp"

namespace vtsize {

/// Wrinkle classification zones: A = upper body half, B = lower body half,
/// C = sleeves. Pairwise disjoint.
struct WrinkleZones {
    BinaryMask region_a;
    BinaryMask region_b;
    BinaryMask region_c;
};

/// Split the garment regions into zones; `split_fraction` picks the row that
/// divides the body's bounding rows into A (above) and B (below).
WrinkleZones make_zones(const GarmentRegions& regions, double split_fraction = 0.5);

struct WrinkleResponseParams {
    double fusion_weight = 0.5; // Frangi branch weight; Gabor gets 1-w
    StructuringElement se = StructuringElement::square(1);
    FrangiParams frangi;
    GaborParams gabor;
};

/// Fused wrinkle response inside `zone`:
///   w * frangi(gray-close(img)) + (1-w) * gabor(gray-open(img)),
/// computed on the image embedded in the zone (outside pixels take the zone's
/// mean intensity so flat zones give exactly zero) and zeroed outside the zone.
GrayImage wrinkle_response(const GrayImage& img, const BinaryMask& zone, double fusion_weight,
                           const WrinkleResponseParams& params = {});

enum class Dimension { CL, SL, SW, WW };

const char* dimension_name(Dimension d);

/// One classified wrinkle component, kept for audit.
struct WrinkleComponent {
    double orientation_deg = 0;
    char zone = '-';        // 'A', 'B', 'C', or '-' if outside every zone
    double length = 0;      // skeleton length in pixels
    bool assigned = false;  // false when dropped (no zone)
    Dimension dimension = Dimension::CL;
};

/// Per-dimension wrinkle totals plus the component inventory.
struct WrinkleReport {
    double length_cl = 0, length_sl = 0, length_sw = 0, length_ww = 0;
    double ratio_cl = 0, ratio_sl = 0, ratio_sw = 0, ratio_ww = 0;
    std::vector<WrinkleComponent> inventory;
    int dropped = 0; // components in no zone

    double length(Dimension d) const;
    double ratio(Dimension d) const;
};

/// Binarize the response at `threshold`, then route each connected component
/// by orientation and majority zone:
///   [0,45) in A or B -> CL;  [45,90] in A -> SW;
///   [45,90] in B -> WW;      [0,45) in C -> SL.
/// Components outside every zone are dropped and counted. Ratios are left 0.
WrinkleReport classify_wrinkles(const GrayImage& response, const WrinkleZones& zones,
                                double threshold);

/// Piecewise wrinkle-length thresholds in pixels; must be increasing.
struct CompensationThresholds {
    double a = 5000, b = 10000, c = 15000, d = 20000;

    void validate() const;
};

/// Size compensation ratio as a fraction in [0,1]:
///   0                                     for L < a
///   (L-a)/250 %                           for a <= L < b
///   (b-a)/250 % + (L-b)/200 %             for b <= L < c
///   (b-a)/250 % + (c-b)/200 % + (L-c)/250 % for c <= L < d
///   100 %                                 for d <= L
double compensation_ratio(double length, const CompensationThresholds& t = {});

/// Wrinkle-compensated dimension: measured * (1 + R(length)).
double compensated_length(double measured, double wrinkle_length,
                          const CompensationThresholds& t = {});

/// Literal alternative form: length + length * R(length).
double compensated_length_literal(double wrinkle_length, const CompensationThresholds& t = {});

/// Fill the per-dimension ratios of a report from its lengths.
void apply_compensation(WrinkleReport& report, const CompensationThresholds& t = {});

} // namespace vtsize
