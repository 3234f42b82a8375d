#pragma once

#include <array>
#include <span>

#include "vtsize/error.hpp"
#include "vtsize/wrinkle.hpp"

namespace vtsize {

/// International standard size increments per dimension, in centimeters.
struct StandardIncrements {
    double cl = 3.0, sl = 1.0, sw = 2.0, ww = 3.0;

    double of(Dimension d) const {
        switch (d) {
            case Dimension::CL: return cl;
            case Dimension::SL: return sl;
            case Dimension::SW: return sw;
            case Dimension::WW: return ww;
        }
        return 0;
    }
};

/// One dimension across the three size levels (index 0 = A1).
struct DimensionLevels {
    std::array<double, 3> value{0, 0, 0}; // centimeters
    std::array<bool, 3> valid{false, false, false};
};

/// Compensated measurements for all three sizes of one garment.
struct SizeTriplet {
    DimensionLevels cl, sl, sw, ww;

    const DimensionLevels& of(Dimension d) const;
    DimensionLevels& of(Dimension d);
};

/// Per-dimension increment of one adjacent size pair; invalid when either
/// endpoint measurement is missing.
struct PairIncrements {
    int level_i = 0, level_j = 0; // 1-based size levels
    std::array<double, 4> value{0, 0, 0, 0};
    std::array<bool, 4> valid{false, false, false, false};
};

/// Absolute increments for the (A1,A2) and (A2,A3) pairs.
std::array<PairIncrements, 2> increments(const SizeTriplet& t);

struct ErrorMetrics {
    double mae = 0;   // cm
    double rmse = 0;  // cm
    double mape = 0;  // percent
    double smape = 0; // percent
};

/// Batch error metrics of observed increments against one standard increment:
/// MAE = mean|o-s|, RMSE = sqrt(mean (o-s)^2), MAPE = 100 mean(|o-s|/s),
/// SMAPE = 100 mean(|o-s| / ((|o|+|s|)/2)), with 0/0 counted as 0.
ErrorMetrics error_metrics(std::span<const double> observed, double standard);

/// Size-sensitivity weights: each valid dimension's measurement at
/// `weight_level` (1-based, A1 by default) over the sum of the valid ones.
/// Invalid dimensions get weight 0.
std::array<double, 4> size_weights(const SizeTriplet& t, const std::array<bool, 4>& valid,
                                   int weight_level = 1);

/// Weighted aggregate of four per-dimension scores, skipping invalid
/// dimensions and renormalizing. Throws when no dimension is valid.
double weighted_score(const std::array<double, 4>& scores, const std::array<bool, 4>& valid,
                      const SizeTriplet& t, int weight_level = 1);

/// Map an error value to a score in [0,1]: max(0, 1 - x/cap).
double normalized_score(double x, double cap);

} // namespace vtsize
