#include "vtsize/size_eval.hpp"

#include <cmath>

namespace vtsize {

const DimensionLevels& SizeTriplet::of(Dimension d) const {
    switch (d) {
        case Dimension::CL: return cl;
        case Dimension::SL: return sl;
        case Dimension::SW: return sw;
        case Dimension::WW: return ww;
    }
    return cl;
}

DimensionLevels& SizeTriplet::of(Dimension d) {
    switch (d) {
        case Dimension::CL: return cl;
        case Dimension::SL: return sl;
        case Dimension::SW: return sw;
        case Dimension::WW: return ww;
    }
    return cl;
}

std::array<PairIncrements, 2> increments(const SizeTriplet& t) {
    static constexpr std::array<Dimension, 4> dims{Dimension::CL, Dimension::SL, Dimension::SW,
                                                   Dimension::WW};
    std::array<PairIncrements, 2> out;
    for (int pair = 0; pair < 2; ++pair) {
        const int i = pair, j = pair + 1; // 0-based level indices
        out[static_cast<size_t>(pair)].level_i = i + 1;
        out[static_cast<size_t>(pair)].level_j = j + 1;
        for (size_t d = 0; d < dims.size(); ++d) {
            const auto& lv = t.of(dims[d]);
            if (lv.valid[static_cast<size_t>(i)] && lv.valid[static_cast<size_t>(j)]) {
                out[static_cast<size_t>(pair)].value[d] =
                    std::abs(lv.value[static_cast<size_t>(i)] - lv.value[static_cast<size_t>(j)]);
                out[static_cast<size_t>(pair)].valid[d] = true;
            }
        }
    }
    return out;
}

ErrorMetrics error_metrics(std::span<const double> observed, double standard) {
    if (observed.empty()) throw InvalidInput("error_metrics: empty batch");
    if (!(standard > 0)) throw InvalidInput("error_metrics: standard increment must be > 0");

    double abs_sum = 0, sq_sum = 0, pct_sum = 0, spct_sum = 0;
    for (double o : observed) {
        const double err = std::abs(o - standard);
        abs_sum += err;
        sq_sum += (o - standard) * (o - standard);
        pct_sum += err / standard;
        const double denom = (std::abs(o) + std::abs(standard)) / 2.0;
        spct_sum += (err == 0.0 && denom == 0.0) ? 0.0 : err / denom;
    }
    const double n = static_cast<double>(observed.size());
    return {abs_sum / n, std::sqrt(sq_sum / n), 100.0 * pct_sum / n, 100.0 * spct_sum / n};
}

std::array<double, 4> size_weights(const SizeTriplet& t, const std::array<bool, 4>& valid,
                                   int weight_level) {
    if (weight_level < 1 || weight_level > 3)
        throw InvalidInput("size_weights: weight level must be 1..3");
    static constexpr std::array<Dimension, 4> dims{Dimension::CL, Dimension::SL, Dimension::SW,
                                                   Dimension::WW};
    const size_t li = static_cast<size_t>(weight_level - 1);
    std::array<double, 4> w{0, 0, 0, 0};
    double total = 0;
    for (size_t d = 0; d < dims.size(); ++d) {
        const auto& lv = t.of(dims[d]);
        if (valid[d] && lv.valid[li]) {
            w[d] = lv.value[li];
            total += w[d];
        }
    }
    if (!(total > 0)) throw InvalidInput("size_weights: no valid dimension with positive measurement");
    for (auto& v : w) v /= total;
    return w;
}

double weighted_score(const std::array<double, 4>& scores, const std::array<bool, 4>& valid,
                      const SizeTriplet& t, int weight_level) {
    const auto w = size_weights(t, valid, weight_level);
    double acc = 0;
    for (size_t d = 0; d < 4; ++d) acc += w[d] * scores[d];
    return acc;
}

double normalized_score(double x, double cap) {
    if (!(cap > 0)) throw InvalidInput("normalized_score: cap must be > 0");
    return std::max(0.0, 1.0 - x / cap);
}

} // namespace vtsize
