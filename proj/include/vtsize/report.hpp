#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "vtsize/measure.hpp"
#include "vtsize/size_eval.hpp"
#include "vtsize/wrinkle.hpp"

namespace vtsize {

inline constexpr const char* kToolName = "vtsize";
inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kReportSchemaVersion = "1";

/// Everything measured for one size level of one record.
struct SizeEntry {
    bool present = false;
    std::string generated_path;
    std::string mask_path;
    RawMeasurement raw;             // pixels, before compensation
    WrinkleReport wrinkles;         // lengths + ratios
    CmMeasurement compensated;      // centimeters, after compensation
};

struct RecordReport {
    std::string id;
    bool ok = false;
    std::string error;              // set when the record failed
    std::vector<std::string> notes; // exclusions, fallbacks, sleeveless flags
    double cm_per_pixel = 0;
    std::array<SizeEntry, 3> sizes; // index 0 = A1
    std::array<PairIncrements, 2> pairs;
};

struct DimensionAggregate {
    ErrorMetrics metrics;
    int count = 0; // observations that entered the batch
};

/// Per pair (0: A1-A2, 1: A2-A3), per dimension (CL,SL,SW,WW order).
using PairAggregates = std::array<std::array<DimensionAggregate, 4>, 2>;

/// Weighted roll-up per error metric: X_t is the raw weighted error, E_t the
/// weighted normalized score (cm metrics capped by the standard increment,
/// percent metrics by percent_score_cap).
struct WeightedScores {
    std::array<double, 4> weights{0, 0, 0, 0}; // CL,SL,SW,WW; 0 when excluded
    std::map<std::string, double> x_t;         // keyed by metric name
    std::map<std::string, double> e_t;
};

struct RunReport {
    std::string schema_version = kReportSchemaVersion;
    std::string tool_version = kToolVersion;
    nlohmann::json config_echo;
    std::vector<RecordReport> records;
    PairAggregates aggregates{};
    std::array<WeightedScores, 2> weighted{};  // per pair

    nlohmann::json to_json() const;
    static RunReport from_json(const nlohmann::json& j);

    void save(const std::string& path) const;        // write-then-rename
    static RunReport load(const std::string& path);  // parse errors carry byte offsets
};

/// Flat CSV mirror of the aggregate table: one row per (pair, dimension).
std::string aggregates_csv(const RunReport& report);

/// Re-read a CSV produced by aggregates_csv (round-trip checks).
PairAggregates parse_aggregates_csv(const std::string& csv);

/// Human-readable fixed-width table of the aggregates.
std::string format_table(const RunReport& report);

} // namespace vtsize
