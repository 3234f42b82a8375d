#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "vtsize/filters.hpp"
#include "vtsize/morphology.hpp"
#include "vtsize/size_eval.hpp"
#include "vtsize/wrinkle.hpp"

namespace vtsize {

/// Every tunable of the pipeline, loadable from a JSON config file, overridable
/// by VTSIZE_* environment variables and then by CLI flags.
struct RunConfig {
    std::string manifest_path;
    std::string out_dir = "out";
    std::vector<int> sizes{1, 2, 3};
    bool strict = false;
    int jobs = 1;

    // mask generation
    std::string se_shape = "square";
    int se_radius = 1;
    int iterations_per_level = 5;
    double extension_factor = 0.8;
    double keypoint_min_confidence = 0.05;

    // refinement
    std::string refine_mode = "classical"; // classical | external | none
    int edge_band = 7;
    std::string refine_backend_url;
    bool refine_fallback = true;
    double backend_timeout_s = 30.0;

    // try-on client
    std::string tryon_backend_url;
    int tryon_attempts = 3;
    double tryon_backoff_s = 0.5;

    // measurement
    std::string label_schema_path;
    double background_tolerance = 0.12;
    double shoulder_band = 0.05;
    double waist_band = 0.10;
    std::optional<double> cm_per_pixel; // overrides per-record scale when set

    // wrinkle compensation
    double fusion_weight = 0.5;
    double wrinkle_threshold = 0.2;
    double zone_split = 0.5;
    FrangiParams frangi;
    GaborParams gabor;
    CompensationThresholds compensation;
    bool literal_compensation = false; // use length + length*R(length) instead

    // size evaluation
    StandardIncrements standards;
    int weight_level = 1;       // size level whose measurements weight Eq-style scores
    double percent_score_cap = 100.0; // cap for MAPE/SMAPE score normalization

    StructuringElement se() const;

    static RunConfig from_json(const nlohmann::json& j);
    static RunConfig load(const std::string& path);
    nlohmann::json to_json() const;

    /// Apply VTSIZE_* environment overrides (VTSIZE_OUT, VTSIZE_JOBS,
    /// VTSIZE_STRICT, VTSIZE_CM_PER_PIXEL, VTSIZE_BACKEND_URL, ...).
    void apply_env();

    /// Throws ConfigError on out-of-range values or a missing manifest.
    void validate(bool need_manifest = true) const;
};

} // namespace vtsize
