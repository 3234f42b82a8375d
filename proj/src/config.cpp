#include "vtsize/config.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>

namespace vtsize {

StructuringElement RunConfig::se() const {
    if (se_shape == "square") return StructuringElement::square(se_radius);
    if (se_shape == "cross") return StructuringElement::cross(se_radius);
    if (se_shape == "disk") return StructuringElement::disk(se_radius);
    throw ConfigError("config: unknown structuring element shape '" + se_shape + "'");
}

namespace {

template <typename T>
void maybe(const nlohmann::json& j, const char* key, T& dst) {
    if (j.contains(key)) dst = j.at(key).get<T>();
}

} // namespace

RunConfig RunConfig::from_json(const nlohmann::json& j) {
    RunConfig c;
    maybe(j, "manifest", c.manifest_path);
    maybe(j, "out", c.out_dir);
    maybe(j, "sizes", c.sizes);
    maybe(j, "strict", c.strict);
    maybe(j, "jobs", c.jobs);

    maybe(j, "se_shape", c.se_shape);
    maybe(j, "se_radius", c.se_radius);
    maybe(j, "iterations_per_level", c.iterations_per_level);
    maybe(j, "extension_factor", c.extension_factor);
    maybe(j, "keypoint_min_confidence", c.keypoint_min_confidence);

    maybe(j, "refine_mode", c.refine_mode);
    maybe(j, "edge_band", c.edge_band);
    maybe(j, "refine_backend_url", c.refine_backend_url);
    maybe(j, "refine_fallback", c.refine_fallback);
    maybe(j, "backend_timeout_s", c.backend_timeout_s);

    maybe(j, "tryon_backend_url", c.tryon_backend_url);
    maybe(j, "tryon_attempts", c.tryon_attempts);
    maybe(j, "tryon_backoff_s", c.tryon_backoff_s);

    maybe(j, "label_schema", c.label_schema_path);
    maybe(j, "background_tolerance", c.background_tolerance);
    maybe(j, "shoulder_band", c.shoulder_band);
    maybe(j, "waist_band", c.waist_band);
    if (j.contains("cm_per_pixel")) c.cm_per_pixel = j.at("cm_per_pixel").get<double>();

    maybe(j, "fusion_weight", c.fusion_weight);
    maybe(j, "wrinkle_threshold", c.wrinkle_threshold);
    maybe(j, "zone_split", c.zone_split);
    maybe(j, "frangi_scales", c.frangi.scales);
    maybe(j, "frangi_beta", c.frangi.beta);
    maybe(j, "frangi_c", c.frangi.c);
    maybe(j, "gabor_orientations", c.gabor.orientations_deg);
    maybe(j, "gabor_wavelength", c.gabor.wavelength);
    maybe(j, "gabor_sigma", c.gabor.sigma);
    maybe(j, "compensation_a", c.compensation.a);
    maybe(j, "compensation_b", c.compensation.b);
    maybe(j, "compensation_c", c.compensation.c);
    maybe(j, "compensation_d", c.compensation.d);
    maybe(j, "literal_compensation", c.literal_compensation);

    maybe(j, "standard_cl", c.standards.cl);
    maybe(j, "standard_sl", c.standards.sl);
    maybe(j, "standard_sw", c.standards.sw);
    maybe(j, "standard_ww", c.standards.ww);
    maybe(j, "weight_level", c.weight_level);
    maybe(j, "percent_score_cap", c.percent_score_cap);
    return c;
}

RunConfig RunConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config " + path + ": " + e.what());
    }
    return from_json(j);
}

nlohmann::json RunConfig::to_json() const {
    nlohmann::json j;
    j["manifest"] = manifest_path;
    j["out"] = out_dir;
    j["sizes"] = sizes;
    j["strict"] = strict;
    j["jobs"] = jobs;
    j["se_shape"] = se_shape;
    j["se_radius"] = se_radius;
    j["iterations_per_level"] = iterations_per_level;
    j["extension_factor"] = extension_factor;
    j["keypoint_min_confidence"] = keypoint_min_confidence;
    j["refine_mode"] = refine_mode;
    j["edge_band"] = edge_band;
    j["refine_backend_url"] = refine_backend_url;
    j["refine_fallback"] = refine_fallback;
    j["backend_timeout_s"] = backend_timeout_s;
    j["tryon_backend_url"] = tryon_backend_url;
    j["tryon_attempts"] = tryon_attempts;
    j["tryon_backoff_s"] = tryon_backoff_s;
    j["label_schema"] = label_schema_path;
    j["background_tolerance"] = background_tolerance;
    j["shoulder_band"] = shoulder_band;
    j["waist_band"] = waist_band;
    if (cm_per_pixel) j["cm_per_pixel"] = *cm_per_pixel;
    j["fusion_weight"] = fusion_weight;
    j["wrinkle_threshold"] = wrinkle_threshold;
    j["zone_split"] = zone_split;
    j["frangi_scales"] = frangi.scales;
    j["frangi_beta"] = frangi.beta;
    j["frangi_c"] = frangi.c;
    j["gabor_orientations"] = gabor.orientations_deg;
    j["gabor_wavelength"] = gabor.wavelength;
    j["gabor_sigma"] = gabor.sigma;
    j["compensation_a"] = compensation.a;
    j["compensation_b"] = compensation.b;
    j["compensation_c"] = compensation.c;
    j["compensation_d"] = compensation.d;
    j["literal_compensation"] = literal_compensation;
    j["standard_cl"] = standards.cl;
    j["standard_sl"] = standards.sl;
    j["standard_sw"] = standards.sw;
    j["standard_ww"] = standards.ww;
    j["weight_level"] = weight_level;
    j["percent_score_cap"] = percent_score_cap;
    return j;
}

void RunConfig::apply_env() {
    auto env_str = [](const char* name, std::string& dst) {
        if (const char* v = std::getenv(name)) dst = v;
    };
    auto env_double = [](const char* name, double& dst) {
        if (const char* v = std::getenv(name)) dst = std::stod(v);
    };
    auto env_int = [](const char* name, int& dst) {
        if (const char* v = std::getenv(name)) dst = std::stoi(v);
    };
    auto env_bool = [](const char* name, bool& dst) {
        if (const char* v = std::getenv(name)) dst = std::string(v) == "1" || std::string(v) == "true";
    };

    env_str("VTSIZE_MANIFEST", manifest_path);
    env_str("VTSIZE_OUT", out_dir);
    env_int("VTSIZE_JOBS", jobs);
    env_bool("VTSIZE_STRICT", strict);
    env_str("VTSIZE_LABEL_SCHEMA", label_schema_path);
    env_str("VTSIZE_REFINE_MODE", refine_mode);
    env_str("VTSIZE_REFINE_BACKEND_URL", refine_backend_url);
    env_str("VTSIZE_BACKEND_URL", tryon_backend_url);
    env_double("VTSIZE_BACKEND_TIMEOUT_S", backend_timeout_s);
    if (const char* v = std::getenv("VTSIZE_CM_PER_PIXEL")) cm_per_pixel = std::stod(v);
}

void RunConfig::validate(bool need_manifest) const {
    namespace fs = std::filesystem;
    if (need_manifest) {
        if (manifest_path.empty()) throw ConfigError("config: no manifest given");
        if (!fs::exists(manifest_path)) throw ConfigError("config: manifest not found: " + manifest_path);
    }
    if (sizes.empty()) throw ConfigError("config: size list is empty");
    for (int s : sizes)
        if (s < 1 || s > 3) throw ConfigError("config: size level " + std::to_string(s) + " out of range");
    if (jobs < 1) throw ConfigError("config: jobs must be >= 1");
    if (se_radius < 1) throw ConfigError("config: se_radius must be >= 1");
    se(); // validates the shape name
    if (iterations_per_level < 0) throw ConfigError("config: iterations_per_level must be >= 0");
    if (refine_mode != "classical" && refine_mode != "external" && refine_mode != "none")
        throw ConfigError("config: refine_mode must be classical, external or none");
    if (refine_mode == "external" && refine_backend_url.empty())
        throw ConfigError("config: refine_mode external needs refine_backend_url");
    if (edge_band < 1) throw ConfigError("config: edge_band must be >= 1");
    if (fusion_weight < 0 || fusion_weight > 1) throw ConfigError("config: fusion_weight must be in [0,1]");
    if (wrinkle_threshold <= 0 || wrinkle_threshold >= 1)
        throw ConfigError("config: wrinkle_threshold must be in (0,1)");
    if (zone_split <= 0 || zone_split >= 1) throw ConfigError("config: zone_split must be in (0,1)");
    if (cm_per_pixel && !(*cm_per_pixel > 0)) throw ConfigError("config: cm_per_pixel must be > 0");
    if (shoulder_band <= 0 || shoulder_band > 1 || waist_band <= 0 || waist_band > 1)
        throw ConfigError("config: row band fractions must be in (0,1]");
    if (!(standards.cl > 0 && standards.sl > 0 && standards.sw > 0 && standards.ww > 0))
        throw ConfigError("config: standard increments must be > 0");
    if (weight_level < 1 || weight_level > 3) throw ConfigError("config: weight_level must be 1..3");
    if (tryon_attempts < 1) throw ConfigError("config: tryon_attempts must be >= 1");
    try {
        compensation.validate();
    } catch (const Error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
}

} // namespace vtsize
