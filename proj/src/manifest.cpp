#include "vtsize/manifest.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace vtsize {

namespace {

ManifestRecord record_from_json(const nlohmann::json& j, int line_no) {
    ManifestRecord r;
    r.line_no = line_no;
    r.id = j.value("id", "record-" + std::to_string(line_no));
    r.person = j.value("person", "");
    r.mask = j.value("mask", "");
    r.keypoints = j.value("keypoints", "");
    r.label_map = j.value("label_map", "");
    r.garment = j.value("garment", "");
    if (j.contains("cm_per_pixel")) r.cm_per_pixel = j.at("cm_per_pixel").get<double>();
    if (j.contains("person_height_cm")) r.person_height_cm = j.at("person_height_cm").get<double>();
    for (const char* key : {"refined_masks", "generated"}) {
        if (!j.contains(key)) continue;
        auto& dst = std::string(key) == "refined_masks" ? r.refined_masks : r.generated;
        for (const auto& [k, v] : j.at(key).items()) {
            const int level = std::stoi(k);
            if (level < 1 || level > 3)
                throw ConfigError("manifest line " + std::to_string(line_no) + ": size level " + k +
                                  " out of range");
            dst[level] = v.get<std::string>();
        }
    }
    return r;
}

nlohmann::json record_to_json(const ManifestRecord& r) {
    nlohmann::json j;
    j["id"] = r.id;
    if (!r.person.empty()) j["person"] = r.person;
    if (!r.mask.empty()) j["mask"] = r.mask;
    if (!r.keypoints.empty()) j["keypoints"] = r.keypoints;
    if (!r.label_map.empty()) j["label_map"] = r.label_map;
    if (!r.garment.empty()) j["garment"] = r.garment;
    if (r.cm_per_pixel) j["cm_per_pixel"] = *r.cm_per_pixel;
    if (r.person_height_cm) j["person_height_cm"] = *r.person_height_cm;
    auto to_obj = [](const std::map<int, std::string>& m) {
        nlohmann::json o = nlohmann::json::object();
        for (const auto& [k, v] : m) o[std::to_string(k)] = v;
        return o;
    };
    if (!r.refined_masks.empty()) j["refined_masks"] = to_obj(r.refined_masks);
    if (!r.generated.empty()) j["generated"] = to_obj(r.generated);
    return j;
}

} // namespace

std::vector<ManifestRecord> parse_manifest(const std::string& text) {
    std::vector<ManifestRecord> out;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ConfigError("manifest line " + std::to_string(line_no) + ": " + e.what());
        }
        out.push_back(record_from_json(j, line_no));
    }
    return out;
}

std::vector<ManifestRecord> load_manifest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("manifest: cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_manifest(ss.str());
}

void save_manifest(const std::vector<ManifestRecord>& records, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("manifest: cannot write " + path);
    for (const auto& r : records) out << record_to_json(r).dump() << "\n";
}

} // namespace vtsize
