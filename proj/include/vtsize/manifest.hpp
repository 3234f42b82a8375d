#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vtsize/error.hpp"

namespace vtsize {

/// One person-garment pair. Paths are taken as written (relative paths are
/// resolved against the working directory). The per-size maps are filled in by
/// gen-masks / tryon runs and may also be provided directly.
struct ManifestRecord {
    std::string id;
    std::string person;
    std::string mask; // tight-fitting source mask
    std::string keypoints;
    std::string label_map;
    std::string garment;
    std::optional<double> cm_per_pixel;
    std::optional<double> person_height_cm;
    std::map<int, std::string> refined_masks; // size level -> path
    std::map<int, std::string> generated;     // size level -> path
    int line_no = 0;
};

/// Line-delimited JSON records. Blank lines and lines starting with '#' are
/// skipped. Records without an explicit "id" get one derived from the line
/// number.
std::vector<ManifestRecord> parse_manifest(const std::string& text);
std::vector<ManifestRecord> load_manifest(const std::string& path);

/// Write records back out (one JSON object per line, sorted keys).
void save_manifest(const std::vector<ManifestRecord>& records, const std::string& path);

} // namespace vtsize
