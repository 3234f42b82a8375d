#include "vtsize/pose.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace vtsize {

const Keypoint& PoseKeypoints::require(int index, const char* joint_name) const {
    if (!has(index))
        throw MeasurementError(std::string("missing keypoint ") + joint_name + " (index " +
                               std::to_string(index) + ")");
    return points[static_cast<size_t>(index)];
}

PoseKeypoints parse_keypoints(const std::string& json_text, int person, const KeypointIndexMap& map) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw InvalidInput(std::string("keypoints: ") + e.what());
    }
    if (!doc.contains("people") || !doc["people"].is_array())
        throw InvalidInput("keypoints: missing \"people\" array");
    const auto& people = doc["people"];
    if (person < 0 || person >= static_cast<int>(people.size()))
        throw InvalidInput("keypoints: person index " + std::to_string(person) + " out of range (" +
                           std::to_string(people.size()) + " people)");
    const auto& entry = people[static_cast<size_t>(person)];
    if (!entry.contains("pose_keypoints_2d") || !entry["pose_keypoints_2d"].is_array())
        throw InvalidInput("keypoints: missing \"pose_keypoints_2d\"");
    const auto& flat = entry["pose_keypoints_2d"];
    if (flat.size() % 3 != 0)
        throw InvalidInput("keypoints: flat triple list length not divisible by 3");

    PoseKeypoints out;
    out.map = map;
    out.points.reserve(flat.size() / 3);
    for (size_t i = 0; i + 2 < flat.size(); i += 3)
        out.points.push_back({flat[i].get<double>(), flat[i + 1].get<double>(), flat[i + 2].get<double>()});
    return out;
}

PoseKeypoints load_keypoints(const std::string& path, int person, const KeypointIndexMap& map) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInput("keypoints: cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return parse_keypoints(ss.str(), person, map);
    } catch (const Error& e) {
        throw InvalidInput(std::string(e.what()) + " [" + path + "]");
    }
}

} // namespace vtsize
