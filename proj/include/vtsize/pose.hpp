#pragma once

#include <string>
#include <vector>

#include "vtsize/error.hpp"

namespace vtsize {

struct Keypoint {
    double x = 0;
    double y = 0;
    double confidence = 0;
};

/// Maps the semantic joints this pipeline needs onto keypoint indices.
/// Defaults follow the BODY-25 convention.
struct KeypointIndexMap {
    int right_elbow = 3;
    int right_wrist = 4;
    int left_elbow = 6;
    int right_hip = 9;
};

/// 2-D body keypoints with confidences. Keypoints below `min_confidence`
/// count as missing (pose estimators emit zero-confidence placeholders).
struct PoseKeypoints {
    std::vector<Keypoint> points;
    KeypointIndexMap map;
    double min_confidence = 0.05;

    bool has(int index) const {
        return index >= 0 && index < static_cast<int>(points.size()) &&
               points[static_cast<size_t>(index)].confidence >= min_confidence;
    }

    /// Fetch a keypoint or throw a MeasurementError naming the missing index.
    const Keypoint& require(int index, const char* joint_name) const;
};

/// Parse a pose-estimator JSON document: {"people":[{"pose_keypoints_2d":
/// [x,y,c, x,y,c, ...]}]}. `person` selects the entry in "people".
PoseKeypoints parse_keypoints(const std::string& json_text, int person = 0,
                              const KeypointIndexMap& map = {});

/// Read and parse a keypoint file; errors name the path.
PoseKeypoints load_keypoints(const std::string& path, int person = 0,
                             const KeypointIndexMap& map = {});

/// Garment size level: lambda 1 (tight, A1), 2 (fitted, A2), 3 (loose, A3).
class SizeLevel {
public:
    explicit SizeLevel(int lambda) : lambda_(lambda) {
        if (lambda < 1 || lambda > 3)
            throw InvalidInput("SizeLevel: lambda must be 1, 2 or 3, got " + std::to_string(lambda));
    }

    int lambda() const { return lambda_; }
    std::string label() const { return "A" + std::to_string(lambda_); }

private:
    int lambda_;
};

} // namespace vtsize
