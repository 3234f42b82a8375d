#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>

#include "vtsize/image.hpp"

namespace vtsize {

/// Index -> semantic name table for a human-parse label map. Names are
/// free-form; "background", "torso", "left_arm" and "right_arm" are the roles
/// this pipeline consumes. Several indices may share one name.
struct LabelSchema {
    std::map<int, std::string> names;

    std::vector<int> indices_of(const std::string& name) const;
    bool has(const std::string& name) const;

    /// Parse lines of "<index> <name>"; '#' starts a comment.
    static LabelSchema parse(const std::string& text);
    static LabelSchema load(const std::string& path);
};

/// Garment pixels split by body part. Regions are pairwise disjoint.
struct GarmentRegions {
    BinaryMask body;
    BinaryMask left_sleeve;
    BinaryMask right_sleeve;
};

/// Pixel-to-centimeter mapping.
struct PixelScale {
    double cm_per_pixel = 0;
    enum class Source { Explicit, PersonHeight } source = Source::Explicit;

    static PixelScale explicit_scale(double cm_per_pixel);
    /// Derive from a declared person height over the person's pixel extent.
    static PixelScale from_person_height(double person_cm, double person_pixels);
};

/// The four dimensions in pixels; a flag marks dimensions that could not be
/// measured (for instance SL on a sleeveless garment).
struct RawMeasurement {
    double cl = 0, sl = 0, sw = 0, ww = 0;
    bool cl_valid = false, sl_valid = false, sw_valid = false, ww_valid = false;
};

/// Same dimensions mapped to centimeters.
struct CmMeasurement {
    double cl = 0, sl = 0, sw = 0, ww = 0;
    bool cl_valid = false, sl_valid = false, sw_valid = false, ww_valid = false;
};

struct ExtractParams {
    /// Euclidean RGB distance under which a pixel counts as background.
    double background_tolerance = 0.12;
    /// Optional custom background predicate; overrides the median-color rule.
    std::function<bool(float r, float g, float b)> background_predicate;
};

/// Support of the generated garment: refined mask intersected with pixels that
/// do not look like background. Background is, by default, anything within
/// tolerance of the median color sampled outside the mask.
BinaryMask extract_garment(const RgbImage& generated, const BinaryMask& refined_mask,
                           const ExtractParams& params = {});

/// Split the garment support into central body and sleeves using the
/// human-parse labels. Requires "torso", "left_arm" and "right_arm" roles.
GarmentRegions split_regions(const BinaryMask& garment, const LabelMap& parse,
                             const LabelSchema& schema);

struct MeasureParams {
    double shoulder_band = 0.05; // top fraction of body rows averaged for SW
    double waist_band = 0.10;    // bottom fraction averaged for WW
};

/// Measure CL/SL/SW/WW in pixels:
///   CL: extent of the body run in the column through the body centroid,
///   SW: mean row extent over the top `shoulder_band` of body rows,
///   WW: mean row extent over the bottom `waist_band` of body rows,
///   SL: extent of sleeve pixels projected on the sleeve's principal axis,
///       reported as the max of left/right when both are present.
RawMeasurement measure(const GarmentRegions& regions, const MeasureParams& params = {});

CmMeasurement to_cm(const RawMeasurement& raw, const PixelScale& scale);

} // namespace vtsize
