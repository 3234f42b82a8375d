#include "vtsize/measure.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "vtsize/components.hpp"

namespace vtsize {

std::vector<int> LabelSchema::indices_of(const std::string& name) const {
    std::vector<int> out;
    for (const auto& [idx, n] : names)
        if (n == name) out.push_back(idx);
    return out;
}

bool LabelSchema::has(const std::string& name) const { return !indices_of(name).empty(); }

LabelSchema LabelSchema::parse(const std::string& text) {
    LabelSchema schema;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        int idx;
        std::string name;
        if (!(ls >> idx)) continue; // blank or comment-only line
        if (!(ls >> name))
            throw ConfigError("label schema: line " + std::to_string(lineno) + ": index without a name");
        if (idx < 0 || idx > 255)
            throw ConfigError("label schema: line " + std::to_string(lineno) + ": index out of range");
        schema.names[idx] = name;
    }
    return schema;
}

LabelSchema LabelSchema::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("label schema: cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

PixelScale PixelScale::explicit_scale(double cm_per_pixel) {
    if (!(cm_per_pixel > 0) || !std::isfinite(cm_per_pixel))
        throw InvalidInput("PixelScale: cm_per_pixel must be positive and finite");
    return {cm_per_pixel, Source::Explicit};
}

PixelScale PixelScale::from_person_height(double person_cm, double person_pixels) {
    if (!(person_cm > 0) || !(person_pixels > 0))
        throw InvalidInput("PixelScale: person height must be positive in both cm and pixels");
    return {person_cm / person_pixels, Source::PersonHeight};
}

BinaryMask extract_garment(const RgbImage& generated, const BinaryMask& refined_mask,
                           const ExtractParams& params) {
    require_same_size(generated.width, generated.height, refined_mask.width, refined_mask.height,
                      "extract_garment");

    std::function<bool(float, float, float)> is_background = params.background_predicate;
    if (!is_background) {
        // Median color outside the mask approximates the backdrop.
        std::vector<float> rs, gs, bs;
        for (int y = 0; y < generated.height; ++y)
            for (int x = 0; x < generated.width; ++x)
                if (!refined_mask.at(x, y)) {
                    rs.push_back(generated.at(x, y, 0));
                    gs.push_back(generated.at(x, y, 1));
                    bs.push_back(generated.at(x, y, 2));
                }
        if (rs.empty()) {
            is_background = [](float, float, float) { return false; };
        } else {
            auto median = [](std::vector<float>& v) {
                std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
                return v[v.size() / 2];
            };
            const float mr = median(rs), mg = median(gs), mb = median(bs);
            const double tol2 = params.background_tolerance * params.background_tolerance;
            is_background = [mr, mg, mb, tol2](float r, float g, float b) {
                const double dr = r - mr, dg = g - mg, db = b - mb;
                return dr * dr + dg * dg + db * db <= tol2;
            };
        }
    }

    BinaryMask out(refined_mask.width, refined_mask.height);
    for (int y = 0; y < generated.height; ++y)
        for (int x = 0; x < generated.width; ++x)
            if (refined_mask.at(x, y) &&
                !is_background(generated.at(x, y, 0), generated.at(x, y, 1), generated.at(x, y, 2)))
                out.at(x, y) = 1;
    return out;
}

GarmentRegions split_regions(const BinaryMask& garment, const LabelMap& parse,
                             const LabelSchema& schema) {
    require_same_size(garment.width, garment.height, parse.width, parse.height, "split_regions");
    for (const char* role : {"torso", "left_arm", "right_arm"})
        if (!schema.has(role))
            throw ConfigError(std::string("split_regions: label schema lacks a '") + role + "' entry");

    std::array<std::uint8_t, 256> role_of{}; // 0 none, 1 torso, 2 left arm, 3 right arm
    for (int i : schema.indices_of("torso")) role_of[static_cast<size_t>(i)] = 1;
    for (int i : schema.indices_of("left_arm")) role_of[static_cast<size_t>(i)] = 2;
    for (int i : schema.indices_of("right_arm")) role_of[static_cast<size_t>(i)] = 3;

    GarmentRegions regions{BinaryMask(garment.width, garment.height),
                           BinaryMask(garment.width, garment.height),
                           BinaryMask(garment.width, garment.height)};
    for (size_t i = 0; i < garment.data.size(); ++i) {
        if (!garment.data[i]) continue;
        switch (role_of[parse.labels[i]]) {
            case 1: regions.body.data[i] = 1; break;
            case 2: regions.left_sleeve.data[i] = 1; break;
            case 3: regions.right_sleeve.data[i] = 1; break;
            default: break;
        }
    }
    return regions;
}

namespace {

struct RowExtent {
    int y;
    int width; // inclusive extent max_x - min_x + 1
};

std::vector<RowExtent> row_extents(const BinaryMask& m) {
    std::vector<RowExtent> rows;
    for (int y = 0; y < m.height; ++y) {
        int lo = -1, hi = -1;
        for (int x = 0; x < m.width; ++x)
            if (m.at(x, y)) {
                if (lo < 0) lo = x;
                hi = x;
            }
        if (lo >= 0) rows.push_back({y, hi - lo + 1});
    }
    return rows;
}

double band_mean_width(const std::vector<RowExtent>& rows, double fraction, bool from_top) {
    const size_t n = rows.size();
    const size_t k = std::max<size_t>(1, static_cast<size_t>(std::lround(fraction * n)));
    double sum = 0;
    for (size_t i = 0; i < k; ++i) sum += rows[from_top ? i : n - 1 - i].width;
    return sum / static_cast<double>(k);
}

// Vertical extent of the connected run of body pixels in the column through
// the centroid. Falls back to the global row extent when that column is empty.
double body_length(const BinaryMask& body, const std::vector<RowExtent>& rows) {
    double sx = 0, sy = 0;
    long long n = 0;
    for (int y = 0; y < body.height; ++y)
        for (int x = 0; x < body.width; ++x)
            if (body.at(x, y)) {
                sx += x;
                sy += y;
                ++n;
            }
    const int cx = static_cast<int>(std::lround(sx / n));
    const int cy = static_cast<int>(std::lround(sy / n));

    if (cx >= 0 && cx < body.width) {
        // Find the run containing (or nearest to) the centroid row.
        int best_top = -1, best_bot = -1, best_dist = body.height + 1;
        int y = 0;
        while (y < body.height) {
            if (!body.at(cx, y)) {
                ++y;
                continue;
            }
            const int top = y;
            while (y < body.height && body.at(cx, y)) ++y;
            const int bot = y - 1;
            const int dist = cy < top ? top - cy : (cy > bot ? cy - bot : 0);
            if (dist < best_dist) {
                best_dist = dist;
                best_top = top;
                best_bot = bot;
            }
        }
        if (best_top >= 0) return best_bot - best_top + 1;
    }
    return rows.back().y - rows.front().y + 1;
}

// Extent of the region's pixels projected on its principal axis.
std::optional<double> sleeve_length(const BinaryMask& sleeve) {
    const auto comps = connected_components(sleeve, 8);
    if (comps.empty()) return std::nullopt;
    // Use the largest component; specks from parsing noise would skew the axis.
    const Component* largest = &comps[0];
    for (const auto& c : comps)
        if (c.area > largest->area) largest = &c;
    const Component& comp = *largest;
    if (comp.area < 2) return std::nullopt;

    double mu20 = 0, mu02 = 0, mu11 = 0;
    for (auto p : comp.pixels) {
        const double x = static_cast<double>(p % sleeve.width) - comp.centroid_x;
        const double y = static_cast<double>(p / sleeve.width) - comp.centroid_y;
        mu20 += x * x;
        mu02 += y * y;
        mu11 += x * y;
    }
    const double theta = 0.5 * std::atan2(2.0 * mu11, mu20 - mu02);
    const double ax = std::cos(theta), ay = std::sin(theta);
    double lo = 0, hi = 0;
    bool first = true;
    for (auto p : comp.pixels) {
        const double x = static_cast<double>(p % sleeve.width);
        const double y = static_cast<double>(p / sleeve.width);
        const double proj = x * ax + y * ay;
        if (first) {
            lo = hi = proj;
            first = false;
        } else {
            lo = std::min(lo, proj);
            hi = std::max(hi, proj);
        }
    }
    return hi - lo;
}

} // namespace

RawMeasurement measure(const GarmentRegions& regions, const MeasureParams& params) {
    const auto rows = row_extents(regions.body);
    if (rows.empty()) throw MeasurementError("measure: body region is empty");

    RawMeasurement m;
    m.cl = body_length(regions.body, rows);
    m.cl_valid = true;
    m.sw = band_mean_width(rows, params.shoulder_band, /*from_top=*/true);
    m.sw_valid = true;
    m.ww = band_mean_width(rows, params.waist_band, /*from_top=*/false);
    m.ww_valid = true;

    const auto left = sleeve_length(regions.left_sleeve);
    const auto right = sleeve_length(regions.right_sleeve);
    if (left || right) {
        m.sl = std::max(left.value_or(0.0), right.value_or(0.0));
        m.sl_valid = true;
    }
    return m;
}

CmMeasurement to_cm(const RawMeasurement& raw, const PixelScale& scale) {
    if (!(scale.cm_per_pixel > 0) || !std::isfinite(scale.cm_per_pixel))
        throw InvalidInput("to_cm: invalid scale");
    CmMeasurement out;
    out.cl = raw.cl * scale.cm_per_pixel;
    out.sl = raw.sl * scale.cm_per_pixel;
    out.sw = raw.sw * scale.cm_per_pixel;
    out.ww = raw.ww * scale.cm_per_pixel;
    out.cl_valid = raw.cl_valid;
    out.sl_valid = raw.sl_valid;
    out.sw_valid = raw.sw_valid;
    out.ww_valid = raw.ww_valid;
    return out;
}

} // namespace vtsize
