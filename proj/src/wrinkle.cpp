#include "vtsize/wrinkle.hpp"

#include <algorithm>
#include <cmath>

#include "vtsize/components.hpp"
#include "vtsize/skeleton.hpp"

namespace vtsize {

WrinkleZones make_zones(const GarmentRegions& regions, double split_fraction) {
    if (!(split_fraction > 0) || !(split_fraction < 1))
        throw InvalidInput("make_zones: split fraction must be in (0,1)");
    const BinaryMask& body = regions.body;
    WrinkleZones zones{BinaryMask(body.width, body.height), BinaryMask(body.width, body.height),
                       mask_or(regions.left_sleeve, regions.right_sleeve)};

    int top = body.height, bottom = -1;
    for (int y = 0; y < body.height; ++y)
        for (int x = 0; x < body.width; ++x)
            if (body.at(x, y)) {
                top = std::min(top, y);
                bottom = std::max(bottom, y);
            }
    if (bottom < 0) return zones; // empty body: A and B stay empty

    const int split_row = top + static_cast<int>(std::lround(split_fraction * (bottom - top)));
    for (int y = top; y <= bottom; ++y)
        for (int x = 0; x < body.width; ++x)
            if (body.at(x, y)) (y <= split_row ? zones.region_a : zones.region_b).at(x, y) = 1;
    return zones;
}

GrayImage wrinkle_response(const GrayImage& img, const BinaryMask& zone, double fusion_weight,
                           const WrinkleResponseParams& params) {
    require_same_size(img.width, img.height, zone.width, zone.height, "wrinkle_response");
    if (fusion_weight < 0 || fusion_weight > 1)
        throw InvalidInput("wrinkle_response: fusion weight must be in [0,1]");

    GrayImage out(img.width, img.height);
    if (zone.count() == 0) return out;

    // Work on the zone's bounding box plus a margin wide enough that every
    // in-zone pixel sees its full filter neighborhood; results are identical
    // to a full-image pass because everything outside the zone is a constant.
    double sigma_max = 0;
    for (double s : params.frangi.scales) sigma_max = std::max(sigma_max, s);
    const int margin = static_cast<int>(std::ceil(3.0 * std::max(sigma_max, params.gabor.sigma))) +
                       params.se.radius + 2;

    int min_x = img.width, min_y = img.height, max_x = -1, max_y = -1;
    double mean = 0;
    float lo = 1.0f, hi = 0.0f;
    long long n = 0;
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            if (zone.at(x, y)) {
                min_x = std::min(min_x, x);
                max_x = std::max(max_x, x);
                min_y = std::min(min_y, y);
                max_y = std::max(max_y, y);
                const float v = img.at(x, y);
                lo = std::min(lo, v);
                hi = std::max(hi, v);
                mean += v;
                ++n;
            }
    mean /= static_cast<double>(n);
    // A flat zone embeds into a constant image, whose response is identically
    // zero through both branches; skip the filter work.
    if (hi - lo < 1e-6f) return out;

    const int x0 = std::max(0, min_x - margin), y0 = std::max(0, min_y - margin);
    const int x1 = std::min(img.width - 1, max_x + margin), y1 = std::min(img.height - 1, max_y + margin);
    GrayImage crop(x1 - x0 + 1, y1 - y0 + 1, static_cast<float>(mean));
    for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x)
            if (zone.at(x, y)) crop.at(x - x0, y - y0) = img.at(x, y);

    GrayImage fused(crop.width, crop.height);
    if (fusion_weight > 0) {
        const GrayImage fr = frangi(gray_close(crop, params.se), params.frangi);
        for (size_t i = 0; i < fused.data.size(); ++i)
            fused.data[i] += static_cast<float>(fusion_weight) * fr.data[i];
    }
    if (fusion_weight < 1) {
        const GrayImage gb = gabor_bank(gray_open(crop, params.se), params.gabor);
        for (size_t i = 0; i < fused.data.size(); ++i)
            fused.data[i] += static_cast<float>(1.0 - fusion_weight) * gb.data[i];
    }

    for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x)
            if (zone.at(x, y)) out.at(x, y) = fused.at(x - x0, y - y0);
    return out;
}

const char* dimension_name(Dimension d) {
    switch (d) {
        case Dimension::CL: return "CL";
        case Dimension::SL: return "SL";
        case Dimension::SW: return "SW";
        case Dimension::WW: return "WW";
    }
    return "?";
}

double WrinkleReport::length(Dimension d) const {
    switch (d) {
        case Dimension::CL: return length_cl;
        case Dimension::SL: return length_sl;
        case Dimension::SW: return length_sw;
        case Dimension::WW: return length_ww;
    }
    return 0;
}

double WrinkleReport::ratio(Dimension d) const {
    switch (d) {
        case Dimension::CL: return ratio_cl;
        case Dimension::SL: return ratio_sl;
        case Dimension::SW: return ratio_sw;
        case Dimension::WW: return ratio_ww;
    }
    return 0;
}

WrinkleReport classify_wrinkles(const GrayImage& response, const WrinkleZones& zones,
                                double thresholdValue) {
    if (!(thresholdValue > 0) || !(thresholdValue < 1))
        throw InvalidInput("classify_wrinkles: threshold must be in (0,1)");

    const BinaryMask binarized = threshold(response, static_cast<float>(thresholdValue));
    const BinaryMask skeleton = skeletonize(binarized);

    WrinkleReport report;
    for (const auto& comp : connected_components(binarized, 8)) {
        long long in_a = 0, in_b = 0, in_c = 0;
        for (auto p : comp.pixels) {
            const size_t i = static_cast<size_t>(p);
            in_a += zones.region_a.data[i] != 0;
            in_b += zones.region_b.data[i] != 0;
            in_c += zones.region_c.data[i] != 0;
        }

        WrinkleComponent wc;
        wc.orientation_deg = comp.orientation_deg;
        if (in_a == 0 && in_b == 0 && in_c == 0) {
            ++report.dropped;
            report.inventory.push_back(wc);
            continue;
        }
        wc.zone = (in_a >= in_b && in_a >= in_c) ? 'A' : (in_b >= in_c ? 'B' : 'C');

        // Skeleton length of this component only.
        BinaryMask piece(comp.max_x - comp.min_x + 1, comp.max_y - comp.min_y + 1);
        for (auto p : comp.pixels) {
            if (!skeleton.data[static_cast<size_t>(p)]) continue;
            const int x = static_cast<int>(p % response.width) - comp.min_x;
            const int y = static_cast<int>(p / response.width) - comp.min_y;
            piece.at(x, y) = 1;
        }
        wc.length = skeleton_length(piece);

        const bool flat = wc.orientation_deg < 45.0; // 45 goes to the steep class
        if (flat && (wc.zone == 'A' || wc.zone == 'B')) {
            wc.dimension = Dimension::CL;
            report.length_cl += wc.length;
            wc.assigned = true;
        } else if (!flat && wc.zone == 'A') {
            wc.dimension = Dimension::SW;
            report.length_sw += wc.length;
            wc.assigned = true;
        } else if (!flat && wc.zone == 'B') {
            wc.dimension = Dimension::WW;
            report.length_ww += wc.length;
            wc.assigned = true;
        } else if (flat && wc.zone == 'C') {
            wc.dimension = Dimension::SL;
            report.length_sl += wc.length;
            wc.assigned = true;
        }
        // Steep wrinkles on sleeves match no rule; keep them in the inventory.
        report.inventory.push_back(wc);
    }
    return report;
}

void CompensationThresholds::validate() const {
    if (!(a < b && b < c && c < d) || !(a >= 0))
        throw InvalidInput("CompensationThresholds: need 0 <= a < b < c < d");
}

double compensation_ratio(double length, const CompensationThresholds& t) {
    t.validate();
    if (length < 0) throw InvalidInput("compensation_ratio: negative wrinkle length");
    if (length < t.a) return 0.0;
    if (length < t.b) return (length - t.a) / 250.0 / 100.0;
    if (length < t.c) return ((t.b - t.a) / 250.0 + (length - t.b) / 200.0) / 100.0;
    if (length < t.d)
        return ((t.b - t.a) / 250.0 + (t.c - t.b) / 200.0 + (length - t.c) / 250.0) / 100.0;
    return 1.0;
}

double compensated_length(double measured, double wrinkle_length, const CompensationThresholds& t) {
    if (measured < 0) throw InvalidInput("compensated_length: negative measurement");
    return measured * (1.0 + compensation_ratio(wrinkle_length, t));
}

double compensated_length_literal(double wrinkle_length, const CompensationThresholds& t) {
    return wrinkle_length + wrinkle_length * compensation_ratio(wrinkle_length, t);
}

void apply_compensation(WrinkleReport& report, const CompensationThresholds& t) {
    report.ratio_cl = compensation_ratio(report.length_cl, t);
    report.ratio_sl = compensation_ratio(report.length_sl, t);
    report.ratio_sw = compensation_ratio(report.length_sw, t);
    report.ratio_ww = compensation_ratio(report.length_ww, t);
}

} // namespace vtsize
