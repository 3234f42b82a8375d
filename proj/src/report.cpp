#include "vtsize/report.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace vtsize {

namespace {

constexpr std::array<Dimension, 4> kDims{Dimension::CL, Dimension::SL, Dimension::SW, Dimension::WW};
constexpr std::array<const char*, 2> kPairNames{"A1-A2", "A2-A3"};
constexpr std::array<const char*, 4> kMetricNames{"mae", "rmse", "mape", "smape"};

nlohmann::json measurement_json(const RawMeasurement& m) {
    return {{"cl", m.cl},       {"sl", m.sl},       {"sw", m.sw},       {"ww", m.ww},
            {"cl_valid", m.cl_valid}, {"sl_valid", m.sl_valid}, {"sw_valid", m.sw_valid},
            {"ww_valid", m.ww_valid}};
}

RawMeasurement measurement_from(const nlohmann::json& j) {
    RawMeasurement m;
    m.cl = j.at("cl");
    m.sl = j.at("sl");
    m.sw = j.at("sw");
    m.ww = j.at("ww");
    m.cl_valid = j.at("cl_valid");
    m.sl_valid = j.at("sl_valid");
    m.sw_valid = j.at("sw_valid");
    m.ww_valid = j.at("ww_valid");
    return m;
}

nlohmann::json cm_json(const CmMeasurement& m) {
    return {{"cl", m.cl},       {"sl", m.sl},       {"sw", m.sw},       {"ww", m.ww},
            {"cl_valid", m.cl_valid}, {"sl_valid", m.sl_valid}, {"sw_valid", m.sw_valid},
            {"ww_valid", m.ww_valid}};
}

CmMeasurement cm_from(const nlohmann::json& j) {
    CmMeasurement m;
    m.cl = j.at("cl");
    m.sl = j.at("sl");
    m.sw = j.at("sw");
    m.ww = j.at("ww");
    m.cl_valid = j.at("cl_valid");
    m.sl_valid = j.at("sl_valid");
    m.sw_valid = j.at("sw_valid");
    m.ww_valid = j.at("ww_valid");
    return m;
}

nlohmann::json wrinkles_json(const WrinkleReport& w) {
    nlohmann::json inventory = nlohmann::json::array();
    for (const auto& c : w.inventory)
        inventory.push_back({{"orientation_deg", c.orientation_deg},
                             {"zone", std::string(1, c.zone)},
                             {"length", c.length},
                             {"assigned", c.assigned},
                             {"dimension", c.assigned ? dimension_name(c.dimension) : "-"}});
    return {{"length", {{"CL", w.length_cl}, {"SL", w.length_sl}, {"SW", w.length_sw}, {"WW", w.length_ww}}},
            {"ratio", {{"CL", w.ratio_cl}, {"SL", w.ratio_sl}, {"SW", w.ratio_sw}, {"WW", w.ratio_ww}}},
            {"dropped", w.dropped},
            {"components", inventory}};
}

WrinkleReport wrinkles_from(const nlohmann::json& j) {
    WrinkleReport w;
    w.length_cl = j.at("length").at("CL");
    w.length_sl = j.at("length").at("SL");
    w.length_sw = j.at("length").at("SW");
    w.length_ww = j.at("length").at("WW");
    w.ratio_cl = j.at("ratio").at("CL");
    w.ratio_sl = j.at("ratio").at("SL");
    w.ratio_sw = j.at("ratio").at("SW");
    w.ratio_ww = j.at("ratio").at("WW");
    w.dropped = j.at("dropped");
    for (const auto& c : j.at("components")) {
        WrinkleComponent wc;
        wc.orientation_deg = c.at("orientation_deg");
        wc.zone = c.at("zone").get<std::string>()[0];
        wc.length = c.at("length");
        wc.assigned = c.at("assigned");
        if (wc.assigned) {
            const std::string d = c.at("dimension");
            for (auto dim : kDims)
                if (d == dimension_name(dim)) wc.dimension = dim;
        }
        w.inventory.push_back(wc);
    }
    return w;
}

} // namespace

nlohmann::json RunReport::to_json() const {
    nlohmann::json j;
    j["schema_version"] = schema_version;
    j["tool"] = {{"name", kToolName}, {"version", tool_version}};
    j["config"] = config_echo;

    nlohmann::json recs = nlohmann::json::array();
    for (const auto& r : records) {
        nlohmann::json rj;
        rj["id"] = r.id;
        rj["ok"] = r.ok;
        if (!r.error.empty()) rj["error"] = r.error;
        rj["notes"] = r.notes;
        rj["cm_per_pixel"] = r.cm_per_pixel;
        nlohmann::json sizes = nlohmann::json::array();
        for (const auto& s : r.sizes) {
            nlohmann::json sj;
            sj["present"] = s.present;
            if (s.present) {
                sj["generated"] = s.generated_path;
                sj["mask"] = s.mask_path;
                sj["raw_px"] = measurement_json(s.raw);
                sj["wrinkles"] = wrinkles_json(s.wrinkles);
                sj["compensated_cm"] = cm_json(s.compensated);
            }
            sizes.push_back(sj);
        }
        rj["sizes"] = sizes;
        nlohmann::json pairs = nlohmann::json::array();
        for (const auto& p : r.pairs) {
            nlohmann::json pj;
            pj["levels"] = {p.level_i, p.level_j};
            for (size_t d = 0; d < 4; ++d) {
                pj[dimension_name(kDims[d])] = {{"value", p.value[d]}, {"valid", p.valid[d]}};
            }
            pairs.push_back(pj);
        }
        rj["increments_cm"] = pairs;
        recs.push_back(rj);
    }
    j["records"] = recs;

    nlohmann::json aggs;
    for (size_t pair = 0; pair < 2; ++pair) {
        nlohmann::json pj;
        for (size_t d = 0; d < 4; ++d) {
            const auto& a = aggregates[pair][d];
            pj[dimension_name(kDims[d])] = {{"mae_cm", a.metrics.mae},
                                            {"rmse_cm", a.metrics.rmse},
                                            {"mape_pct", a.metrics.mape},
                                            {"smape_pct", a.metrics.smape},
                                            {"count", a.count}};
        }
        aggs[kPairNames[pair]] = pj;
    }
    j["aggregates"] = aggs;

    nlohmann::json wj;
    for (size_t pair = 0; pair < 2; ++pair) {
        nlohmann::json pj;
        nlohmann::json weights;
        for (size_t d = 0; d < 4; ++d) weights[dimension_name(kDims[d])] = weighted[pair].weights[d];
        pj["weights"] = weights;
        pj["X_t"] = weighted[pair].x_t;
        pj["E_t"] = weighted[pair].e_t;
        wj[kPairNames[pair]] = pj;
    }
    j["weighted"] = wj;
    return j;
}

RunReport RunReport::from_json(const nlohmann::json& j) {
    RunReport r;
    r.schema_version = j.at("schema_version");
    r.tool_version = j.at("tool").at("version");
    r.config_echo = j.value("config", nlohmann::json::object());

    for (const auto& rj : j.at("records")) {
        RecordReport rec;
        rec.id = rj.at("id");
        rec.ok = rj.at("ok");
        rec.error = rj.value("error", "");
        rec.notes = rj.value("notes", std::vector<std::string>{});
        rec.cm_per_pixel = rj.value("cm_per_pixel", 0.0);
        size_t i = 0;
        for (const auto& sj : rj.at("sizes")) {
            if (i >= rec.sizes.size()) break;
            SizeEntry& s = rec.sizes[i++];
            s.present = sj.at("present");
            if (s.present) {
                s.generated_path = sj.value("generated", "");
                s.mask_path = sj.value("mask", "");
                s.raw = measurement_from(sj.at("raw_px"));
                s.wrinkles = wrinkles_from(sj.at("wrinkles"));
                s.compensated = cm_from(sj.at("compensated_cm"));
            }
        }
        i = 0;
        for (const auto& pj : rj.at("increments_cm")) {
            if (i >= rec.pairs.size()) break;
            PairIncrements& p = rec.pairs[i++];
            p.level_i = pj.at("levels")[0];
            p.level_j = pj.at("levels")[1];
            for (size_t d = 0; d < 4; ++d) {
                p.value[d] = pj.at(dimension_name(kDims[d])).at("value");
                p.valid[d] = pj.at(dimension_name(kDims[d])).at("valid");
            }
        }
        r.records.push_back(std::move(rec));
    }

    for (size_t pair = 0; pair < 2; ++pair) {
        const auto& pj = j.at("aggregates").at(kPairNames[pair]);
        for (size_t d = 0; d < 4; ++d) {
            const auto& a = pj.at(dimension_name(kDims[d]));
            r.aggregates[pair][d].metrics = {a.at("mae_cm"), a.at("rmse_cm"), a.at("mape_pct"),
                                             a.at("smape_pct")};
            r.aggregates[pair][d].count = a.at("count");
        }
        const auto& wj = j.at("weighted").at(kPairNames[pair]);
        for (size_t d = 0; d < 4; ++d)
            r.weighted[pair].weights[d] = wj.at("weights").at(dimension_name(kDims[d]));
        r.weighted[pair].x_t = wj.at("X_t").get<std::map<std::string, double>>();
        r.weighted[pair].e_t = wj.at("E_t").get<std::map<std::string, double>>();
    }
    return r;
}

void RunReport::save(const std::string& path) const {
    namespace fs = std::filesystem;
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw ConfigError("report: cannot write " + tmp);
        out << to_json().dump(2) << "\n";
        if (!out) throw ConfigError("report: write failed for " + tmp);
    }
    fs::rename(tmp, path);
}

RunReport RunReport::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("report: cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        // e.byte carries the offset of the failure
        throw ConfigError("report " + path + ": parse error at byte " + std::to_string(e.byte) + ": " +
                          e.what());
    }
    try {
        return from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("report " + path + ": " + e.what());
    }
}

std::string aggregates_csv(const RunReport& report) {
    std::ostringstream out;
    out << "pair,dimension,mae_cm,rmse_cm,mape_pct,smape_pct,count\n";
    char buf[64];
    for (size_t pair = 0; pair < 2; ++pair) {
        for (size_t d = 0; d < 4; ++d) {
            const auto& a = report.aggregates[pair][d];
            out << kPairNames[pair] << ',' << dimension_name(kDims[d]);
            for (double v : {a.metrics.mae, a.metrics.rmse, a.metrics.mape, a.metrics.smape}) {
                std::snprintf(buf, sizeof buf, "%.9g", v);
                out << ',' << buf;
            }
            out << ',' << a.count << "\n";
        }
    }
    return out.str();
}

PairAggregates parse_aggregates_csv(const std::string& csv) {
    PairAggregates out{};
    std::istringstream in(csv);
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("csv: empty input");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string pair, dim, field;
        std::getline(ls, pair, ',');
        std::getline(ls, dim, ',');
        size_t pi = pair == kPairNames[0] ? 0 : pair == kPairNames[1] ? 1 : 2;
        if (pi > 1) throw ConfigError("csv: unknown pair " + pair);
        size_t di = 4;
        for (size_t d = 0; d < 4; ++d)
            if (dim == dimension_name(kDims[d])) di = d;
        if (di > 3) throw ConfigError("csv: unknown dimension " + dim);
        auto& a = out[pi][di];
        double vals[4];
        for (double& v : vals) {
            std::getline(ls, field, ',');
            v = std::stod(field);
        }
        std::getline(ls, field, ',');
        a.metrics = {vals[0], vals[1], vals[2], vals[3]};
        a.count = std::stoi(field);
    }
    return out;
}

std::string format_table(const RunReport& report) {
    std::ostringstream out;
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-6s %-4s %10s %10s %10s %10s %7s\n", "pair", "dim", "MAE(cm)",
                  "RMSE(cm)", "MAPE(%)", "SMAPE(%)", "count");
    out << buf;
    for (size_t pair = 0; pair < 2; ++pair) {
        for (size_t d = 0; d < 4; ++d) {
            const auto& a = report.aggregates[pair][d];
            std::snprintf(buf, sizeof buf, "%-6s %-4s %10.4f %10.4f %10.3f %10.3f %7d\n",
                          kPairNames[pair], dimension_name(kDims[d]), a.metrics.mae, a.metrics.rmse,
                          a.metrics.mape, a.metrics.smape, a.count);
            out << buf;
        }
    }
    return out.str();
}

} // namespace vtsize
