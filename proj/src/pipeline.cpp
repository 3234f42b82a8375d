#include "vtsize/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <thread>

#include "vtsize/edge_refine.hpp"
#include "vtsize/http_backend.hpp"
#include "vtsize/mask_gen.hpp"
#include "vtsize/png_io.hpp"
#include "vtsize/pose.hpp"

namespace fs = std::filesystem;

namespace vtsize {

namespace {

constexpr std::array<Dimension, 4> kDims{Dimension::CL, Dimension::SL, Dimension::SW, Dimension::WW};

void sort_by_id(std::vector<ManifestRecord>& records) {
    std::stable_sort(records.begin(), records.end(),
                     [](const ManifestRecord& a, const ManifestRecord& b) { return a.id < b.id; });
}

// Run fn(i) for i in [0,n) on up to `jobs` workers. Exceptions are captured
// per index by the callee.
void parallel_for(size_t n, int jobs, const std::function<void(size_t)>& fn) {
    const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(n)));
    if (workers == 1) {
        for (size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(workers));
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
        });
    for (auto& t : pool) t.join();
}

std::string size_suffix(int level) { return "_A" + std::to_string(level) + ".png"; }

nlohmann::json tool_stamp() {
    return {{"name", kToolName}, {"version", kToolVersion}};
}

void write_sidecar(const std::string& png_path, const nlohmann::json& body) {
    std::ofstream out(png_path + ".json");
    if (!out) throw ConfigError("cannot write sidecar for " + png_path);
    out << body.dump(2) << "\n";
}

struct RecordFailure {
    std::string id;
    std::string message;
};

int finish_batch(const std::vector<RecordFailure>& failures, size_t total, bool strict,
                 const char* what) {
    for (const auto& f : failures)
        std::cerr << what << ": record " << f.id << " failed: " << f.message << "\n";
    if (!failures.empty() && (strict || failures.size() == total)) return 1;
    return 0;
}

PixelScale resolve_scale(const ManifestRecord& record, const RunConfig& config,
                         const LabelMap* parse, const LabelSchema* schema) {
    if (config.cm_per_pixel) return PixelScale::explicit_scale(*config.cm_per_pixel);
    if (record.cm_per_pixel) return PixelScale::explicit_scale(*record.cm_per_pixel);
    if (record.person_height_cm) {
        if (!parse || !schema)
            throw MeasurementError("record " + record.id +
                                   ": person-height scale needs a label map");
        // Person pixel height = vertical extent of non-background labels.
        std::array<bool, 256> background{};
        for (int idx : schema->indices_of("background")) background[static_cast<size_t>(idx)] = true;
        int top = parse->height, bottom = -1;
        for (int y = 0; y < parse->height; ++y)
            for (int x = 0; x < parse->width; ++x)
                if (!background[parse->at(x, y)]) {
                    top = std::min(top, y);
                    bottom = std::max(bottom, y);
                }
        if (bottom < top) throw MeasurementError("record " + record.id + ": empty person region");
        return PixelScale::from_person_height(*record.person_height_cm, bottom - top + 1);
    }
    throw MeasurementError("record " + record.id +
                           ": no scale available (need cm_per_pixel or person_height_cm)");
}

} // namespace

int cmd_gen_masks(const RunConfig& config) {
    config.validate();
    fs::create_directories(config.out_dir);
    auto records = load_manifest(config.manifest_path);
    sort_by_id(records);

    CoarseMaskParams mask_params;
    mask_params.se = config.se();
    mask_params.iterations_per_level = config.iterations_per_level;
    mask_params.extension_factor = config.extension_factor;

    std::vector<RecordFailure> failures;
    std::mutex mu;
    parallel_for(records.size(), config.jobs, [&](size_t i) {
        ManifestRecord& record = records[i];
        try {
            if (record.mask.empty()) throw ConfigError("manifest record has no mask path");
            if (record.keypoints.empty()) throw ConfigError("manifest record has no keypoints path");
            const BinaryMask tight = read_mask_png(record.mask);
            PoseKeypoints kp = load_keypoints(record.keypoints);
            kp.min_confidence = config.keypoint_min_confidence;

            const bool only_tight =
                std::all_of(config.sizes.begin(), config.sizes.end(), [](int s) { return s == 1; });
            std::array<BinaryMask, 3> ladder;
            if (!only_tight) ladder = multi_size_masks(tight, kp, mask_params);

            BinaryMask previous; // refined mask of the previous emitted level
            for (int level = 1; level <= 3; ++level) {
                if (std::find(config.sizes.begin(), config.sizes.end(), level) == config.sizes.end())
                    continue;
                const std::string out_path =
                    (fs::path(config.out_dir) / (record.id + "_mask" + size_suffix(level))).string();

                if (level == 1) {
                    // The tight size is the source mask verbatim.
                    fs::copy_file(record.mask, out_path, fs::copy_options::overwrite_existing);
                    previous = tight;
                } else {
                    BinaryMask refined = ladder[static_cast<size_t>(level - 1)];
                    if (config.refine_mode == "classical") {
                        refined = refine_mask_classical(refined, config.edge_band);
                    } else if (config.refine_mode == "external") {
                        HttpRefinementBackend backend(config.refine_backend_url, config.backend_timeout_s);
                        RefineOptions opts{config.edge_band, config.refine_fallback};
                        auto outcome = refine_mask_external(refined, backend, opts);
                        refined = std::move(outcome.mask);
                        if (outcome.used_fallback)
                            std::cerr << "gen-masks: record " << record.id << ": " << outcome.warning
                                      << "\n";
                    }
                    // Keep the emitted ladder nested even after edge smoothing.
                    if (!previous.empty()) refined = mask_or(refined, previous);
                    write_mask_png(refined, out_path);
                    previous = refined;
                }

                write_sidecar(out_path, {{"record", record.id},
                                         {"size", "A" + std::to_string(level)},
                                         {"source_mask", record.mask},
                                         {"keypoints", record.keypoints},
                                         {"refine_mode", level == 1 ? "none" : config.refine_mode},
                                         {"edge_band", config.edge_band},
                                         {"se_shape", config.se_shape},
                                         {"se_radius", config.se_radius},
                                         {"iterations_per_level", config.iterations_per_level},
                                         {"extension_factor", config.extension_factor},
                                         {"tool", tool_stamp()}});
                record.refined_masks[level] = out_path;
            }
        } catch (const std::exception& e) {
            std::lock_guard<std::mutex> lock(mu);
            failures.push_back({record.id, e.what()});
        }
    });

    save_manifest(records, (fs::path(config.out_dir) / "manifest.jsonl").string());
    return finish_batch(failures, records.size(), config.strict, "gen-masks");
}

int cmd_adjust_garment(const RunConfig& config) {
    config.validate();
    fs::create_directories(config.out_dir);
    auto records = load_manifest(config.manifest_path);
    sort_by_id(records);

    std::vector<RecordFailure> failures;
    std::mutex mu;
    parallel_for(records.size(), config.jobs, [&](size_t i) {
        const ManifestRecord& record = records[i];
        try {
            if (record.garment.empty()) throw ConfigError("manifest record has no garment path");
            for (int level : config.sizes) {
                const std::string out_path =
                    (fs::path(config.out_dir) / (record.id + "_garment" + size_suffix(level))).string();
                if (level == 1) {
                    fs::copy_file(record.garment, out_path, fs::copy_options::overwrite_existing);
                } else {
                    const RgbImage garment = read_rgb_png(record.garment);
                    write_rgb_png(adjust_garment(garment, SizeLevel(level)), out_path);
                }
            }
        } catch (const std::exception& e) {
            std::lock_guard<std::mutex> lock(mu);
            failures.push_back({record.id, e.what()});
        }
    });
    return finish_batch(failures, records.size(), config.strict, "adjust-garment");
}

int cmd_tryon(const RunConfig& config) {
    config.validate();
    if (config.tryon_backend_url.empty()) {
        std::cerr << "tryon: no backend url configured\n";
        return 2;
    }
    fs::create_directories(config.out_dir);
    auto records = load_manifest(config.manifest_path);
    sort_by_id(records);

    TryOnClient client(config.tryon_backend_url, config.backend_timeout_s, config.tryon_attempts,
                       config.tryon_backoff_s);

    std::vector<RecordFailure> failures;
    std::mutex mu;
    parallel_for(records.size(), config.jobs, [&](size_t i) {
        ManifestRecord& record = records[i];
        try {
            if (record.person.empty()) throw ConfigError("manifest record has no person path");
            if (record.garment.empty()) throw ConfigError("manifest record has no garment path");
            const RgbImage person = read_rgb_png(record.person);
            const RgbImage garment = read_rgb_png(record.garment);

            for (int level : config.sizes) {
                const auto mask_it = record.refined_masks.find(level);
                if (mask_it == record.refined_masks.end())
                    throw ConfigError("no refined mask for size A" + std::to_string(level) +
                                      " (run gen-masks first)");
                const BinaryMask mask = read_mask_png(mask_it->second);
                const RgbImage adjusted = adjust_garment(garment, SizeLevel(level));

                TryOnRequest request{&person, &mask, &adjusted, level};
                const TryOnResult result = client.generate(request);

                const std::string out_path =
                    (fs::path(config.out_dir) / (record.id + "_tryon" + size_suffix(level))).string();
                write_rgb_png(result.image, out_path);
                write_sidecar(out_path, {{"record", record.id},
                                         {"size", "A" + std::to_string(level)},
                                         {"backend", client.url()},
                                         {"backend_id", result.backend_id},
                                         {"latency_s", result.latency_s},
                                         {"attempts", result.attempts},
                                         {"tool", tool_stamp()}});
                record.generated[level] = out_path;
            }
        } catch (const std::exception& e) {
            std::lock_guard<std::mutex> lock(mu);
            failures.push_back({record.id, e.what()});
        }
    });

    save_manifest(records, (fs::path(config.out_dir) / "manifest.jsonl").string());
    return finish_batch(failures, records.size(), config.strict, "tryon");
}

RecordReport evaluate_record(const ManifestRecord& record, const RunConfig& config) {
    RecordReport report;
    report.id = record.id;

    if (record.label_map.empty())
        throw MeasurementError("record " + record.id + ": no label map path");
    const LabelMap parse = read_label_png(record.label_map);
    const LabelSchema schema = LabelSchema::load(config.label_schema_path);
    const PixelScale scale = resolve_scale(record, config, &parse, &schema);
    report.cm_per_pixel = scale.cm_per_pixel;

    ExtractParams extract_params;
    extract_params.background_tolerance = config.background_tolerance;
    MeasureParams measure_params{config.shoulder_band, config.waist_band};
    WrinkleResponseParams response_params;
    response_params.fusion_weight = config.fusion_weight;
    response_params.se = config.se();
    response_params.frangi = config.frangi;
    response_params.gabor = config.gabor;

    SizeTriplet triplet;
    for (int level : config.sizes) {
        const auto gen_it = record.generated.find(level);
        const auto mask_it = record.refined_masks.find(level);
        if (gen_it == record.generated.end() || mask_it == record.refined_masks.end()) {
            report.notes.push_back("size A" + std::to_string(level) +
                                   " missing; excluded from pair metrics");
            continue;
        }
        SizeEntry& entry = report.sizes[static_cast<size_t>(level - 1)];
        entry.generated_path = gen_it->second;
        entry.mask_path = mask_it->second;

        const RgbImage generated = read_rgb_png(gen_it->second);
        const BinaryMask refined = read_mask_png(mask_it->second);
        const BinaryMask garment_support = extract_garment(generated, refined, extract_params);
        const GarmentRegions regions = split_regions(garment_support, parse, schema);
        const RawMeasurement raw = measure(regions, measure_params);
        if (!raw.sl_valid)
            report.notes.push_back("size A" + std::to_string(level) + ": sleeveless, SL excluded");

        const WrinkleZones zones = make_zones(regions, config.zone_split);
        const BinaryMask zone_union = mask_or(mask_or(zones.region_a, zones.region_b), zones.region_c);
        const GrayImage gray = luminance(generated);
        const GrayImage response =
            wrinkle_response(gray, zone_union, config.fusion_weight, response_params);
        WrinkleReport wrinkles = classify_wrinkles(response, zones, config.wrinkle_threshold);
        apply_compensation(wrinkles, config.compensation);

        RawMeasurement compensated_px = raw;
        for (Dimension d : kDims) {
            double* field = d == Dimension::CL   ? &compensated_px.cl
                            : d == Dimension::SL ? &compensated_px.sl
                            : d == Dimension::SW ? &compensated_px.sw
                                                 : &compensated_px.ww;
            const double measured = *field;
            *field = config.literal_compensation
                         ? compensated_length_literal(wrinkles.length(d), config.compensation)
                         : compensated_length(measured, wrinkles.length(d), config.compensation);
        }

        entry.present = true;
        entry.raw = raw;
        entry.wrinkles = std::move(wrinkles);
        entry.compensated = to_cm(compensated_px, scale);

        const size_t li = static_cast<size_t>(level - 1);
        triplet.cl.value[li] = entry.compensated.cl;
        triplet.cl.valid[li] = entry.compensated.cl_valid;
        triplet.sl.value[li] = entry.compensated.sl;
        triplet.sl.valid[li] = entry.compensated.sl_valid;
        triplet.sw.value[li] = entry.compensated.sw;
        triplet.sw.valid[li] = entry.compensated.sw_valid;
        triplet.ww.value[li] = entry.compensated.ww;
        triplet.ww.valid[li] = entry.compensated.ww_valid;
    }

    report.pairs = increments(triplet);
    report.ok = true;
    return report;
}

RunReport evaluate_batch(std::vector<ManifestRecord> records, const RunConfig& config) {
    sort_by_id(records);

    RunReport run;
    run.config_echo = config.to_json();
    run.records.resize(records.size());

    parallel_for(records.size(), config.jobs, [&](size_t i) {
        try {
            run.records[i] = evaluate_record(records[i], config);
        } catch (const std::exception& e) {
            run.records[i] = RecordReport{};
            run.records[i].id = records[i].id;
            run.records[i].ok = false;
            run.records[i].error = e.what();
        }
    });

    // Serial aggregation over id-sorted records keeps reports bit-reproducible.
    for (size_t pair = 0; pair < 2; ++pair) {
        std::array<std::vector<double>, 4> observed;
        for (const auto& rec : run.records) {
            if (!rec.ok) continue;
            for (size_t d = 0; d < 4; ++d)
                if (rec.pairs[pair].valid[d]) observed[d].push_back(rec.pairs[pair].value[d]);
        }
        for (size_t d = 0; d < 4; ++d) {
            auto& agg = run.aggregates[pair][d];
            agg.count = static_cast<int>(observed[d].size());
            if (agg.count > 0)
                agg.metrics = error_metrics(observed[d], config.standards.of(kDims[d]));
        }

        // Weighted scores use the batch-mean measurements at the configured
        // weight level as the dimension sizes of the weighting rule.
        SizeTriplet mean_t;
        const size_t li = static_cast<size_t>(config.weight_level - 1);
        std::array<bool, 4> valid{};
        for (size_t d = 0; d < 4; ++d) {
            double sum = 0;
            int n = 0;
            for (const auto& rec : run.records) {
                if (!rec.ok) continue;
                const auto& entry = rec.sizes[li];
                if (!entry.present) continue;
                const CmMeasurement& m = entry.compensated;
                const double v = d == 0 ? m.cl : d == 1 ? m.sl : d == 2 ? m.sw : m.ww;
                const bool vv = d == 0 ? m.cl_valid : d == 1 ? m.sl_valid : d == 2 ? m.sw_valid : m.ww_valid;
                if (vv) {
                    sum += v;
                    ++n;
                }
            }
            if (n > 0 && run.aggregates[pair][d].count > 0) {
                mean_t.of(kDims[d]).value[li] = sum / n;
                mean_t.of(kDims[d]).valid[li] = true;
                valid[d] = true;
            }
        }

        bool any_valid = false;
        for (bool v : valid) any_valid = any_valid || v;
        if (!any_valid) continue;

        run.weighted[pair].weights = size_weights(mean_t, valid, config.weight_level);
        const std::array<const char*, 4> metric_names{"mae", "rmse", "mape", "smape"};
        for (size_t m = 0; m < 4; ++m) {
            std::array<double, 4> xs{}, es{};
            for (size_t d = 0; d < 4; ++d) {
                if (!valid[d]) continue;
                const auto& mm = run.aggregates[pair][d].metrics;
                const double x = m == 0 ? mm.mae : m == 1 ? mm.rmse : m == 2 ? mm.mape : mm.smape;
                const double cap = m < 2 ? config.standards.of(kDims[d]) : config.percent_score_cap;
                xs[d] = x;
                es[d] = normalized_score(x, cap);
            }
            run.weighted[pair].x_t[metric_names[m]] =
                weighted_score(xs, valid, mean_t, config.weight_level);
            run.weighted[pair].e_t[metric_names[m]] =
                weighted_score(es, valid, mean_t, config.weight_level);
        }
    }
    return run;
}

int cmd_evaluate(const RunConfig& config, const std::string& report_path) {
    config.validate();
    if (config.label_schema_path.empty() || !fs::exists(config.label_schema_path))
        throw ConfigError("evaluate: label schema file not found: '" + config.label_schema_path + "'");
    auto records = load_manifest(config.manifest_path);

    const RunReport report = evaluate_batch(std::move(records), config);
    fs::create_directories(fs::path(report_path).parent_path().empty()
                               ? fs::path(".")
                               : fs::path(report_path).parent_path());
    report.save(report_path);

    const std::string csv_path = report_path + ".csv";
    {
        const std::string tmp = csv_path + ".tmp";
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw ConfigError("evaluate: cannot write " + tmp);
        out << aggregates_csv(report);
        out.close();
        fs::rename(tmp, csv_path);
    }

    size_t failed = 0;
    for (const auto& rec : report.records) {
        if (!rec.ok) {
            ++failed;
            std::cerr << "evaluate: record " << rec.id << " failed: " << rec.error << "\n";
        }
    }
    std::cout << format_table(report);
    if (failed == report.records.size() && failed > 0) return 1;
    if (failed > 0 && config.strict) return 1;
    return 0;
}

int cmd_report(const RunConfig& config, const std::string& report_path, const std::string& csv_path) {
    (void)config;
    const RunReport report = RunReport::load(report_path);
    if (report.records.empty())
        std::cerr << "report: no records in " << report_path << "\n";
    std::cout << format_table(report);
    if (!csv_path.empty()) {
        std::ofstream out(csv_path, std::ios::binary);
        if (!out) throw ConfigError("report: cannot write " + csv_path);
        out << aggregates_csv(report);
    }
    return 0;
}

} // namespace vtsize
