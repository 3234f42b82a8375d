#include <doctest.h>

#include <atomic>
#include <filesystem>
#include <unistd.h>
#include <fstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "compositor.hpp"
#include "testutil.hpp"
#include "vtsize/mask_gen.hpp"
#include "vtsize/pipeline.hpp"
#include "vtsize/png_io.hpp"

using namespace vtsize;
namespace fs = std::filesystem;

namespace {

compositor::SceneSpec mini_spec() {
    compositor::SceneSpec s;
    s.width = 400;
    s.height = 420;
    s.cx = 200;
    s.body_top = 30;
    s.cl = {240, 270, 300};
    s.sw = {140, 160, 180};
    s.ww = {180, 210, 240};
    s.sl = {150, 160, 170};
    s.shoulder_band_rows = 60;
    s.sleeve_left_x = 8;
    s.sleeve_width = 60;
    s.sleeve_top = 40;
    s.cm_per_pixel = 0.1;
    return s;
}

struct Workspace {
    fs::path root;
    Workspace(const std::string& tag) {
        root = fs::temp_directory_path() / ("vtsize_pipe_" + tag + "_" + std::to_string(::getpid()));
        fs::remove_all(root);
        fs::create_directories(root);
    }
    ~Workspace() { fs::remove_all(root); }
    std::string file(const std::string& name) const { return (root / name).string(); }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

// Scene files for an evaluate run; returns the manifest path.
std::string write_eval_scene(const Workspace& ws, const compositor::TripletScene& scene,
                             const std::string& id) {
    write_text(ws.file("schema.txt"), scene.schema_text);
    write_label_png(scene.parse, ws.file(id + "_parse.png"));
    nlohmann::json rec;
    rec["id"] = id;
    rec["label_map"] = ws.file(id + "_parse.png");
    rec["cm_per_pixel"] = scene.spec.cm_per_pixel;
    nlohmann::json masks = nlohmann::json::object(), gens = nlohmann::json::object();
    for (int level = 1; level <= 3; ++level) {
        const auto& size = scene.sizes[static_cast<size_t>(level - 1)];
        const auto mask_path = ws.file(id + "_m" + std::to_string(level) + ".png");
        const auto gen_path = ws.file(id + "_y" + std::to_string(level) + ".png");
        write_mask_png(size.mask, mask_path);
        write_rgb_png(size.image, gen_path);
        masks[std::to_string(level)] = mask_path;
        gens[std::to_string(level)] = gen_path;
    }
    rec["refined_masks"] = masks;
    rec["generated"] = gens;
    const auto manifest_path = ws.file("manifest.jsonl");
    write_text(manifest_path, rec.dump() + "\n");
    return manifest_path;
}

RunConfig eval_config(const Workspace& ws, const std::string& manifest_path) {
    RunConfig config;
    config.manifest_path = manifest_path;
    config.out_dir = ws.file("out");
    config.label_schema_path = ws.file("schema.txt");
    return config;
}

} // namespace

TEST_CASE("gen-masks: three nested files, tight size byte-identical, sidecars") {
    Workspace ws("gen");
    const auto spec = mini_spec();
    const auto shape = compositor::garment_shape(spec, 1);
    write_mask_png(shape, ws.file("mo.png"));
    write_text(ws.file("kp.json"),
               R"({"people":[{"pose_keypoints_2d":[0,0,0, 0,0,0, 0,0,0, 100,150,0.9, 90,160,0.9,)"
               R"(0,0,0, 300,150,0.9, 0,0,0, 0,0,0, 110,280,0.9]}]})");
    write_text(ws.file("manifest.jsonl"),
               nlohmann::json{{"id", "rec1"}, {"mask", ws.file("mo.png")}, {"keypoints", ws.file("kp.json")}}
                       .dump() +
                   "\n");

    RunConfig config;
    config.manifest_path = ws.file("manifest.jsonl");
    config.out_dir = ws.file("out");
    CHECK(cmd_gen_masks(config) == 0);

    const auto m1 = ws.file("out/rec1_mask_A1.png");
    const auto m2 = ws.file("out/rec1_mask_A2.png");
    const auto m3 = ws.file("out/rec1_mask_A3.png");
    REQUIRE(fs::exists(m1));
    REQUIRE(fs::exists(m2));
    REQUIRE(fs::exists(m3));

    CHECK(slurp(m1) == slurp(ws.file("mo.png"))); // byte-identical copy

    auto a1 = read_mask_png(m1), a2 = read_mask_png(m2), a3 = read_mask_png(m3);
    CHECK(a1 == shape);
    CHECK(is_subset(a1, a2));
    CHECK(is_subset(a2, a3));
    CHECK(a2.count() > a1.count());

    // provenance sidecars
    auto sidecar = nlohmann::json::parse(slurp(m2 + ".json"));
    CHECK(sidecar.at("record") == "rec1");
    CHECK(sidecar.at("size") == "A2");
    CHECK(sidecar.at("refine_mode") == "classical");

    // updated manifest points at the new masks
    auto updated = load_manifest(ws.file("out/manifest.jsonl"));
    REQUIRE(updated.size() == 1);
    CHECK(updated[0].refined_masks.at(3) == m3);
}

TEST_CASE("gen-masks: --sizes 1 emits only the tight mask") {
    Workspace ws("gen1");
    const auto spec = mini_spec();
    write_mask_png(compositor::garment_shape(spec, 1), ws.file("mo.png"));
    write_text(ws.file("kp.json"),
               R"({"people":[{"pose_keypoints_2d":[0,0,0, 0,0,0, 0,0,0, 100,150,0.9, 90,160,0.9,)"
               R"(0,0,0, 300,150,0.9, 0,0,0, 0,0,0, 110,280,0.9]}]})");
    write_text(ws.file("manifest.jsonl"),
               nlohmann::json{{"id", "rec1"}, {"mask", ws.file("mo.png")}, {"keypoints", ws.file("kp.json")}}
                       .dump() +
                   "\n");

    RunConfig config;
    config.manifest_path = ws.file("manifest.jsonl");
    config.out_dir = ws.file("out");
    config.sizes = {1};
    CHECK(cmd_gen_masks(config) == 0);
    CHECK(fs::exists(ws.file("out/rec1_mask_A1.png")));
    CHECK_FALSE(fs::exists(ws.file("out/rec1_mask_A2.png")));
    CHECK(slurp(ws.file("out/rec1_mask_A1.png")) == slurp(ws.file("mo.png")));
}

TEST_CASE("gen-masks: a missing keypoint file fails that record and names the path") {
    Workspace ws("genmiss");
    const auto spec = mini_spec();
    write_mask_png(compositor::garment_shape(spec, 1), ws.file("mo.png"));
    write_text(ws.file("manifest.jsonl"),
               nlohmann::json{{"id", "bad"}, {"mask", ws.file("mo.png")}, {"keypoints", ws.file("nope.json")}}
                       .dump() +
                   "\n");
    RunConfig config;
    config.manifest_path = ws.file("manifest.jsonl");
    config.out_dir = ws.file("out");
    CHECK(cmd_gen_masks(config) == 1); // the only record failed
    config.strict = true;
    CHECK(cmd_gen_masks(config) == 1);
}

TEST_CASE("gen-masks: external refinement backend is consulted per size") {
    Workspace ws("genext");
    const auto spec = mini_spec();
    write_mask_png(compositor::garment_shape(spec, 1), ws.file("mo.png"));
    write_text(ws.file("kp.json"),
               R"({"people":[{"pose_keypoints_2d":[0,0,0, 0,0,0, 0,0,0, 100,150,0.9, 90,160,0.9,)"
               R"(0,0,0, 300,150,0.9, 0,0,0, 0,0,0, 110,280,0.9]}]})");
    write_text(ws.file("manifest.jsonl"),
               nlohmann::json{{"id", "e1"}, {"mask", ws.file("mo.png")}, {"keypoints", ws.file("kp.json")}}
                       .dump() +
                   "\n");

    httplib::Server server;
    std::atomic<int> hits{0};
    server.Post("/refine", [&hits](const httplib::Request& req, httplib::Response& res) {
        ++hits; // echo
        res.set_content(req.body, "image/png");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread server_thread([&server] { server.listen_after_bind(); });
    server.wait_until_ready();

    RunConfig config;
    config.manifest_path = ws.file("manifest.jsonl");
    config.out_dir = ws.file("out");
    config.refine_mode = "external";
    config.refine_backend_url = "http://127.0.0.1:" + std::to_string(port) + "/refine";
    CHECK(cmd_gen_masks(config) == 0);
    CHECK(hits == 2); // A2 and A3; the tight size bypasses refinement
    CHECK(fs::exists(ws.file("out/e1_mask_A3.png")));
    auto sidecar = nlohmann::json::parse(slurp(ws.file("out/e1_mask_A2.png.json")));
    CHECK(sidecar.at("refine_mode") == "external");

    server.stop();
    server_thread.join();

    // unreachable backend with fallback enabled still produces masks
    config.refine_backend_url = "http://127.0.0.1:1/refine";
    config.backend_timeout_s = 0.2;
    config.out_dir = ws.file("out_fb");
    CHECK(cmd_gen_masks(config) == 0);
    CHECK(fs::exists(ws.file("out_fb/e1_mask_A3.png")));
}

TEST_CASE("imaging kernels are safe to run from concurrent workers") {
    const auto img = testutil::ridge_image(64, 48, 24.0, 2.0);
    std::mt19937 rng(5);
    const auto mask = testutil::random_mask(rng, 64, 48);
    const auto expect_f = frangi(img);
    const auto expect_d = dilate(mask, StructuringElement::disk(2), 2);

    std::vector<std::thread> pool;
    std::array<bool, 4> same{};
    for (int w = 0; w < 4; ++w)
        pool.emplace_back([&, w] {
            const auto f = frangi(img);
            const auto d = dilate(mask, StructuringElement::disk(2), 2);
            same[static_cast<size_t>(w)] = f.data == expect_f.data && d == expect_d;
        });
    for (auto& t : pool) t.join();
    for (bool ok : same) CHECK(ok);
}

TEST_CASE("adjust-garment: tight copy plus stretched variants") {
    Workspace ws("adjust");
    RgbImage garment(40, 100, 0.8f, 0.2f, 0.2f);
    write_rgb_png(garment, ws.file("c.png"));
    write_text(ws.file("manifest.jsonl"),
               nlohmann::json{{"id", "g"}, {"garment", ws.file("c.png")}}.dump() + "\n");
    RunConfig config;
    config.manifest_path = ws.file("manifest.jsonl");
    config.out_dir = ws.file("out");
    CHECK(cmd_adjust_garment(config) == 0);
    CHECK(slurp(ws.file("out/g_garment_A1.png")) == slurp(ws.file("c.png")));
    auto c2 = read_rgb_png(ws.file("out/g_garment_A2.png"));
    CHECK(c2.height == 120);
    CHECK(c2.width == 40);
}

TEST_CASE("tryon: stub backend stores three images and updates the manifest") {
    Workspace ws("tryon");
    const auto spec = mini_spec();

    httplib::Server server;
    server.Post("/tryon", [](const httplib::Request& req, httplib::Response& res) {
        res.set_header("X-Backend", "stub");
        res.set_content(req.get_file_value("garment").content, "image/png");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread server_thread([&server] { server.listen_after_bind(); });
    server.wait_until_ready();

    write_rgb_png(RgbImage(spec.width, spec.height, 0.9f, 0.9f, 0.9f), ws.file("person.png"));
    write_rgb_png(RgbImage(60, 80, 0.1f, 0.4f, 0.2f), ws.file("garment.png"));
    nlohmann::json rec{{"id", "t1"},
                       {"person", ws.file("person.png")},
                       {"garment", ws.file("garment.png")}};
    nlohmann::json masks = nlohmann::json::object();
    for (int level = 1; level <= 3; ++level) {
        const auto path = ws.file("m" + std::to_string(level) + ".png");
        write_mask_png(compositor::garment_shape(spec, level), path);
        masks[std::to_string(level)] = path;
    }
    rec["refined_masks"] = masks;
    write_text(ws.file("manifest.jsonl"), rec.dump() + "\n");

    RunConfig config;
    config.manifest_path = ws.file("manifest.jsonl");
    config.out_dir = ws.file("out");
    config.tryon_backend_url = "http://127.0.0.1:" + std::to_string(port) + "/tryon";
    config.tryon_backoff_s = 0.01;
    CHECK(cmd_tryon(config) == 0);

    for (int level = 1; level <= 3; ++level) {
        const auto out = ws.file("out/t1_tryon_A" + std::to_string(level) + ".png");
        REQUIRE(fs::exists(out));
        auto img = read_rgb_png(out);
        // the A2/A3 uploads are the 120%-stretched garments
        CHECK(img.height == (level == 1 ? 80 : 96));
        auto sidecar = nlohmann::json::parse(slurp(out + ".json"));
        CHECK(sidecar.at("backend_id") == "stub");
    }
    auto updated = load_manifest(ws.file("out/manifest.jsonl"));
    CHECK(updated[0].generated.size() == 3);

    server.stop();
    server_thread.join();

    // unreachable backend: every record fails, nonzero exit
    config.tryon_backend_url = "http://127.0.0.1:1/tryon";
    config.backend_timeout_s = 0.2;
    CHECK(cmd_tryon(config) == 1);
}

TEST_CASE("evaluate: exact synthetic triplet yields exact standard increments") {
    Workspace ws("eval");
    auto scene = compositor::make_triplet(compositor::WrinkleSet::None, 7500, mini_spec());
    const auto manifest_path = write_eval_scene(ws, scene, "t1");
    auto config = eval_config(ws, manifest_path);

    auto report = evaluate_batch(load_manifest(manifest_path), config);
    REQUIRE(report.records.size() == 1);
    const auto& rec = report.records[0];
    REQUIRE(rec.ok);

    for (int level = 1; level <= 3; ++level) {
        const auto& entry = rec.sizes[static_cast<size_t>(level - 1)];
        REQUIRE(entry.present);
        const auto truth = scene.truth_px(level);
        CHECK(entry.raw.cl == doctest::Approx(truth[0]));
        CHECK(entry.raw.sl == doctest::Approx(truth[1]));
        CHECK(entry.raw.sw == doctest::Approx(truth[2]));
        CHECK(entry.raw.ww == doctest::Approx(truth[3]));
        // no wrinkles: compensation is the identity
        CHECK(entry.compensated.cl ==
              doctest::Approx(truth[0] * scene.spec.cm_per_pixel).epsilon(1e-9));
    }
    // increments match the standards exactly
    for (size_t pair = 0; pair < 2; ++pair) {
        CHECK(rec.pairs[pair].value[0] == doctest::Approx(3.0));
        CHECK(rec.pairs[pair].value[1] == doctest::Approx(1.0));
        CHECK(rec.pairs[pair].value[2] == doctest::Approx(2.0));
        CHECK(rec.pairs[pair].value[3] == doctest::Approx(3.0));
        CHECK(report.aggregates[pair][0].metrics.mape < 1e-9);
        CHECK(report.aggregates[pair][0].metrics.rmse < 1e-9);
    }
    // weighted scores: E_t of an exact run is 1
    CHECK(report.weighted[0].e_t.at("mae") == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("evaluate: cmd_evaluate is deterministic and parallelism-invariant") {
    Workspace ws("det");
    auto scene = compositor::make_triplet(compositor::WrinkleSet::None, 7500, mini_spec());
    const auto manifest_path = write_eval_scene(ws, scene, "t1");
    auto config = eval_config(ws, manifest_path);

    const auto r1 = ws.file("r1.json");
    const auto r2 = ws.file("r2.json");
    CHECK(cmd_evaluate(config, r1) == 0);
    CHECK(cmd_evaluate(config, r2) == 0);
    CHECK(slurp(r1) == slurp(r2));
    CHECK(fs::exists(r1 + ".csv"));

    // parallel processing produces the same records and aggregates; only the
    // echoed jobs value may differ
    config.jobs = 4;
    const auto r3 = ws.file("r3.json");
    CHECK(cmd_evaluate(config, r3) == 0);
    auto j1 = nlohmann::json::parse(slurp(r1));
    auto j3 = nlohmann::json::parse(slurp(r3));
    j1["config"].erase("jobs");
    j3["config"].erase("jobs");
    CHECK(j1.dump() == j3.dump());
}

TEST_CASE("evaluate: a record missing one size is excluded from that pair") {
    Workspace ws("partial");
    auto scene = compositor::make_triplet(compositor::WrinkleSet::None, 7500, mini_spec());
    const auto manifest_path = write_eval_scene(ws, scene, "t1");
    // strip the A3 entries
    auto records = load_manifest(manifest_path);
    records[0].generated.erase(3);
    records[0].refined_masks.erase(3);
    auto config = eval_config(ws, manifest_path);

    auto report = evaluate_batch(records, config);
    const auto& rec = report.records[0];
    REQUIRE(rec.ok);
    CHECK(rec.pairs[0].valid[0]);
    CHECK_FALSE(rec.pairs[1].valid[0]);
    CHECK(report.aggregates[0][0].count == 1);
    CHECK(report.aggregates[1][0].count == 0);
    bool noted = false;
    for (const auto& note : rec.notes) noted = noted || note.find("A3") != std::string::npos;
    CHECK(noted);
}

TEST_CASE("evaluate: aggregates pool across records in id order") {
    Workspace ws("multi");
    auto scene = compositor::make_triplet(compositor::WrinkleSet::None, 7500, mini_spec());
    const auto manifest_path = write_eval_scene(ws, scene, "b");
    auto records = load_manifest(manifest_path);
    // a second record over the same scene files, listed first by id
    ManifestRecord second = records[0];
    second.id = "a";
    records.push_back(second);

    auto config = eval_config(ws, manifest_path);
    auto report = evaluate_batch(records, config);
    REQUIRE(report.records.size() == 2);
    CHECK(report.records[0].id == "a");
    CHECK(report.records[1].id == "b");
    for (size_t pair = 0; pair < 2; ++pair)
        for (size_t d = 0; d < 4; ++d) {
            CHECK(report.aggregates[pair][d].count == 2);
            CHECK(report.aggregates[pair][d].metrics.mape < 1e-9);
        }
    CHECK(report.weighted[1].e_t.at("rmse") == doctest::Approx(1.0).epsilon(1e-9));

    // aggregates are recomputable from the records through an independent path
    const std::array<double, 4> standards{3.0, 1.0, 2.0, 3.0};
    for (size_t pair = 0; pair < 2; ++pair)
        for (size_t d = 0; d < 4; ++d) {
            std::vector<double> observed;
            for (const auto& rec : report.records)
                if (rec.ok && rec.pairs[pair].valid[d]) observed.push_back(rec.pairs[pair].value[d]);
            REQUIRE(static_cast<int>(observed.size()) == report.aggregates[pair][d].count);
            const auto oracle = testutil::scalar_metrics(observed, standards[d]);
            CHECK(report.aggregates[pair][d].metrics.mae == doctest::Approx(oracle.mae).epsilon(1e-9));
            CHECK(report.aggregates[pair][d].metrics.smape ==
                  doctest::Approx(oracle.smape).epsilon(1e-9));
        }
}

TEST_CASE("evaluate: identical images across sizes give zero increments, 100% MAPE") {
    Workspace ws("ident");
    auto scene = compositor::make_triplet(compositor::WrinkleSet::None, 7500, mini_spec());
    const auto manifest_path = write_eval_scene(ws, scene, "t1");
    auto records = load_manifest(manifest_path);
    // point every size at the A1 image and mask
    for (int level = 2; level <= 3; ++level) {
        records[0].generated[level] = records[0].generated[1];
        records[0].refined_masks[level] = records[0].refined_masks[1];
    }
    auto config = eval_config(ws, manifest_path);
    auto report = evaluate_batch(records, config);
    REQUIRE(report.records[0].ok);
    for (size_t pair = 0; pair < 2; ++pair) {
        for (size_t d = 0; d < 4; ++d) {
            CHECK(report.records[0].pairs[pair].value[d] == doctest::Approx(0.0));
            CHECK(report.aggregates[pair][d].metrics.mape == doctest::Approx(100.0));
        }
    }
}

TEST_CASE("evaluate: sleeveless garments drop SL and renormalize the weights") {
    Workspace ws("sleeveless");
    auto spec = mini_spec();
    spec.sl = {0, 0, 0}; // no sleeves at any size
    auto scene = compositor::make_triplet(compositor::WrinkleSet::None, 7500, spec);
    const auto manifest_path = write_eval_scene(ws, scene, "t1");
    auto config = eval_config(ws, manifest_path);

    auto report = evaluate_batch(load_manifest(manifest_path), config);
    const auto& rec = report.records[0];
    REQUIRE(rec.ok);
    CHECK_FALSE(rec.sizes[0].compensated.sl_valid);
    bool noted = false;
    for (const auto& note : rec.notes) noted = noted || note.find("sleeveless") != std::string::npos;
    CHECK(noted);
    CHECK(report.aggregates[0][1].count == 0); // SL enters no batch
    CHECK(report.weighted[0].weights[1] == doctest::Approx(0.0));
    const double wsum = report.weighted[0].weights[0] + report.weighted[0].weights[2] +
                        report.weighted[0].weights[3];
    CHECK(wsum == doctest::Approx(1.0));
    // other dimensions still evaluate exactly
    CHECK(report.aggregates[0][0].metrics.mape < 1e-9);
}

TEST_CASE("evaluate: a record with no label map fails and drives the exit code") {
    Workspace ws("evalfail");
    write_text(ws.file("schema.txt"), "0 background\n5 torso\n14 left_arm\n15 right_arm\n");
    write_text(ws.file("manifest.jsonl"), nlohmann::json{{"id", "x"}}.dump() + "\n");
    RunConfig config;
    config.manifest_path = ws.file("manifest.jsonl");
    config.out_dir = ws.file("out");
    config.label_schema_path = ws.file("schema.txt");
    // the only record fails -> nonzero even without strict
    CHECK(cmd_evaluate(config, ws.file("r.json")) == 1);
    auto report = RunReport::load(ws.file("r.json"));
    REQUIRE(report.records.size() == 1);
    CHECK_FALSE(report.records[0].ok);
    CHECK(report.records[0].error.find("label map") != std::string::npos);
}

TEST_CASE("report command tolerates an empty report with a warning") {
    Workspace ws("empty");
    RunReport empty;
    const auto path = ws.file("empty.json");
    empty.save(path);
    RunConfig config;
    CHECK(cmd_report(config, path, "") == 0);
}

TEST_CASE("report command prints the table and writes csv") {
    Workspace ws("report");
    auto scene = compositor::make_triplet(compositor::WrinkleSet::None, 7500, mini_spec());
    const auto manifest_path = write_eval_scene(ws, scene, "t1");
    auto config = eval_config(ws, manifest_path);
    const auto report_path = ws.file("report.json");
    REQUIRE(cmd_evaluate(config, report_path) == 0);

    const auto csv_path = ws.file("table.csv");
    CHECK(cmd_report(config, report_path, csv_path) == 0);
    const auto csv = slurp(csv_path);
    size_t lines = 0;
    for (char c : csv) lines += c == '\n';
    CHECK(lines == 9); // header + 8 rows
    auto parsed = parse_aggregates_csv(csv);
    CHECK(parsed[0][1].metrics.mape < 1e-9);

    CHECK_THROWS_AS(RunReport::load(ws.file("absent.json")), ConfigError);
}
