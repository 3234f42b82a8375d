#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vtsize/config.hpp"
#include "vtsize/pipeline.hpp"
#include "vtsize/report.hpp"

namespace {

struct CliState {
    std::string config_path;
    std::string manifest;
    std::string out;
    std::vector<int> sizes;
    bool strict = false;
    std::optional<int> jobs;
    std::optional<double> cm_per_pixel;
    std::string backend_url;        // try-on backend
    std::string refine_backend_url; // refinement backend
    std::string label_schema;
    std::optional<std::string> refine_mode;
};

// Precedence: defaults < config file < environment < CLI flags.
vtsize::RunConfig assemble(const CliState& cli) {
    vtsize::RunConfig config;
    if (!cli.config_path.empty()) config = vtsize::RunConfig::load(cli.config_path);
    config.apply_env();
    if (!cli.manifest.empty()) config.manifest_path = cli.manifest;
    if (!cli.out.empty()) config.out_dir = cli.out;
    if (!cli.sizes.empty()) config.sizes = cli.sizes;
    if (cli.strict) config.strict = true;
    if (cli.jobs) config.jobs = *cli.jobs;
    if (cli.cm_per_pixel) config.cm_per_pixel = *cli.cm_per_pixel;
    if (!cli.backend_url.empty()) config.tryon_backend_url = cli.backend_url;
    if (!cli.refine_backend_url.empty()) config.refine_backend_url = cli.refine_backend_url;
    if (!cli.label_schema.empty()) config.label_schema_path = cli.label_schema;
    if (cli.refine_mode) config.refine_mode = *cli.refine_mode;
    return config;
}

void add_common_flags(CLI::App* cmd, CliState& cli) {
    cmd->add_option("--config", cli.config_path, "JSON config file");
    cmd->add_option("--manifest", cli.manifest, "input manifest (JSON lines)");
    cmd->add_option("--out", cli.out, "output directory");
    cmd->add_option("--sizes", cli.sizes, "size levels to process (1 2 3)")->delimiter(',');
    cmd->add_flag("--strict", cli.strict, "exit nonzero on any record failure");
    cmd->add_option("--jobs", [&cli](const CLI::results_t& r) {
        cli.jobs = std::stoi(r[0]);
        return true;
    }, "parallel worker count");
    cmd->add_option("--cm-per-pixel", [&cli](const CLI::results_t& r) {
        cli.cm_per_pixel = std::stod(r[0]);
        return true;
    }, "pixel-to-cm scale override");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-size try-on mask generation and garment size evaluation"};
    app.require_subcommand(1);

    CliState cli;
    std::string report_path = "report.json";
    std::string csv_path;

    auto* gen = app.add_subcommand("gen-masks", "generate refined multi-size masks");
    add_common_flags(gen, cli);
    gen->add_option("--refine-mode", [&cli](const CLI::results_t& r) {
        cli.refine_mode = r[0];
        return true;
    }, "classical | external | none");
    gen->add_option("--refine-backend-url", cli.refine_backend_url, "external refinement backend");

    auto* adjust = app.add_subcommand("adjust-garment", "write proportionally adjusted garments");
    add_common_flags(adjust, cli);

    auto* tryon = app.add_subcommand("tryon", "generate try-on images via an external backend");
    add_common_flags(tryon, cli);
    tryon->add_option("--backend-url", cli.backend_url, "try-on inference backend");

    auto* evaluate = app.add_subcommand("evaluate", "measure sizes and score increments");
    add_common_flags(evaluate, cli);
    evaluate->add_option("--backend-url", cli.backend_url, "try-on inference backend");
    evaluate->add_option("--label-schema", cli.label_schema, "label index -> name table");
    evaluate->add_option("--report", report_path, "report output path");

    auto* report = app.add_subcommand("report", "print tables from an existing report");
    add_common_flags(report, cli);
    report->add_option("--report", report_path, "report input path");
    report->add_option("--csv", csv_path, "also write the flat CSV here");

    CLI11_PARSE(app, argc, argv);

    try {
        const vtsize::RunConfig config = assemble(cli);
        if (gen->parsed()) return vtsize::cmd_gen_masks(config);
        if (adjust->parsed()) return vtsize::cmd_adjust_garment(config);
        if (tryon->parsed()) return vtsize::cmd_tryon(config);
        if (evaluate->parsed()) return vtsize::cmd_evaluate(config, report_path);
        if (report->parsed()) return vtsize::cmd_report(config, report_path, csv_path);
    } catch (const vtsize::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
