#include <cstdio>
#include <exception>
#include <filesystem>
#include <string>

#include <CLI11.hpp>

#include "warpkit/pipeline.hpp"

namespace fs = std::filesystem;

namespace {

// exit codes: 0 ok, 1 config/input error, 2 partial failure, 3 metric pairs missing
constexpr int kExitOk = 0;
constexpr int kExitConfigError = 1;
constexpr int kExitPartial = 2;
constexpr int kExitMissingPairs = 3;

struct CommonOpts {
    std::string config_path;
    std::string input;
    std::string output;
    bool has_seed = false;
    uint64_t seed = 0;
    int workers = 0;
    bool viz = false;
};

warpkit::GenerationConfig load_with_overrides(const CommonOpts& opts) {
    warpkit::GenerationConfig cfg = warpkit::load_config(opts.config_path);
    if (!opts.input.empty()) cfg.input_dir = opts.input;
    if (!opts.output.empty()) cfg.output_dir = opts.output;
    if (opts.has_seed) cfg.global_seed = opts.seed;
    if (opts.workers > 0) cfg.workers = opts.workers;
    if (opts.viz) cfg.emit_visualizations = true;
    return cfg;
}

int cmd_generate(const CommonOpts& opts) {
    const warpkit::GenerationConfig cfg = load_with_overrides(opts);
    const warpkit::GenerateSummary summary = warpkit::run_generate(cfg);
    std::printf("generated %zu record(s), skipped %zu\n", summary.records.size(), summary.skipped.size());
    for (const auto& s : summary.skipped) std::fprintf(stderr, "skipped: %s\n", s.c_str());
    return summary.skipped.empty() ? kExitOk : kExitPartial;
}

int cmd_inspect(const std::string& path, const std::string& out_png) {
    const warpkit::InspectResult res = warpkit::run_inspect(path);
    if (res.kind == "uvf") {
        std::printf("UVF %dx%d\n", res.width, res.height);
        std::printf("u: min %.6g max %.6g mean %.6g\n", res.u_min, res.u_max, res.u_mean);
        std::printf("v: min %.6g max %.6g mean %.6g\n", res.v_min, res.v_max, res.v_mean);
    } else {
        std::printf("KMF %dx%d\n", res.width, res.height);
        std::printf("min %.6g max %.6g mean %.6g\n", res.u_min, res.u_max, res.u_mean);
    }
    const std::string viz_path = out_png.empty() ? path + ".viz.png" : out_png;
    warpkit::write_png(viz_path, res.visualization);
    std::printf("visualization: %s\n", viz_path.c_str());
    return kExitOk;
}

int cmd_metrics(const std::string& pred_dir, const std::string& manifest) {
    const warpkit::MetricsSummary summary = warpkit::run_metrics(pred_dir, manifest);
    for (const auto& p : summary.pairs) {
        nlohmann::json line = {{"stem", p.stem}, {"corruption", p.corruption}};
        if (p.psnr)
            line["psnr"] = *p.psnr;
        else
            line["psnr"] = "inf";
        if (p.epe) line["epe"] = *p.epe;
        std::printf("%s\n", line.dump().c_str());
    }
    nlohmann::json agg = {{"pairs", summary.pairs.size()},
                          {"mean_psnr", summary.mean_psnr},
                          {"infinite_psnr_count", summary.infinite_psnr_count},
                          {"mean_epe", summary.mean_epe},
                          {"epe_pairs", summary.epe_count},
                          {"missing", summary.missing.size()}};
    std::printf("%s\n", agg.dump().c_str());
    if (!summary.missing.empty()) {
        for (const auto& m : summary.missing) std::fprintf(stderr, "missing prediction: %s\n", m.c_str());
        return kExitMissingPairs;
    }
    return kExitOk;
}

int cmd_checkerboard(const CommonOpts& opts, const std::string& corruption, int width, int height, int cell) {
    warpkit::GenerationConfig cfg = warpkit::load_config(opts.config_path);
    if (opts.has_seed) cfg.global_seed = opts.seed;
    std::string chosen = corruption;
    if (chosen.empty()) {
        if (cfg.corruptions.size() != 1)
            throw warpkit::ConfigError("corruptions", "pass --corruption when the config selects a mix");
        chosen = cfg.corruptions.begin()->first;
    }
    const std::string out_dir = opts.output.empty() ? "." : opts.output;
    fs::create_directories(out_dir);
    const warpkit::CheckerboardResult res = warpkit::run_checkerboard(cfg, chosen, width, height, cell);
    const std::string probe_path = (fs::path(out_dir) / ("checkerboard." + chosen + ".png")).string();
    const std::string viz_path = (fs::path(out_dir) / ("checkerboard." + chosen + ".viz.png")).string();
    warpkit::write_png(probe_path, res.probe);
    warpkit::write_png(viz_path, res.uv_viz);
    std::printf("probe: %s\nuv visualization: %s\n", probe_path.c_str(), viz_path.c_str());
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Procedural refractive and weather corruption toolkit"};
    app.require_subcommand(1);

    CommonOpts opts;

    auto* gen = app.add_subcommand("generate", "Corrupt a directory of clean PNG frames");
    gen->add_option("--config", opts.config_path, "Generation config (JSON)")->required();
    gen->add_option("--input", opts.input, "Override input directory");
    gen->add_option("--output", opts.output, "Override output directory");
    auto* seed_opt = gen->add_option("--seed", opts.seed, "Override global seed");
    gen->add_option("--workers", opts.workers, "Override worker count");
    gen->add_flag("--viz", opts.viz, "Emit UV visualizations");

    std::string inspect_path, inspect_out;
    auto* ins = app.add_subcommand("inspect", "Visualize and summarize a UVF/KMF file");
    ins->add_option("path", inspect_path, "UVF or KMF file")->required();
    ins->add_option("--output", inspect_out, "Visualization PNG path");

    std::string pred_dir, manifest_path;
    auto* met = app.add_subcommand("metrics", "Score predictions against a generation manifest");
    met->add_option("--pred", pred_dir, "Directory of predicted images (and optional UVF files)")->required();
    met->add_option("--manifest", manifest_path, "manifest.jsonl from generate")->required();

    std::string cb_corruption;
    int cb_width = 512, cb_height = 512, cb_cell = 32;
    auto* cb = app.add_subcommand("checkerboard", "Render a checkerboard probe under a refractive warp");
    cb->add_option("--config", opts.config_path, "Generation config (JSON)")->required();
    cb->add_option("--corruption", cb_corruption, "Refractive corruption name");
    cb->add_option("--output", opts.output, "Output directory");
    auto* cb_seed = cb->add_option("--seed", opts.seed, "Override global seed");
    cb->add_option("--width", cb_width, "Probe width");
    cb->add_option("--height", cb_height, "Probe height");
    cb->add_option("--cell", cb_cell, "Checker cell size");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            opts.has_seed = seed_opt->count() > 0;
            return cmd_generate(opts);
        }
        if (ins->parsed()) return cmd_inspect(inspect_path, inspect_out);
        if (met->parsed()) return cmd_metrics(pred_dir, manifest_path);
        if (cb->parsed()) {
            opts.has_seed = cb_seed->count() > 0;
            return cmd_checkerboard(opts, cb_corruption, cb_width, cb_height, cb_cell);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfigError;
    }
    return kExitConfigError;
}
