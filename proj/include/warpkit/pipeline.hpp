#pragma once

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "warpkit/config.hpp"
#include "warpkit/formats.hpp"
#include "warpkit/metrics.hpp"
#include "warpkit/png_io.hpp"
#include "warpkit/warps.hpp"
#include "warpkit/weather.hpp"

namespace warpkit {

namespace fs = std::filesystem;

struct GenerationRecord {
    std::string input;
    std::string stem;
    std::string corruption;
    uint64_t stream_id = 0;
    nlohmann::json params;
    nlohmann::json outputs;

    nlohmann::json to_json(uint64_t global_seed) const {
        return {{"input", input},     {"stem", stem},          {"corruption", corruption},
                {"stream_id", stream_id}, {"global_seed", global_seed}, {"params", params},
                {"outputs", outputs}};
    }
};

struct GenerateSummary {
    std::vector<GenerationRecord> records;
    std::vector<std::string> skipped;  // undecodable inputs
};

namespace detail {

inline std::vector<fs::path> list_pngs_sorted(const fs::path& dir) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        std::string ext = e.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
        if (ext == ".png") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end(),
              [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });
    return files;
}

inline std::string pick_corruption(const GenerationConfig& cfg, uint64_t stream_id) {
    if (cfg.corruptions.size() == 1) return cfg.corruptions.begin()->first;
    double wsum = 0.0;
    for (const auto& [name, w] : cfg.corruptions) wsum += w;
    Rng rng(derive_seed({cfg.global_seed, stream_id, PurposeTag::Select}));
    double r = rng.uniform(0.0, wsum);
    for (const auto& [name, w] : cfg.corruptions) {
        if (r < w) return name;
        r -= w;
    }
    return cfg.corruptions.rbegin()->first;
}

}  // namespace detail

// Builds the UV field for one refractive corruption and materializes the
// sampled parameters for the manifest.
inline UVField build_refractive_field(const GenerationConfig& cfg, const std::string& corruption,
                                      int width, int height, uint64_t stream_id, nlohmann::json& params) {
    const uint64_t gs = cfg.global_seed;
    if (corruption == "brown_conrady") {
        Rng rng(derive_seed({gs, stream_id, PurposeTag::Params}));
        CameraIntrinsics intr{cfg.brown_conrady.fx_rel * width, cfg.brown_conrady.fy_rel * width,
                              cfg.brown_conrady.cx_rel * width, cfg.brown_conrady.cy_rel * height};
        LensParams lens;
        for (int i = 0; i < 6; ++i) lens.k[i] = cfg.brown_conrady.k[i].sample(rng);
        lens.p1 = cfg.brown_conrady.p1.sample(rng);
        lens.p2 = cfg.brown_conrady.p2.sample(rng);
        for (int i = 0; i < 4; ++i) lens.s[i] = cfg.brown_conrady.s[i].sample(rng);
        params = {{"fx", intr.fx}, {"fy", intr.fy}, {"cx", intr.cx}, {"cy", intr.cy},
                  {"k", {lens.k[0], lens.k[1], lens.k[2], lens.k[3], lens.k[4], lens.k[5]}},
                  {"p1", lens.p1}, {"p2", lens.p2},
                  {"s", {lens.s[0], lens.s[1], lens.s[2], lens.s[3]}}};
        return brown_conrady_uv(width, height, intr, lens);
    }
    if (corruption == "grf_warp") {
        Rng rng(derive_seed({gs, stream_id, PurposeTag::Params}));
        const double ell = cfg.grf_warp.corr_length.sample(rng);
        const double alpha = cfg.grf_warp.alpha.sample(rng);
        params = {{"corr_length", ell}, {"alpha", alpha}};
        return grf_warp_uv(width, height, ell, alpha,
                           derive_seed({gs, stream_id, PurposeTag::FieldU}),
                           derive_seed({gs, stream_id, PurposeTag::FieldV}));
    }
    if (corruption == "tps") {
        const TpsControlSet controls = tps_jittered_grid(
            width, height, cfg.tps.grid, cfg.tps.jitter_sigma, cfg.tps.target_sigma,
            derive_seed({gs, stream_id, PurposeTag::TpsPoints}));
        params = {{"src_x", controls.src_x}, {"src_y", controls.src_y},
                  {"dst_x", controls.dst_x}, {"dst_y", controls.dst_y}};
        return tps_uv(tps_fit(controls), width, height);
    }
    if (corruption == "div_free") {
        Rng rng(derive_seed({gs, stream_id, PurposeTag::Params}));
        const double ell = cfg.div_free.corr_length.sample(rng);
        const double alpha = cfg.div_free.alpha.sample(rng);
        params = {{"corr_length", ell}, {"alpha", alpha}};
        return divergence_free_uv(width, height, ell, alpha,
                                  derive_seed({gs, stream_id, PurposeTag::Stream}));
    }
    throw std::invalid_argument("not a refractive corruption: " + corruption);
}

namespace detail {

inline GenerationRecord process_one(const GenerationConfig& cfg, const fs::path& input,
                                    uint64_t stream_id, const std::string& corruption) {
    const ImageBuffer clean = read_png(input.string());
    const std::string stem = input.stem().string();
    const fs::path out_dir(cfg.output_dir);
    const std::string base = stem + "." + corruption;

    GenerationRecord rec;
    rec.input = input.string();
    rec.stem = stem;
    rec.corruption = corruption;
    rec.stream_id = stream_id;

    // outputs are recorded relative to the output directory so manifests are
    // byte-identical wherever the tree lands
    const std::string img_name = base + ".png";
    const std::string img_path = (out_dir / img_name).string();

    if (is_refractive(corruption)) {
        const UVField field =
            build_refractive_field(cfg, corruption, clean.width(), clean.height(), stream_id, rec.params);
        const ImageBuffer corrupted = remap(clean, field);
        write_png(img_path, corrupted);
        const std::string uv_name = base + ".uvf";
        write_uvf((out_dir / uv_name).string(), field);
        rec.outputs = {{"image", img_name}, {"uv", uv_name}};
        if (cfg.emit_visualizations) {
            double peak = 1.0;
            for (size_t i = 0; i < field.u_values().size(); ++i)
                peak = std::max({peak, std::abs(field.u_values()[i]), std::abs(field.v_values()[i])});
            const std::string viz_name = base + ".viz.png";
            write_png((out_dir / viz_name).string(), visualize_uv(field, peak));
            rec.outputs["viz"] = viz_name;
        }
        return rec;
    }

    if (corruption == "uniform_fog") {
        const auto res = uniform_fog(clean, cfg.uniform_fog.to_params(),
                                     derive_seed({cfg.global_seed, stream_id, PurposeTag::FogJitter}));
        write_png(img_path, res.image);
        rec.params = {{"k", res.k}, {"delta", res.delta}, {"k0", cfg.uniform_fog.to_params().k0},
                      {"d_max", cfg.uniform_fog.d_max}, {"atmo", cfg.uniform_fog.atmo}};
        rec.outputs = {{"image", img_name}};
        if (cfg.emit_transmission) {
            const std::string t_name = base + ".t.kmf";
            write_kmf((out_dir / t_name).string(), res.transmission);
            rec.outputs["transmission"] = t_name;
        }
        return rec;
    }
    if (corruption == "hetero_fog") {
        const auto res = hetero_fog(clean, cfg.hetero_fog.to_params(), cfg.octaves,
                                    derive_seed({cfg.global_seed, stream_id, PurposeTag::FogJitter}));
        write_png(img_path, res.image);
        const std::string k_name = base + ".kmf";
        write_kmf((out_dir / k_name).string(), res.k_map);
        rec.params = {{"delta", res.delta}, {"k0", cfg.hetero_fog.to_params().k0},
                      {"d_max", cfg.hetero_fog.d_max}, {"atmo", cfg.hetero_fog.atmo},
                      {"scales", cfg.octaves.scales}, {"weights", cfg.octaves.weights}};
        rec.outputs = {{"image", img_name}, {"kmap", k_name}};
        if (cfg.emit_transmission) {
            const std::string t_name = base + ".t.kmf";
            write_kmf((out_dir / t_name).string(), res.transmission);
            rec.outputs["transmission"] = t_name;
        }
        return rec;
    }
    if (corruption == "lens_flare") {
        Rng rng(derive_seed({cfg.global_seed, stream_id, PurposeTag::Flare}));
        FlareParams fp;
        fp.rho = cfg.lens_flare.rho.sample(rng);
        fp.beta = cfg.lens_flare.beta.sample(rng);
        fp.cx = rng.uniform(0.3 * clean.width(), 0.7 * clean.width());
        fp.cy = rng.uniform(0.0, 0.3 * clean.height());
        const auto res = lens_flare(clean, fp, 0);
        write_png(img_path, res.image);
        const std::string m_name = base + ".kmf";
        write_kmf((out_dir / m_name).string(), res.mask);
        rec.params = {{"rho", fp.rho}, {"beta", fp.beta}, {"cx", fp.cx}, {"cy", fp.cy}};
        rec.outputs = {{"image", img_name}, {"kmap", m_name}};
        return rec;
    }
    throw std::invalid_argument("unknown corruption: " + corruption);
}

}  // namespace detail

// Reads clean frames, samples corruption parameters deterministically, writes
// paired outputs and a line-delimited manifest. stream_id is the index of the
// input in sorted filename order, so adding files never reseeds existing ones.
// Undecodable inputs are skipped and counted, not fatal.
inline GenerateSummary run_generate(const GenerationConfig& cfg) {
    cfg.validate();
    if (cfg.input_dir.empty() || !fs::is_directory(cfg.input_dir))
        throw ConfigError("input_dir", "not a directory: " + cfg.input_dir);
    const auto inputs = detail::list_pngs_sorted(cfg.input_dir);
    if (inputs.empty()) throw ConfigError("input_dir", "no PNG inputs in " + cfg.input_dir);
    if (cfg.output_dir.empty()) throw ConfigError("output_dir", "missing");
    fs::create_directories(cfg.output_dir);

    struct Slot {
        std::optional<GenerationRecord> record;
        std::string error;
    };
    std::vector<Slot> slots(inputs.size());
    std::atomic<size_t> next{0};

    auto worker = [&]() {
        for (;;) {
            const size_t i = next.fetch_add(1);
            if (i >= inputs.size()) return;
            const std::string corruption = detail::pick_corruption(cfg, i);
            try {
                slots[i].record = detail::process_one(cfg, inputs[i], i, corruption);
            } catch (const std::exception& e) {
                slots[i].error = inputs[i].string() + ": " + e.what();
            }
        }
    };

    const int nthreads = std::min<int>(cfg.workers, static_cast<int>(inputs.size()));
    if (nthreads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    GenerateSummary summary;
    std::ofstream manifest(fs::path(cfg.output_dir) / "manifest.jsonl", std::ios::trunc);
    if (!manifest) throw ConfigError("output_dir", "cannot write manifest in " + cfg.output_dir);
    for (auto& slot : slots) {
        if (slot.record) {
            manifest << slot.record->to_json(cfg.global_seed).dump() << "\n";
            summary.records.push_back(std::move(*slot.record));
        } else {
            summary.skipped.push_back(slot.error);
        }
    }
    return summary;
}

struct InspectResult {
    std::string kind;  // "uvf" or "kmf"
    int width = 0, height = 0;
    double u_min = 0, u_max = 0, u_mean = 0;
    double v_min = 0, v_max = 0, v_mean = 0;  // unused for kmf
    ImageBuffer visualization;
};

// UVF -> signed red/green visualization; KMF -> grayscale normalization.
// Constant fields render mid-gray.
inline InspectResult run_inspect(const std::string& path) {
    InspectResult res;
    std::ifstream probe(path, std::ios::binary);
    char magic[4] = {0, 0, 0, 0};
    probe.read(magic, 4);
    probe.close();
    if (std::string(magic, 4) == "UVF1") {
        const UVField field = read_uvf(path);
        res.kind = "uvf";
        res.width = field.width();
        res.height = field.height();
        res.u_min = *std::min_element(field.u_values().begin(), field.u_values().end());
        res.u_max = *std::max_element(field.u_values().begin(), field.u_values().end());
        res.v_min = *std::min_element(field.v_values().begin(), field.v_values().end());
        res.v_max = *std::max_element(field.v_values().begin(), field.v_values().end());
        double su = 0, sv = 0;
        for (size_t i = 0; i < field.u_values().size(); ++i) {
            su += field.u_values()[i];
            sv += field.v_values()[i];
        }
        res.u_mean = su / static_cast<double>(field.u_values().size());
        res.v_mean = sv / static_cast<double>(field.v_values().size());
        const double peak = std::max({1e-12, std::abs(res.u_min), std::abs(res.u_max),
                                      std::abs(res.v_min), std::abs(res.v_max)});
        res.visualization = visualize_uv(field, peak > 0 ? peak : 1.0);
        return res;
    }
    if (std::string(magic, 4) == "KMF1") {
        const ScalarField field = read_kmf(path);
        res.kind = "kmf";
        res.width = field.width();
        res.height = field.height();
        res.u_min = field.min();
        res.u_max = field.max();
        res.u_mean = field.mean();
        ImageBuffer viz(field.width(), field.height());
        const double range = res.u_max - res.u_min;
        for (int y = 0; y < field.height(); ++y) {
            for (int x = 0; x < field.width(); ++x) {
                const uint8_t g = range > 0.0
                                      ? detail::round_u8(255.0 * (field.at(x, y) - res.u_min) / range)
                                      : static_cast<uint8_t>(128);
                viz.at(x, y, 0) = g;
                viz.at(x, y, 1) = g;
                viz.at(x, y, 2) = g;
            }
        }
        res.visualization = std::move(viz);
        return res;
    }
    // fall through to the format readers for a precise error
    read_uvf(path);
    throw FormatError(path + ": unrecognized magic", 0);
}

struct PairReport {
    std::string stem;
    std::string corruption;
    std::optional<double> psnr;  // nullopt = infinite (identical images)
    std::optional<double> epe;   // present when both ground truth and predicted UV exist
};

struct MetricsSummary {
    std::vector<PairReport> pairs;
    std::vector<std::string> missing;  // prediction files not found
    double mean_psnr = 0.0;            // over finite pairs
    size_t infinite_psnr_count = 0;
    double mean_epe = 0.0;
    size_t epe_count = 0;
};

// Compares predictions in pred_dir (same filenames as the generated outputs)
// against the clean inputs and ground-truth UV fields from a manifest.
inline MetricsSummary run_metrics(const std::string& pred_dir, const std::string& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) throw std::runtime_error("cannot open manifest: " + manifest_path);
    const fs::path gt_dir = fs::path(manifest_path).parent_path();
    MetricsSummary summary;
    double psnr_sum = 0.0;
    size_t psnr_count = 0;
    double epe_sum = 0.0;

    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const nlohmann::json rec = nlohmann::json::parse(line);
        PairReport report;
        report.stem = rec.at("stem").get<std::string>();
        report.corruption = rec.at("corruption").get<std::string>();

        const fs::path gen_image = gt_dir / rec.at("outputs").at("image").get<std::string>();
        const fs::path pred_image = fs::path(pred_dir) / gen_image.filename();
        if (!fs::exists(pred_image)) {
            summary.missing.push_back(pred_image.string());
            continue;
        }
        const ImageBuffer clean = read_png(rec.at("input").get<std::string>());
        const ImageBuffer pred = read_png(pred_image.string());
        report.psnr = psnr(pred, clean);
        if (report.psnr) {
            psnr_sum += *report.psnr;
            ++psnr_count;
        } else {
            ++summary.infinite_psnr_count;
        }

        if (rec.at("outputs").contains("uv")) {
            const fs::path gt_uv = gt_dir / rec.at("outputs").at("uv").get<std::string>();
            const fs::path pred_uv = fs::path(pred_dir) / gt_uv.filename();
            if (fs::exists(pred_uv)) {
                report.epe = epe(read_uvf(pred_uv.string()), read_uvf(gt_uv.string()));
                epe_sum += *report.epe;
                ++summary.epe_count;
            }
        }
        summary.pairs.push_back(std::move(report));
    }
    if (psnr_count > 0) summary.mean_psnr = psnr_sum / static_cast<double>(psnr_count);
    if (summary.epe_count > 0) summary.mean_epe = epe_sum / static_cast<double>(summary.epe_count);
    return summary;
}

struct CheckerboardResult {
    ImageBuffer probe;     // warped checkerboard
    ImageBuffer uv_viz;
    UVField field;
};

// Renders a checkerboard probe under the configured refractive corruption.
inline CheckerboardResult run_checkerboard(const GenerationConfig& cfg, const std::string& corruption,
                                           int width, int height, int cell, uint64_t stream_id = 0) {
    if (!is_refractive(corruption))
        throw ConfigError("corruptions", corruption + " is not a refractive corruption");
    nlohmann::json params;
    CheckerboardResult res;
    res.field = build_refractive_field(cfg, corruption, width, height, stream_id, params);
    const ImageBuffer board = render_checkerboard(width, height, cell);
    res.probe = remap(board, res.field);
    double peak = 1.0;
    for (size_t i = 0; i < res.field.u_values().size(); ++i)
        peak = std::max({peak, std::abs(res.field.u_values()[i]), std::abs(res.field.v_values()[i])});
    res.uv_viz = visualize_uv(res.field, peak);
    return res;
}

}  // namespace warpkit
