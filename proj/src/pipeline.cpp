#include "relight/pipeline.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "relight/errors.hpp"
#include "relight/image_io.hpp"

namespace relight {

namespace fs = std::filesystem;
using nlohmann::json;

void RunConfig::validate() const {
    solver.validate();
    weights.validate();
    guide.validate();
    adjustment_init.validate();
    if (finetune_iters < 1) {
        throw ConfigError("config: finetune_iters must be at least 1");
    }
    if (output_dir.empty()) {
        throw ConfigError("config: output_dir must not be empty");
    }
}

namespace {

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const char* scope) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        const bool known = std::any_of(allowed.begin(), allowed.end(),
                                       [&](const char* k) { return it.key() == k; });
        if (!known) {
            throw ConfigError(std::string("config: unknown key '") + scope + it.key() + "'");
        }
    }
}

template <typename T>
void read_field(const json& obj, const char* key, T& into) {
    if (!obj.contains(key)) return;
    try {
        into = obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string("config: field '") + key + "' has the wrong type");
    }
}

ProxChoice parse_prox(const json& obj, const char* scope) {
    check_keys(obj, {"kind", "width", "strength"}, scope);
    ProxChoice p;
    std::string kind = "identity";
    read_field(obj, "kind", kind);
    if (kind == "identity") {
        p.kind = ProxKind::identity;
    } else if (kind == "gaussian_smooth") {
        p.kind = ProxKind::gaussian_smooth;
    } else if (kind == "weighted_smooth") {
        p.kind = ProxKind::weighted_smooth;
    } else {
        throw ConfigError("config: unknown prox kind '" + kind + "'");
    }
    read_field(obj, "width", p.width);
    read_field(obj, "strength", p.strength);
    return p;
}

json prox_to_json(const ProxChoice& p) {
    const char* kind = p.kind == ProxKind::identity        ? "identity"
                       : p.kind == ProxKind::gaussian_smooth ? "gaussian_smooth"
                                                             : "weighted_smooth";
    return json{{"kind", kind}, {"width", p.width}, {"strength", p.strength}};
}

} // namespace

RunConfig parse_run_config(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    if (!root.is_object()) {
        throw ConfigError("config: document must be a JSON object");
    }
    check_keys(root,
               {"solver", "weights", "guide", "adjustment_init", "finetune_enabled",
                "finetune_iters", "apply_gc", "output_dir", "emit_stage_trace"},
               "");

    RunConfig cfg;
    if (root.contains("solver")) {
        const json& s = root.at("solver");
        check_keys(s,
                   {"gamma", "lambda", "sigma", "eta1", "eta2", "stages", "eps_div",
                    "safeguard", "prox_l", "prox_r"},
                   "solver.");
        read_field(s, "gamma", cfg.solver.gamma);
        read_field(s, "lambda", cfg.solver.lambda);
        read_field(s, "sigma", cfg.solver.sigma);
        read_field(s, "eta1", cfg.solver.eta1);
        read_field(s, "eta2", cfg.solver.eta2);
        read_field(s, "stages", cfg.solver.stages);
        read_field(s, "eps_div", cfg.solver.eps_div);
        read_field(s, "safeguard", cfg.solver.safeguard);
        if (s.contains("prox_l")) cfg.solver.prox_l = parse_prox(s.at("prox_l"), "solver.prox_l.");
        if (s.contains("prox_r")) cfg.solver.prox_r = parse_prox(s.at("prox_r"), "solver.prox_r.");
    }
    if (root.contains("weights")) {
        const json& w = root.at("weights");
        check_keys(w,
                   {"gamma_R", "gamma_L", "gamma_rec", "eta_L", "eta_R", "eta_lbs", "eta_en",
                    "eps_grad"},
                   "weights.");
        read_field(w, "gamma_R", cfg.weights.gamma_R);
        read_field(w, "gamma_L", cfg.weights.gamma_L);
        read_field(w, "gamma_rec", cfg.weights.gamma_rec);
        read_field(w, "eta_L", cfg.weights.eta_L);
        read_field(w, "eta_R", cfg.weights.eta_R);
        read_field(w, "eta_lbs", cfg.weights.eta_lbs);
        read_field(w, "eta_en", cfg.weights.eta_en);
        read_field(w, "eps_grad", cfg.weights.eps_grad);
    }
    if (root.contains("guide")) {
        const json& g = root.at("guide");
        check_keys(g, {"target_mean_luma", "clahe_tiles", "clahe_clip", "denoise_radius"},
                   "guide.");
        read_field(g, "target_mean_luma", cfg.guide.target_mean_luma);
        read_field(g, "clahe_tiles", cfg.guide.clahe_tiles);
        read_field(g, "clahe_clip", cfg.guide.clahe_clip);
        read_field(g, "denoise_radius", cfg.guide.denoise_radius);
    }
    if (root.contains("adjustment_init")) {
        const json& a = root.at("adjustment_init");
        check_keys(a, {"alpha", "illum_gamma_floor", "refl_gain", "per_channel_gain"},
                   "adjustment_init.");
        read_field(a, "alpha", cfg.adjustment_init.alpha);
        read_field(a, "illum_gamma_floor", cfg.adjustment_init.illum_gamma_floor);
        read_field(a, "refl_gain", cfg.adjustment_init.refl_gain);
        if (a.contains("per_channel_gain")) {
            std::vector<double> gains;
            read_field(a, "per_channel_gain", gains);
            if (gains.size() != 3) {
                throw ConfigError("config: per_channel_gain must hold exactly 3 values");
            }
            std::copy(gains.begin(), gains.end(), cfg.adjustment_init.per_channel_gain);
        }
    }
    read_field(root, "finetune_enabled", cfg.finetune_enabled);
    read_field(root, "finetune_iters", cfg.finetune_iters);
    read_field(root, "apply_gc", cfg.apply_gc);
    read_field(root, "output_dir", cfg.output_dir);
    read_field(root, "emit_stage_trace", cfg.emit_stage_trace);

    cfg.validate();
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("config: cannot open " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_run_config(buf.str());
}

std::string run_config_to_json(const RunConfig& cfg) {
    json root;
    root["solver"] = json{{"gamma", cfg.solver.gamma},
                          {"lambda", cfg.solver.lambda},
                          {"sigma", cfg.solver.sigma},
                          {"eta1", cfg.solver.eta1},
                          {"eta2", cfg.solver.eta2},
                          {"stages", cfg.solver.stages},
                          {"eps_div", cfg.solver.eps_div},
                          {"safeguard", cfg.solver.safeguard},
                          {"prox_l", prox_to_json(cfg.solver.prox_l)},
                          {"prox_r", prox_to_json(cfg.solver.prox_r)}};
    root["weights"] = json{{"gamma_R", cfg.weights.gamma_R},   {"gamma_L", cfg.weights.gamma_L},
                           {"gamma_rec", cfg.weights.gamma_rec}, {"eta_L", cfg.weights.eta_L},
                           {"eta_R", cfg.weights.eta_R},       {"eta_lbs", cfg.weights.eta_lbs},
                           {"eta_en", cfg.weights.eta_en},     {"eps_grad", cfg.weights.eps_grad}};
    root["guide"] = json{{"target_mean_luma", cfg.guide.target_mean_luma},
                         {"clahe_tiles", cfg.guide.clahe_tiles},
                         {"clahe_clip", cfg.guide.clahe_clip},
                         {"denoise_radius", cfg.guide.denoise_radius}};
    root["adjustment_init"] =
        json{{"alpha", cfg.adjustment_init.alpha},
             {"illum_gamma_floor", cfg.adjustment_init.illum_gamma_floor},
             {"refl_gain", cfg.adjustment_init.refl_gain},
             {"per_channel_gain",
              {cfg.adjustment_init.per_channel_gain[0], cfg.adjustment_init.per_channel_gain[1],
               cfg.adjustment_init.per_channel_gain[2]}}};
    root["finetune_enabled"] = cfg.finetune_enabled;
    root["finetune_iters"] = cfg.finetune_iters;
    root["apply_gc"] = cfg.apply_gc;
    root["output_dir"] = cfg.output_dir;
    root["emit_stage_trace"] = cfg.emit_stage_trace;
    return root.dump(2);
}

DatasetManifest load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("manifest: cannot open " + path);
    }
    json root;
    try {
        root = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("manifest: invalid JSON: ") + e.what());
    }
    if (!root.is_object() || !root.contains("entries") || !root.at("entries").is_array()) {
        throw ConfigError("manifest: expected an object with an 'entries' array");
    }
    check_keys(root, {"entries"}, "manifest.");

    DatasetManifest manifest;
    std::set<std::string> seen;
    const fs::path base = fs::path(path).parent_path();
    for (const json& row : root.at("entries")) {
        if (!row.is_object()) {
            throw ConfigError("manifest: entries must be objects");
        }
        check_keys(row, {"id", "low_path", "high_path"}, "manifest.entries.");
        ManifestEntry e;
        read_field(row, "id", e.id);
        read_field(row, "low_path", e.low_path);
        read_field(row, "high_path", e.high_path);
        if (e.id.empty() || e.low_path.empty()) {
            throw ConfigError("manifest: every entry needs an id and a low_path");
        }
        if (!seen.insert(e.id).second) {
            throw ConfigError("manifest: duplicate id '" + e.id + "'");
        }
        // Relative paths resolve against the manifest's own directory.
        auto resolve = [&](const std::string& p) {
            return fs::path(p).is_absolute() ? p : (base / p).string();
        };
        e.low_path = resolve(e.low_path);
        if (!fs::exists(e.low_path)) {
            throw IoError("manifest: missing file " + e.low_path);
        }
        if (!e.high_path.empty()) {
            e.high_path = resolve(e.high_path);
            if (!fs::exists(e.high_path)) {
                throw IoError("manifest: missing file " + e.high_path);
            }
        }
        manifest.entries.push_back(std::move(e));
    }
    return manifest;
}

std::string metrics_report_json(const MetricsReport& report) {
    json row{{"psnr", report.psnr},
             {"ssim", report.ssim},
             {"loe", report.loe},
             {"loe_ref", report.loe_ref}};
    for (const auto& [name, value] : report.losses) {
        row[name] = value;
    }
    return row.dump(2);
}

namespace {

// Broadcasts a single plane to a gray color image for PNG output.
ColorImage broadcast_plane(const ImagePlane& p) { return ColorImage(p, p, p); }

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("report: cannot open " + path + " for writing");
    }
    out << text;
    if (!out) {
        throw IoError("report: write failure on " + path);
    }
}

json params_to_json(const AdjustmentParams& p) {
    return json{{"alpha", p.alpha},
                {"illum_gamma_floor", p.illum_gamma_floor},
                {"refl_gain", p.refl_gain},
                {"per_channel_gain",
                 {p.per_channel_gain[0], p.per_channel_gain[1], p.per_channel_gain[2]}}};
}

} // namespace

EnhanceOutputs cmd_enhance(const std::string& input_path, const RunConfig& cfg,
                           const double* alpha_override) {
    cfg.validate();
    const ColorImage I = load_image(input_path);
    const std::vector<DecompositionState> trace = decompose(I, cfg.solver);
    const DecompositionState& final_state = trace.back();

    AdjustmentParams params = cfg.adjustment_init;
    if (alpha_override != nullptr) {
        params.alpha = *alpha_override;
        params.validate();
    }

    LbsMap lbs{ImagePlane(I.height(), I.width(), 0.0)};
    json finetune_report; // stays null when fine-tuning is off
    if (cfg.finetune_enabled) {
        const ColorImage guide = synthesize_guide(I, cfg.guide);
        const FinetuneResult ft = finetune(final_state, I, guide, params, cfg.finetune_iters);
        params = ft.params;
        lbs = lbs_predict(I, guide);
        finetune_report = json{{"iterations", ft.iterations},
                               {"final_loss", ft.loss_trace.back()},
                               {"loss_trace", ft.loss_trace}};
    }

    const ImagePlane L_adj = adjust_illumination(final_state.L, params);
    const ColorImage R_adj = adjust_reflectance(final_state.R, lbs, params);
    const ColorImage enhanced = recompose(R_adj, L_adj);

    fs::create_directories(cfg.output_dir);
    const std::string stem = fs::path(input_path).stem().string();
    const fs::path out_dir(cfg.output_dir);

    EnhanceOutputs outputs;
    outputs.enhanced_path = (out_dir / (stem + "_enhanced.png")).string();
    save_image(enhanced, outputs.enhanced_path);

    if (cfg.emit_stage_trace) {
        const std::string refl = (out_dir / (stem + "_reflectance.png")).string();
        const std::string illum = (out_dir / (stem + "_illumination.png")).string();
        const std::string deficit = (out_dir / (stem + "_deficit.png")).string();
        save_image(clamp_unit(final_state.R), refl);
        save_image(broadcast_plane(clamp_unit(final_state.L)), illum);
        save_image(broadcast_plane(lbs.plane), deficit);
        json stage_trace = json::array();
        for (const DecompositionState& s : trace) {
            stage_trace.push_back(json{{"stage", s.stage},
                                       {"objective", s.objective},
                                       {"safeguard_exhausted", s.safeguard_exhausted}});
        }
        const std::string trace_path = (out_dir / (stem + "_trace.json")).string();
        write_text_file(trace_path, json{{"stages", stage_trace}}.dump(2));
        outputs.extra_paths = {refl, illum, deficit, trace_path};
    }

    const bool any_exhausted =
        std::any_of(trace.begin(), trace.end(),
                    [](const DecompositionState& s) { return s.safeguard_exhausted; });
    json report{{"input_path", input_path},
                {"enhanced_path", outputs.enhanced_path},
                {"alpha", params.alpha},
                {"params", params_to_json(params)},
                {"stages", cfg.solver.stages},
                {"objective_initial", trace.front().objective},
                {"objective_final", final_state.objective},
                {"safeguard_exhausted", any_exhausted},
                {"mean_luma_input", mean(to_gray(I))},
                {"mean_luma_output", mean(to_gray(enhanced))},
                {"finetune", finetune_report}};
    outputs.report_path = (out_dir / (stem + "_report.json")).string();
    write_text_file(outputs.report_path, report.dump(2));
    return outputs;
}

namespace {

// Runs one manifest entry through the pipeline and fills a flat JSON row.
json benchmark_entry(const ManifestEntry& entry, const RunConfig& cfg) {
    const ColorImage low = load_image(entry.low_path);
    const std::vector<DecompositionState> trace_l = decompose(low, cfg.solver);
    const DecompositionState& dec_l = trace_l.back();

    json row{{"id", entry.id}};
    if (!entry.high_path.empty()) {
        // Paired protocol: brightness amount and deficit map come from the
        // groundtruth reference.
        const ColorImage high = load_image(entry.high_path);
        const std::vector<DecompositionState> trace_h = decompose(high, cfg.solver);
        const DecompositionState& dec_h = trace_h.back();

        AdjustmentParams params = cfg.adjustment_init;
        params.alpha = estimate_alpha(low, high);
        const LbsMap lbs = lbs_predict(low, high);
        const ColorImage enhanced =
            recompose(adjust_reflectance(dec_l.R, lbs, params),
                      adjust_illumination(dec_l.L, params));

        row["alpha"] = params.alpha;
        row["psnr"] = psnr(enhanced, high);
        row["ssim"] = ssim(enhanced, high);
        row["loe"] = loe(enhanced, low);
        row["loe_ref"] = loe(enhanced, high);
        row["loss_reconstruction"] = loss_reconstruction(dec_l.R, dec_l.L, low);
        row["loss_reflectance_consistency"] = loss_reflectance_consistency(dec_l.R, dec_h.R);
        row["loss_illumination_smooth"] =
            loss_illumination_smooth(dec_l.L, dec_h.L, low, cfg.weights);
        row["loss_enhancement"] = loss_enhancement(enhanced, high);
        row["loss_color_angle"] = loss_color_angle(enhanced, high);
        if (cfg.apply_gc) {
            const ColorImage gc = gamma_correct(enhanced, auto_gc_exponent(enhanced));
            row["psnr_gc"] = psnr(gc, high);
            row["ssim_gc"] = ssim(gc, high);
            row["loe_gc"] = loe(gc, low);
            row["loe_ref_gc"] = loe(gc, high);
        }
    } else {
        // Unpaired protocol: fine-tune against a synthesized reference and
        // judge lightness-order fidelity against the input.
        const ColorImage guide = synthesize_guide(low, cfg.guide);
        const FinetuneResult ft =
            finetune(dec_l, low, guide, cfg.adjustment_init, cfg.finetune_iters);
        const LbsMap lbs = lbs_predict(low, guide);
        const ColorImage enhanced =
            recompose(adjust_reflectance(dec_l.R, lbs, ft.params),
                      adjust_illumination(dec_l.L, ft.params));

        row["alpha"] = ft.params.alpha;
        row["loe"] = loe(enhanced, low);
        row["loss_reconstruction"] = loss_reconstruction(dec_l.R, dec_l.L, low);
        row["finetune_final_loss"] = ft.loss_trace.back();
        row["finetune_loss_trace"] = ft.loss_trace;
        if (cfg.apply_gc) {
            const ColorImage gc = gamma_correct(enhanced, auto_gc_exponent(enhanced));
            row["loe_gc"] = loe(gc, low);
        }
    }
    return row;
}

} // namespace

std::string cmd_benchmark(const DatasetManifest& manifest, const RunConfig& cfg,
                          const std::string& report_path) {
    cfg.validate();
    if (manifest.entries.empty()) {
        throw ConfigError("benchmark: empty manifest, nothing to benchmark");
    }

    // Entries are independent; process them on a small worker pool. Each
    // worker writes only its own slot, so the report order is deterministic.
    std::vector<json> rows(manifest.entries.size());
    std::atomic<std::size_t> next{0};
    const unsigned workers = std::max(
        1u, std::min({static_cast<unsigned>(manifest.entries.size()),
                      std::thread::hardware_concurrency(), 8u}));
    auto work = [&]() {
        for (std::size_t i = next.fetch_add(1); i < manifest.entries.size();
             i = next.fetch_add(1)) {
            try {
                rows[i] = benchmark_entry(manifest.entries[i], cfg);
            } catch (const std::exception& e) {
                rows[i] = json{{"id", manifest.entries[i].id}, {"error", e.what()}};
            }
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned t = 0; t < workers; ++t) pool.emplace_back(work);
        for (std::thread& t : pool) t.join();
    }

    // Mean row: arithmetic mean of every scalar metric over the rows that
    // carry it; failed rows contribute nothing.
    std::map<std::string, std::pair<double, int>> sums;
    for (const json& row : rows) {
        if (row.contains("error")) continue;
        for (auto it = row.begin(); it != row.end(); ++it) {
            if (it.key() == "id" || !it.value().is_number()) continue;
            auto& [sum, count] = sums[it.key()];
            sum += it.value().get<double>();
            count += 1;
        }
    }
    json mean_row{{"id", "mean"}};
    for (const auto& [key, agg] : sums) {
        mean_row[key] = agg.first / agg.second;
    }

    json report{{"rows", json::array()}, {"mean", mean_row}};
    for (json& row : rows) report["rows"].push_back(std::move(row));
    write_text_file(report_path, report.dump(2));
    return report_path;
}

} // namespace relight
