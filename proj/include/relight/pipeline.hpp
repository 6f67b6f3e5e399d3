#pragma once

#include <string>
#include <vector>

#include "relight/adjust.hpp"
#include "relight/finetune.hpp"
#include "relight/guide.hpp"
#include "relight/image.hpp"
#include "relight/metrics.hpp"
#include "relight/solver.hpp"

namespace relight {

// Everything one run needs, composed from the per-module configs.
struct RunConfig {
    SolverConfig solver;
    LossWeights weights;
    GuideConfig guide;
    AdjustmentParams adjustment_init;
    bool finetune_enabled = false;
    int finetune_iters = 30;
    bool apply_gc = false;
    std::string output_dir = ".";
    bool emit_stage_trace = false;

    void validate() const;
};

// Parses a JSON document whose keys mirror RunConfig's field names. Absent
// keys keep their defaults; unknown keys raise ConfigError so typos cannot
// silently fall back to defaults.
RunConfig parse_run_config(const std::string& json_text);

// Reads and parses a config file; IoError if unreadable.
RunConfig load_run_config(const std::string& path);

// Serializes the full config (defaults included) back to JSON.
std::string run_config_to_json(const RunConfig& cfg);

// One dataset row: a low-light image, optionally its normal-light pair.
struct ManifestEntry {
    std::string id;
    std::string low_path;
    std::string high_path; // empty when the entry is unpaired
};

struct DatasetManifest {
    std::vector<ManifestEntry> entries;
};

// Loads {"entries": [{"id", "low_path", "high_path"?}, ...]}, checking that
// ids are unique and every referenced file exists.
DatasetManifest load_manifest(const std::string& path);

// Files written by one enhance run.
struct EnhanceOutputs {
    std::string enhanced_path;
    std::string report_path;
    std::vector<std::string> extra_paths;
};

// Full enhancement pipeline on one image: decompose, optionally fine-tune
// against a synthesized reference, adjust, recompose, write the enhanced PNG
// and a JSON report (plus decomposition extras when emit_stage_trace is set).
// alpha_override, when non-null, replaces the configured starting alpha.
// Deterministic: identical inputs and config yield byte-identical files.
EnhanceOutputs cmd_enhance(const std::string& input_path, const RunConfig& cfg,
                           const double* alpha_override);

// Evaluates every manifest entry — paired entries against their reference
// with alpha from estimate_alpha, unpaired entries via fine-tuning against a
// synthesized reference — and writes one JSON report with per-image rows and
// a mean row. Per-entry failures are recorded in their row and the run
// continues. Returns the report path.
std::string cmd_benchmark(const DatasetManifest& manifest, const RunConfig& cfg,
                          const std::string& report_path);

// Flat snake_case JSON object for one image's numbers.
std::string metrics_report_json(const MetricsReport& report);

} // namespace relight
