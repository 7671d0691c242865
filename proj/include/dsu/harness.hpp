#pragma once

#include <string>
#include <vector>

#include "dsu/metrics.hpp"
#include "dsu/synth.hpp"
#include "dsu/trainer.hpp"

namespace dsu {

// Defaults -> optional file -> key=value overrides, with unknown keys
// rejected up front.
Config resolve_config(const std::string& config_path,
                      const std::vector<std::string>& overrides);

SynthSpec synth_spec_from_config(const Config& cfg);

// Fills <data>/pseudo: depth-prior fallback when absent, optional CRF
// filtering of supplied labels when init.crf is set.
int init_labels(const std::string& data_dir, const Config& cfg);

struct PipelineResult {
    std::vector<RoundReport> reports;
    std::string checkpoint_path;
    std::string report_csv_path;
    std::string labels_csv_path;
};

// The full training command: ingest, optional initial CRF filtering, train
// for cfg rounds with end-of-round label updates, export labels per round,
// write the round report and final checkpoint.
PipelineResult run_train_pipeline(const std::string& data_dir, const std::string& out_dir,
                                  const Config& cfg);

// One label-update pass from a checkpoint; writes updated labels + manifest.
int run_update_labels(const std::string& data_dir, const std::string& checkpoint,
                      const std::string& out_dir, const Config& cfg);

struct EvalRow {
    std::string id;
    MetricsReport metrics;
};

struct EvalResult {
    std::vector<EvalRow> rows;
    MetricsReport aggregate; // per-metric means over images (f_curve unused)
};

// Saliency-map quality against ground truth; predictions either from a
// checkpoint (network inference on rgb) or from a directory of maps.
EvalResult evaluate_checkpoint(const std::string& data_dir, const std::string& checkpoint,
                               const Config& cfg);
EvalResult evaluate_maps(const std::string& data_dir, const std::string& maps_dir);

std::string eval_csv(const EvalResult& result);

} // namespace dsu
