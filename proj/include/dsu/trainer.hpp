#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dsu/adam.hpp"
#include "dsu/attentive.hpp"
#include "dsu/config.hpp"
#include "dsu/dlu.hpp"
#include "dsu/manifest.hpp"

namespace dsu {

struct TrainConfig {
    int size = 64;
    int channels = 16;
    int tau = 3;    // a round is 2*tau epochs: step one then step two
    int rounds = 4;
    int batch = 4;
    double lr = 4e-3; // desk-scale; the full-scale nominal is 1e-4
    std::uint64_t seed = 42;
    bool ats = true;  // false = uniform weights in both steps
    bool dlu = true;  // false = pseudo-labels never change
    bool flip = true; // horizontal-flip augmentation
    int ha_size = 6;
    float ha_sigma = 0.75f;
    double lambda = 0.02;
    ConsistencyMode consistency = ConsistencyMode::L1;
    CrfParams crf;
    bool init_crf = false;
    bool invert_depth = false;

    static TrainConfig from_config(const Config& cfg);
};

// The trainable networks plus their shared parameter store. Parameters with
// the "sal." prefix form the saliency group; everything else belongs to the
// depth group.
struct Models {
    ParamSet params;
    SaliencyNet saliency;
    DepthModel depth;

    Models(const TrainConfig& cfg, std::uint64_t seed);
};

ScalarField predict_saliency(Models& models, const RgbImage& rgb);

struct EpochReport {
    int round = 0;
    int epoch = 0; // 1-based within the round
    TrainStep step = TrainStep::One;
    double mean_sal_bce = 0.0;
    DepthLossBreakdown mean_depth;
};

struct RoundReport {
    int round = 0;
    std::vector<EpochReport> epochs;
    std::vector<UpdateRecord> updates;          // empty when DLU is off
    std::optional<double> label_mae_before;     // only when a scorer is given
    std::optional<double> label_mae_after;
};

// Evaluation-only annotation hook: maps (sample id, current label) to a
// score. Keeps ground truth out of the trainer entirely.
using LabelScorer = std::function<double(const std::string&, const ScalarField&)>;

class Trainer {
public:
    Trainer(Models& models, std::vector<TrainSample> corpus, const TrainConfig& cfg);

    // One training round: tau epochs with uniform weights, tau epochs with
    // attentive weights, one label update at the end.
    RoundReport train_round(int round_index);
    std::vector<RoundReport> run(const LabelScorer& scorer = nullptr);

    PseudoLabelStore& store() { return store_; }
    const std::vector<TrainSample>& corpus() const { return corpus_; }
    long sal_steps() const { return opt_sal_.step_count(); }
    long depth_steps() const { return opt_depth_.step_count(); }
    void set_label_scorer(const LabelScorer& scorer) { scorer_ = scorer; }

    std::vector<UpdateRecord> dlu_pass(); // stages + commits one update for every sample

private:
    Models& models_;
    std::vector<TrainSample> corpus_;
    TrainConfig cfg_;
    PseudoLabelStore store_;
    Adam opt_sal_;
    Adam opt_depth_;
    LabelScorer scorer_;

    double mean_label_score() const;
};

std::string round_report_csv(const std::vector<RoundReport>& rounds);

} // namespace dsu
