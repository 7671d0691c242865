#include "dsu/trainer.hpp"

#include <cmath>
#include <cstdio>

#include "dsu/field_ops.hpp"
#include "dsu/losses.hpp"

namespace dsu {

TrainConfig TrainConfig::from_config(const Config& cfg) {
    TrainConfig t;
    t.size = static_cast<int>(cfg.get_int("size", t.size));
    t.channels = static_cast<int>(cfg.get_int("channels", t.channels));
    t.tau = static_cast<int>(cfg.get_int("tau", t.tau));
    t.rounds = static_cast<int>(cfg.get_int("rounds", t.rounds));
    t.batch = static_cast<int>(cfg.get_int("batch", t.batch));
    t.lr = cfg.get_double("lr", t.lr);
    t.seed = static_cast<std::uint64_t>(cfg.get_int("seed", static_cast<std::int64_t>(t.seed)));
    t.ats = cfg.get_bool("ats", t.ats);
    t.dlu = cfg.get_bool("dlu", t.dlu);
    t.flip = cfg.get_bool("flip", t.flip);
    t.ha_size = static_cast<int>(cfg.get_int("ha.size", t.ha_size));
    t.ha_sigma = static_cast<float>(cfg.get_double("ha.sigma", t.ha_sigma));
    t.lambda = cfg.get_double("lambda", t.lambda);
    const std::string cons = cfg.get_string("consistency", "l1");
    if (cons == "l1") t.consistency = ConsistencyMode::L1;
    else if (cons == "l2") t.consistency = ConsistencyMode::L2;
    else throw UsageError("config key consistency: expected l1 or l2, got " + cons);
    t.crf.w_app = static_cast<float>(cfg.get_double("crf.w_app", t.crf.w_app));
    t.crf.theta_alpha = static_cast<float>(cfg.get_double("crf.theta_alpha", t.crf.theta_alpha));
    t.crf.theta_beta = static_cast<float>(cfg.get_double("crf.theta_beta", t.crf.theta_beta));
    t.crf.w_smooth = static_cast<float>(cfg.get_double("crf.w_smooth", t.crf.w_smooth));
    t.crf.theta_gamma = static_cast<float>(cfg.get_double("crf.theta_gamma", t.crf.theta_gamma));
    t.crf.iterations = static_cast<int>(cfg.get_int("crf.iterations", t.crf.iterations));
    t.crf.binarize = cfg.get_bool("crf.binarize", t.crf.binarize);
    t.crf.window = static_cast<int>(cfg.get_int("crf.window", t.crf.window));
    t.init_crf = cfg.get_bool("init.crf", t.init_crf);
    t.invert_depth = cfg.get_bool("depth.invert", t.invert_depth);
    if (t.tau < 1) throw UsageError("tau must be >= 1");
    if (t.batch < 1) throw UsageError("batch must be >= 1");
    if (t.rounds < 0) throw UsageError("rounds must be >= 0");
    return t;
}

Models::Models(const TrainConfig& cfg, std::uint64_t seed) {
    Rng init = named_stream(seed, "init");
    saliency = SaliencyNet(params, "sal", cfg.channels, init);
    depth = DepthModel(params, cfg.channels, cfg.ha_size, cfg.ha_sigma, init);
}

ScalarField predict_saliency(Models& models, const RgbImage& rgb) {
    Tensor4 x = rgb_to_tensor(rgb);
    Tensor4 pred = models.saliency.forward(x, /*train=*/false);
    return slice_field(pred, 0, 0);
}

Trainer::Trainer(Models& models, std::vector<TrainSample> corpus, const TrainConfig& cfg)
    : models_(models), corpus_(std::move(corpus)), cfg_(cfg),
      opt_sal_(models.params.trainable_with_prefix("sal."), cfg.lr),
      opt_depth_({}, cfg.lr) {
    // depth group: everything that is not the saliency network
    std::vector<Param*> depth_params;
    for (const auto& p : models.params.all())
        if (p->trainable && p->name.rfind("sal.", 0) != 0) depth_params.push_back(p.get());
    opt_depth_ = Adam(std::move(depth_params), cfg.lr);

    if (corpus_.empty()) throw DataError("trainer: empty corpus");
    for (const auto& s : corpus_) store_.insert(s.id, s.pseudo);
}

double Trainer::mean_label_score() const {
    double sum = 0.0;
    for (const auto& s : corpus_) sum += scorer_(s.id, store_.label(s.id));
    return sum / static_cast<double>(corpus_.size());
}

std::vector<UpdateRecord> Trainer::dlu_pass() {
    for (const auto& s : corpus_) {
        UpdateRecord rec =
            update_pseudo_label(s.id, s.rgb, models_.saliency, models_.depth, cfg_.crf, store_);
        store_.stage(std::move(rec));
    }
    return store_.commit_round();
}

RoundReport Trainer::train_round(int round_index) {
    RoundReport report;
    report.round = round_index;
    if (scorer_) report.label_mae_before = mean_label_score();

    const int H = cfg_.size, W = cfg_.size;
    for (int epoch = 1; epoch <= 2 * cfg_.tau; ++epoch) {
        const TrainStep step = epoch <= cfg_.tau ? TrainStep::One : TrainStep::Two;

        std::vector<int> order(corpus_.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
        Rng shuffle_rng = named_stream(cfg_.seed, "trainer/shuffle",
                                       static_cast<std::uint64_t>(round_index),
                                       static_cast<std::uint64_t>(epoch));
        shuffle_rng.shuffle(order);
        Rng flip_rng = named_stream(cfg_.seed, "trainer/flip",
                                    static_cast<std::uint64_t>(round_index),
                                    static_cast<std::uint64_t>(epoch));

        double epoch_sal = 0.0;
        DepthLossBreakdown epoch_depth;
        epoch_depth.lambda = cfg_.lambda;
        int batches = 0;

        // chunk boundaries; a lone trailing sample joins the previous batch
        // because step-two weights are degenerate at N=1
        std::vector<std::pair<std::size_t, int>> chunks;
        for (std::size_t pos = 0; pos < order.size(); pos += cfg_.batch) {
            const int n = static_cast<int>(std::min<std::size_t>(cfg_.batch, order.size() - pos));
            chunks.emplace_back(pos, n);
        }
        if (chunks.size() > 1 && chunks.back().second == 1) {
            chunks.pop_back();
            chunks.back().second += 1;
        }

        for (const auto& [pos, n] : chunks) {
            Tensor4 rgb(n, 3, H, W);
            Tensor4 labels(n, 1, H, W);
            std::vector<ScalarField> dmaps(n);
            for (int b = 0; b < n; ++b) {
                const TrainSample& s = corpus_[order[pos + b]];
                const bool flip = cfg_.flip && flip_rng.coin();
                RgbImage img = flip ? flip_horizontal(s.rgb) : s.rgb;
                for (int c = 0; c < 3; ++c) {
                    float* p = rgb.plane(b, c);
                    for (std::size_t i = 0; i < img.pixels(); ++i) p[i] = img.plane[c][i];
                }
                const ScalarField& lbl = store_.label(s.id);
                set_slice(labels, b, 0, flip ? flip_horizontal(lbl) : lbl);
                dmaps[b] = flip ? flip_horizontal(s.depth) : s.depth;
            }

            models_.params.zero_grads();

            // saliency group
            Tensor4 pred = models_.saliency.forward(rgb, /*train=*/true);
            const std::vector<double> l_n = bce_per_sample(pred, labels);
            const AttentiveWeights w =
                attentive_weights(l_n, cfg_.ats ? step : TrainStep::One);
            const double l_sal = attentive_bce(l_n, w);
            models_.saliency.backward(bce_grad(pred, labels, attentive_coefficients(w)));
            opt_sal_.step();

            // depth group, masks from this batch's live predictions
            DepthBatch db;
            db.rgb = rgb;
            db.d_map = std::move(dmaps);
            db.sal_pred.resize(n);
            for (int b = 0; b < n; ++b) db.sal_pred[b] = slice_field(pred, b, 0);
            const DepthLossBreakdown bd = depth_objective(
                models_.depth, db, {cfg_.lambda, cfg_.consistency}, /*train=*/true,
                /*backprop=*/true);
            opt_depth_.step();

            if (!std::isfinite(l_sal) || !std::isfinite(bd.total()))
                throw NumericError("non-finite loss at round " + std::to_string(round_index) +
                                   " epoch " + std::to_string(epoch) + " batch " +
                                   std::to_string(batches));

            epoch_sal += l_sal;
            epoch_depth.l_d1 += bd.l_d1;
            epoch_depth.l_d2 += bd.l_d2;
            epoch_depth.l_sal += bd.l_sal;
            epoch_depth.l_nonsal += bd.l_nonsal;
            epoch_depth.l_con += bd.l_con;
            ++batches;
        }

        EpochReport er;
        er.round = round_index;
        er.epoch = epoch;
        er.step = step;
        er.mean_sal_bce = epoch_sal / batches;
        er.mean_depth = epoch_depth;
        er.mean_depth.l_d1 /= batches;
        er.mean_depth.l_d2 /= batches;
        er.mean_depth.l_sal /= batches;
        er.mean_depth.l_nonsal /= batches;
        er.mean_depth.l_con /= batches;
        report.epochs.push_back(er);
    }

    if (cfg_.dlu) report.updates = dlu_pass();
    if (scorer_) report.label_mae_after = mean_label_score();
    return report;
}

std::vector<RoundReport> Trainer::run(const LabelScorer& scorer) {
    if (scorer) scorer_ = scorer;
    std::vector<RoundReport> out;
    for (int r = 1; r <= cfg_.rounds; ++r) out.push_back(train_round(r));
    return out;
}

std::string round_report_csv(const std::vector<RoundReport>& rounds) {
    std::string csv = "round,epoch,step,loss_sal,depth_total,depth_l_d1,depth_l_d2,"
                      "depth_l_sal,depth_l_nonsal,depth_l_con,label_mae\n";
    char row[320];
    for (const RoundReport& r : rounds) {
        for (const EpochReport& e : r.epochs) {
            const double lm = r.label_mae_before.value_or(std::nan(""));
            std::snprintf(row, sizeof(row), "%d,%d,%s,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n",
                          e.round, e.epoch, e.step == TrainStep::One ? "one" : "two",
                          e.mean_sal_bce, e.mean_depth.total(), e.mean_depth.l_d1,
                          e.mean_depth.l_d2, e.mean_depth.l_sal, e.mean_depth.l_nonsal,
                          e.mean_depth.l_con, lm);
            csv += row;
        }
        if (r.label_mae_after) {
            std::snprintf(row, sizeof(row), "%d,end,,,,,,,,,%.9g\n", r.round,
                          *r.label_mae_after);
            csv += row;
        }
    }
    return csv;
}

} // namespace dsu
