#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "dsu/harness.hpp"
#include "dsu/image_io.hpp"

namespace {

struct CommonOpts {
    std::string config_path;
    std::vector<std::string> overrides;
    std::int64_t seed = -1;

    dsu::Config resolve() const {
        dsu::Config cfg = dsu::resolve_config(config_path, overrides);
        if (seed >= 0) cfg.set("seed", std::to_string(seed));
        return cfg;
    }
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "config file (key = value lines)");
    cmd->add_option("--set", opts.overrides, "override a config key, e.g. --set rounds=2")
        ->take_all();
    cmd->add_option("--seed", opts.seed, "override the root seed");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"depth-disentangled saliency update pipeline (desk scale)"};
    app.require_subcommand(1);

    CommonOpts synth_opts, init_opts, train_opts, update_opts, eval_opts;
    std::string synth_out, init_data, train_data, train_out, update_data, update_ckpt,
        update_out, eval_data, eval_ckpt, eval_maps, eval_out;

    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic RGB-D corpus");
    synth->add_option("--out", synth_out, "output directory")->required();
    add_common(synth, synth_opts);

    CLI::App* init = app.add_subcommand("init-labels", "create or filter initial pseudo-labels");
    init->add_option("--data", init_data, "dataset root (rgb/, depth/, optional pseudo/)")
        ->required();
    add_common(init, init_opts);

    CLI::App* train = app.add_subcommand("train", "train with end-of-round label updates");
    train->add_option("--data", train_data, "dataset root (rgb/, depth/, pseudo/)")->required();
    train->add_option("--out", train_out, "output directory")->required();
    add_common(train, train_opts);

    CLI::App* update = app.add_subcommand("update-labels", "one label-update pass");
    update->add_option("--data", update_data, "dataset root")->required();
    update->add_option("--checkpoint", update_ckpt, "model checkpoint")->required();
    update->add_option("--out", update_out, "output directory")->required();
    add_common(update, update_opts);

    CLI::App* eval = app.add_subcommand("eval", "score saliency maps against ground truth");
    eval->add_option("--data", eval_data, "dataset root with gt/")->required();
    eval->add_option("--checkpoint", eval_ckpt, "model checkpoint to run");
    eval->add_option("--maps", eval_maps, "directory of precomputed maps");
    eval->add_option("--out", eval_out, "CSV output path")->required();
    add_common(eval, eval_opts);

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) {
            const dsu::Config cfg = synth_opts.resolve();
            const dsu::SynthSpec spec = dsu::synth_spec_from_config(cfg);
            const dsu::SynthSummary sum = dsu::synth_generate(spec, synth_out);
            std::printf("wrote %d train + %d eval samples to %s (mean corruption MAE %.4f)\n",
                        sum.train_count, sum.eval_count, synth_out.c_str(),
                        sum.mean_corruption_mae);
        } else if (init->parsed()) {
            const int n = dsu::init_labels(init_data, init_opts.resolve());
            std::printf("wrote %d pseudo-labels under %s/pseudo\n", n, init_data.c_str());
        } else if (train->parsed()) {
            const dsu::PipelineResult res =
                dsu::run_train_pipeline(train_data, train_out, train_opts.resolve());
            std::printf("trained %zu rounds; checkpoint %s\n", res.reports.size(),
                        res.checkpoint_path.c_str());
            for (const dsu::RoundReport& r : res.reports)
                if (r.label_mae_after)
                    std::printf("  round %d pseudo-label MAE %.4f -> %.4f\n", r.round,
                                r.label_mae_before.value_or(0.0), *r.label_mae_after);
        } else if (update->parsed()) {
            const int n = dsu::run_update_labels(update_data, update_ckpt, update_out,
                                                 update_opts.resolve());
            std::printf("updated %d pseudo-labels into %s\n", n, update_out.c_str());
        } else if (eval->parsed()) {
            if (eval_ckpt.empty() == eval_maps.empty())
                throw dsu::UsageError("eval: pass exactly one of --checkpoint or --maps");
            const dsu::EvalResult res =
                eval_ckpt.empty() ? dsu::evaluate_maps(eval_data, eval_maps)
                                  : dsu::evaluate_checkpoint(eval_data, eval_ckpt,
                                                             eval_opts.resolve());
            dsu::atomic_write_file(eval_out, dsu::eval_csv(res));
            std::printf("evaluated %zu samples: MAE %.4f  Fmax %.4f  Fmean %.4f  wF %.4f  "
                        "E %.4f\n",
                        res.rows.size(), res.aggregate.mae, res.aggregate.f_max,
                        res.aggregate.f_mean, res.aggregate.f_weighted,
                        res.aggregate.e_measure);
        }
    } catch (const dsu::UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const dsu::NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 3;
    } catch (const dsu::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
