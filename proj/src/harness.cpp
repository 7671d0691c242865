#include "dsu/harness.hpp"

#include <cstdio>
#include <filesystem>
#include <map>
#include <memory>

#include "dsu/checkpoint.hpp"
#include "dsu/densecrf.hpp"
#include "dsu/depth_prior.hpp"
#include "dsu/field_ops.hpp"
#include "dsu/image_io.hpp"

namespace fs = std::filesystem;

namespace dsu {

namespace {

std::vector<std::string> known_keys() {
    std::vector<std::string> keys;
    for (const auto& [k, v] : default_config_keys()) {
        (void)v;
        keys.push_back(k);
    }
    return keys;
}

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

} // namespace

Config resolve_config(const std::string& config_path, const std::vector<std::string>& overrides) {
    Config cfg;
    for (const auto& [k, v] : default_config_keys()) cfg.set(k, v);
    if (!config_path.empty()) {
        const Config file_cfg = Config::parse_file(config_path);
        file_cfg.validate_keys(known_keys());
        for (const auto& [k, v] : file_cfg.entries()) cfg.set(k, v);
    }
    for (const std::string& kv : overrides) {
        const std::size_t eq = kv.find('=');
        if (eq == std::string::npos) throw UsageError("override must be key=value: " + kv);
        const Config one = Config::parse_text(kv);
        one.validate_keys(known_keys());
        for (const auto& [k, v] : one.entries()) cfg.set(k, v);
    }
    return cfg;
}

SynthSpec synth_spec_from_config(const Config& cfg) {
    SynthSpec spec;
    spec.size = static_cast<int>(cfg.get_int("size", spec.size));
    spec.count = static_cast<int>(cfg.get_int("synth.count", spec.count));
    spec.train_frac = cfg.get_double("synth.train_frac", spec.train_frac);
    spec.objects_min = static_cast<int>(cfg.get_int("synth.objects_min", spec.objects_min));
    spec.objects_max = static_cast<int>(cfg.get_int("synth.objects_max", spec.objects_max));
    spec.depth_separation = cfg.get_double("synth.depth_sep", spec.depth_separation);
    spec.corruption_mae = cfg.get_double("synth.corruption_mae", spec.corruption_mae);
    spec.seed = static_cast<std::uint64_t>(cfg.get_int("seed", 42));
    return spec;
}

int init_labels(const std::string& data_dir, const Config& cfg) {
    const TrainConfig tc = TrainConfig::from_config(cfg);
    const DatasetManifest m = ingest(data_dir);
    fs::create_directories(fs::path(data_dir) / "pseudo");
    int written = 0;
    for (const auto& s : m.samples) {
        ScalarField label;
        if (s.pseudo_path.empty()) {
            const ScalarField depth = load_gray(s.depth_path, tc.invert_depth);
            label = simple_depth_prior_init(depth);
        } else if (tc.init_crf) {
            const RgbImage rgb = load_rgb(s.rgb_path);
            label = densecrf_refine(rgb, load_gray(s.pseudo_path), tc.crf);
        } else {
            continue; // supplied labels pass through untouched
        }
        const std::string out =
            (fs::path(data_dir) / "pseudo" / (s.id + ".pgm")).string();
        save_gray(out, label);
        ++written;
    }
    return written;
}

namespace {

// Evaluation-side scorer; the trainer only ever sees the closure.
LabelScorer make_gt_scorer(const DatasetManifest& manifest, int size) {
    if (!manifest.has_gt()) return nullptr;
    auto cache = std::make_shared<std::map<std::string, ScalarField>>();
    return [&manifest, size, cache](const std::string& id, const ScalarField& label) {
        auto it = cache->find(id);
        if (it == cache->end())
            it = cache->emplace(id, manifest.load_gt_resized(id, size)).first;
        return mae(label, it->second);
    };
}

// Source dimensions per sample id; label updates run at network resolution
// and get upsampled back only here, at export time.
using DimsMap = std::map<std::string, std::pair<int, int>>;

DimsMap source_dims(const DatasetManifest& manifest) {
    DimsMap dims;
    for (const auto& s : manifest.samples) {
        const ScalarField d = load_gray(s.depth_path);
        dims[s.id] = {d.width, d.height};
    }
    return dims;
}

void export_labels(const std::string& out_dir, int round, const PseudoLabelStore& store,
                   const std::vector<std::string>& ids, const DimsMap& dims,
                   const LabelScorer& scorer, std::string& labels_csv) {
    const std::string rel = "labels/round_" + std::to_string(round);
    fs::create_directories(fs::path(out_dir) / rel);
    for (const std::string& id : ids) {
        // the manifest stores paths relative to the output root so runs are
        // relocatable (and byte-identical across output directories)
        const std::string rel_path = rel + "/" + id + ".pgm";
        const ScalarField& label = store.label(id);
        const auto [sw, sh] = dims.at(id);
        const ScalarField out = (label.width == sw && label.height == sh)
                                    ? label
                                    : resize_bilinear(label, sw, sh);
        save_gray((fs::path(out_dir) / rel_path).string(), out);
        labels_csv += id + "," + std::to_string(round) + "," + rel_path;
        labels_csv += scorer ? "," + fmt(scorer(id, store.label(id))) : ",";
        labels_csv += '\n';
    }
}

} // namespace

PipelineResult run_train_pipeline(const std::string& data_dir, const std::string& out_dir,
                                  const Config& cfg) {
    const TrainConfig tc = TrainConfig::from_config(cfg);
    fs::create_directories(out_dir);

    const DatasetManifest manifest = ingest(data_dir);
    std::vector<TrainSample> corpus = manifest.load_training(tc.size, tc.invert_depth);
    if (tc.init_crf)
        for (TrainSample& s : corpus) s.pseudo = densecrf_refine(s.rgb, s.pseudo, tc.crf);

    Models models(tc, tc.seed);
    Trainer trainer(models, std::move(corpus), tc);
    const LabelScorer scorer = make_gt_scorer(manifest, tc.size);
    trainer.set_label_scorer(scorer);

    const DimsMap dims = source_dims(manifest);
    std::string labels_csv = "id,round,path,mae\n";
    std::vector<std::string> ids = trainer.store().ids();
    export_labels(out_dir, 0, trainer.store(), ids, dims, scorer, labels_csv);

    PipelineResult result;
    for (int r = 1; r <= tc.rounds; ++r) {
        result.reports.push_back(trainer.train_round(r));
        if (tc.dlu) export_labels(out_dir, r, trainer.store(), ids, dims, scorer, labels_csv);
    }

    result.checkpoint_path = (fs::path(out_dir) / "checkpoint.dsu").string();
    save_checkpoint(result.checkpoint_path, models.params, trainer.sal_steps(),
                    trainer.depth_steps());
    result.report_csv_path = (fs::path(out_dir) / "report.csv").string();
    atomic_write_file(result.report_csv_path, round_report_csv(result.reports));
    result.labels_csv_path = (fs::path(out_dir) / "labels.csv").string();
    atomic_write_file(result.labels_csv_path, labels_csv);
    atomic_write_file((fs::path(out_dir) / "config.txt").string(), cfg.emit());
    return result;
}

int run_update_labels(const std::string& data_dir, const std::string& checkpoint,
                      const std::string& out_dir, const Config& cfg) {
    const TrainConfig tc = TrainConfig::from_config(cfg);
    fs::create_directories(out_dir);
    const DatasetManifest manifest = ingest(data_dir);
    std::vector<TrainSample> corpus = manifest.load_training(tc.size, tc.invert_depth);

    Models models(tc, tc.seed);
    load_checkpoint(checkpoint, models.params);
    Trainer trainer(models, std::move(corpus), tc);
    const LabelScorer scorer = make_gt_scorer(manifest, tc.size);

    trainer.dlu_pass();
    std::string labels_csv = "id,round,path,mae\n";
    export_labels(out_dir, 1, trainer.store(), trainer.store().ids(), source_dims(manifest),
                  scorer, labels_csv);
    atomic_write_file((fs::path(out_dir) / "labels.csv").string(), labels_csv);
    return static_cast<int>(trainer.store().ids().size());
}

namespace {

EvalResult finish_eval(std::vector<EvalRow> rows) {
    EvalResult r;
    r.rows = std::move(rows);
    if (r.rows.empty()) throw DataError("eval: no samples");
    for (const EvalRow& row : r.rows) {
        r.aggregate.mae += row.metrics.mae;
        r.aggregate.f_max += row.metrics.f_max;
        r.aggregate.f_mean += row.metrics.f_mean;
        r.aggregate.f_weighted += row.metrics.f_weighted;
        r.aggregate.e_measure += row.metrics.e_measure;
    }
    const double n = static_cast<double>(r.rows.size());
    r.aggregate.mae /= n;
    r.aggregate.f_max /= n;
    r.aggregate.f_mean /= n;
    r.aggregate.f_weighted /= n;
    r.aggregate.e_measure /= n;
    return r;
}

ScalarField to_gt_size(ScalarField pred, const ScalarField& gt) {
    if (pred.width == gt.width && pred.height == gt.height) return pred;
    return resize_bilinear(pred, gt.width, gt.height);
}

} // namespace

EvalResult evaluate_checkpoint(const std::string& data_dir, const std::string& checkpoint,
                               const Config& cfg) {
    const TrainConfig tc = TrainConfig::from_config(cfg);
    const DatasetManifest manifest = ingest(data_dir);
    if (!manifest.has_gt()) throw DataError("eval: dataset has no ground truth");

    Models models(tc, tc.seed);
    load_checkpoint(checkpoint, models.params);

    std::vector<EvalRow> rows;
    for (const auto& s : manifest.samples) {
        const RgbImage rgb = resize_bilinear(load_rgb(s.rgb_path), tc.size, tc.size);
        const ScalarField gt = manifest.load_gt(s.id);
        const ScalarField pred = to_gt_size(predict_saliency(models, rgb), gt);
        rows.push_back({s.id, evaluate_pair(pred, gt)});
    }
    return finish_eval(std::move(rows));
}

EvalResult evaluate_maps(const std::string& data_dir, const std::string& maps_dir) {
    const DatasetManifest manifest = ingest(data_dir);
    if (!manifest.has_gt()) throw DataError("eval: dataset has no ground truth");

    std::vector<EvalRow> rows;
    for (const auto& s : manifest.samples) {
        std::string map_path;
        for (const char* ext : {".pgm", ".png"}) {
            const fs::path p = fs::path(maps_dir) / (s.id + ext);
            if (fs::exists(p)) {
                map_path = p.string();
                break;
            }
        }
        if (map_path.empty())
            throw DataError("eval: no saliency map for sample " + s.id + " in " + maps_dir);
        const ScalarField gt = manifest.load_gt(s.id);
        const ScalarField pred = to_gt_size(load_gray(map_path), gt);
        rows.push_back({s.id, evaluate_pair(pred, gt)});
    }
    return finish_eval(std::move(rows));
}

std::string eval_csv(const EvalResult& result) {
    std::string csv = "id,mae,f_max,f_mean,f_weighted,e_measure\n";
    auto row = [](const std::string& id, const MetricsReport& m) {
        return id + "," + fmt(m.mae) + "," + fmt(m.f_max) + "," + fmt(m.f_mean) + "," +
               fmt(m.f_weighted) + "," + fmt(m.e_measure) + "\n";
    };
    for (const EvalRow& r : result.rows) csv += row(r.id, r.metrics);
    csv += row("aggregate", result.aggregate);
    return csv;
}

} // namespace dsu
