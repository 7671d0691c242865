#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "dsu/checkpoint.hpp"
#include "dsu/harness.hpp"
#include "dsu/image_io.hpp"
#include "dsu/rng.hpp"

using namespace dsu;
namespace fs = std::filesystem;

namespace {
std::string fresh_dir(const std::string& tag) {
    const fs::path p = fs::temp_directory_path() / ("dsu_harness_" + tag);
    fs::remove_all(p);
    fs::create_directories(p);
    return p.string();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}
} // namespace

TEST_CASE("config parsing, emission, round trip") {
    const Config cfg = Config::parse_text("# comment\n"
                                          "tau = 5\n"
                                          "lr = 2e-3   # inline comment\n"
                                          "\n"
                                          "consistency = l2\n");
    CHECK(cfg.get_int("tau", 3) == 5);
    CHECK(cfg.get_double("lr", 0.0) == doctest::Approx(2e-3));
    CHECK(cfg.get_string("consistency", "") == "l2");
    CHECK(cfg.get_int("rounds", 4) == 4); // absent -> default

    // parse(emit(parse(text))) emits identical text
    const std::string once = cfg.emit();
    CHECK(Config::parse_text(once).emit() == once);

    CHECK_THROWS_AS(Config::parse_text("novalue\n"), UsageError);
    CHECK_THROWS_WITH_AS(Config::parse_text("tau = x\n").get_int("tau", 0),
                         doctest::Contains("tau"), UsageError);
    CHECK_THROWS_AS(Config::parse_text("flip = maybe\n").get_bool("flip", true), UsageError);
}

TEST_CASE("unknown config keys are rejected by name") {
    CHECK_THROWS_WITH_AS(resolve_config("", {"batchsize=10"}),
                         doctest::Contains("batchsize"), UsageError);
    const Config cfg = resolve_config("", {"rounds=2", "crf.iterations=3"});
    CHECK(cfg.get_int("rounds", 0) == 2);
    CHECK(cfg.get_int("crf.iterations", 0) == 3);
    CHECK(cfg.get_int("batch", 0) == 4); // defaults present
}

TEST_CASE("ingest") {
    const std::string root = fresh_dir("ingest");
    CHECK(ingest(root).samples.empty()); // empty root -> empty manifest, warning only

    fs::create_directories(fs::path(root) / "rgb");
    fs::create_directories(fs::path(root) / "depth");
    fs::create_directories(fs::path(root) / "pseudo");
    RgbImage img(8, 8);
    ScalarField f(8, 8, 0.5f);
    for (const char* id : {"c", "a", "b"}) {
        save_rgb((fs::path(root) / "rgb" / (std::string(id) + ".png")).string(), img);
        save_gray((fs::path(root) / "depth" / (std::string(id) + ".pgm")).string(), f);
        save_gray((fs::path(root) / "pseudo" / (std::string(id) + ".pgm")).string(), f);
    }
    const DatasetManifest m = ingest(root);
    REQUIRE(m.samples.size() == 3);
    CHECK(m.samples[0].id == "a"); // lexicographic
    CHECK(m.samples[1].id == "b");
    CHECK(m.samples[2].id == "c");
    CHECK(!m.has_gt());

    save_rgb((fs::path(root) / "rgb" / "d.png").string(), img);
    CHECK_THROWS_WITH_AS(ingest(root), doctest::Contains("d"), DataError);
}

TEST_CASE("synth: determinism, corruption targets, zero corruption") {
    SynthSpec spec;
    spec.size = 32;
    spec.count = 8;
    spec.seed = 1234;
    spec.corruption_mae = 0.15;

    const std::string d1 = fresh_dir("synth1");
    const std::string d2 = fresh_dir("synth2");
    synth_generate(spec, d1);
    synth_generate(spec, d2);
    int compared = 0;
    for (const auto& e : fs::recursive_directory_iterator(d1)) {
        if (!e.is_regular_file()) continue;
        const std::string rel = fs::relative(e.path(), d1).string();
        CHECK(slurp(e.path().string()) == slurp((fs::path(d2) / rel).string()));
        ++compared;
    }
    CHECK(compared == 8 * 4 + 1); // four images per sample plus the corpus csv

    for (int i = 0; i < spec.count; ++i) {
        const SynthSample s = synth_sample(spec, i);
        CHECK(s.achieved_mae >= 0.12);
        CHECK(s.achieved_mae <= 0.18);
        for (const float v : s.gt.data) CHECK((v == 0.0f || v == 1.0f));
        // corrupted label really is the stored pseudo
        CHECK(mae(s.pseudo, s.gt) == doctest::Approx(s.achieved_mae));
    }

    SynthSpec clean = spec;
    clean.corruption_mae = 0.0;
    const SynthSample s0 = synth_sample(clean, 0);
    CHECK(s0.pseudo.data == s0.gt.data);
    CHECK(s0.achieved_mae == 0.0);
}

TEST_CASE("init-labels: depth-prior fallback and crf filtering") {
    SynthSpec spec;
    spec.size = 16;
    spec.count = 4;
    spec.train_frac = 1.0;
    spec.seed = 9;
    const std::string root = fresh_dir("init");
    synth_generate(spec, root);
    const std::string train_root = (fs::path(root) / "train").string();

    // remove supplied labels; the fallback must create them
    fs::remove_all(fs::path(train_root) / "pseudo");
    const Config cfg = resolve_config("", {"size=16"});
    const int n = init_labels(train_root, cfg);
    CHECK(n == 4);
    const DatasetManifest m = ingest(train_root);
    for (const auto& s : m.samples) CHECK(!s.pseudo_path.empty());

    // with labels present and init.crf unset nothing is rewritten
    CHECK(init_labels(train_root, cfg) == 0);
    // crf filtering rewrites every label
    const Config cfg_crf = resolve_config("", {"size=16", "init.crf=true"});
    CHECK(init_labels(train_root, cfg_crf) == 4);
}

TEST_CASE("train with zero rounds: empty report, untouched parameters") {
    SynthSpec spec;
    spec.size = 16;
    spec.count = 4;
    spec.train_frac = 1.0;
    spec.seed = 31;
    const std::string root = fresh_dir("rounds0");
    synth_generate(spec, root);

    const Config cfg = resolve_config("", {"size=16", "channels=4", "rounds=0", "seed=31"});
    const std::string out = fresh_dir("rounds0_out");
    const PipelineResult res = run_train_pipeline(root + "/train", out, cfg);
    CHECK(res.reports.empty());

    const std::string report = slurp(res.report_csv_path);
    CHECK(report.find('\n') == report.size() - 1); // header only

    // checkpoint equals a fresh initialization: nothing was trained
    const TrainConfig tc = TrainConfig::from_config(cfg);
    Models fresh_models(tc, tc.seed);
    Models loaded(tc, 999);
    const CheckpointMeta meta = load_checkpoint(res.checkpoint_path, loaded.params);
    CHECK(meta.sal_steps == 0);
    for (const auto& p : fresh_models.params.all())
        CHECK(p->v == loaded.params.find(p->name)->v);

    // round-0 labels exported, no later rounds
    CHECK(fs::exists(fs::path(out) / "labels" / "round_0"));
    CHECK(!fs::exists(fs::path(out) / "labels" / "round_1"));
}

TEST_CASE("eval on perfect predictions: aggregate MAE 0, f_max 1") {
    SynthSpec spec;
    spec.size = 16;
    spec.count = 4;
    spec.train_frac = 0.5;
    spec.seed = 32;
    const std::string root = fresh_dir("evalperfect");
    synth_generate(spec, root);

    // point the map directory at the ground truth itself
    const EvalResult res =
        evaluate_maps(root + "/eval", (fs::path(root) / "eval" / "gt").string());
    CHECK(res.aggregate.mae == 0.0);
    CHECK(res.aggregate.f_max == 1.0);
    CHECK(res.aggregate.e_measure == 1.0);
    for (const EvalRow& r : res.rows) CHECK(r.metrics.mae == 0.0);

    const std::string csv = eval_csv(res);
    CHECK(csv.find("aggregate,0,1,") != std::string::npos);
}

TEST_CASE("named rng streams are deterministic and distinct") {
    Rng a1 = named_stream(7, "alpha");
    Rng a2 = named_stream(7, "alpha");
    Rng b = named_stream(7, "beta");
    Rng c = named_stream(8, "alpha");
    const std::uint64_t va = a1.next_u64();
    CHECK(va == a2.next_u64());
    CHECK(va != b.next_u64());
    CHECK(va != c.next_u64());

    Rng s1 = named_stream(7, "trainer/shuffle", 1, 2);
    Rng s2 = named_stream(7, "trainer/shuffle", 1, 3);
    CHECK(s1.next_u64() != s2.next_u64());
}

TEST_CASE("rng basic distribution sanity") {
    Rng rng(55);
    double sum = 0.0, sq = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const double v = rng.normal();
        sum += v;
        sq += v * v;
    }
    CHECK(sum / n == doctest::Approx(0.0).epsilon(0.05).scale(1.0));
    CHECK(sq / n == doctest::Approx(1.0).epsilon(0.05));

    int heads = 0;
    for (int i = 0; i < n; ++i) heads += rng.coin() ? 1 : 0;
    CHECK(static_cast<double>(heads) / n == doctest::Approx(0.5).epsilon(0.05));
}
