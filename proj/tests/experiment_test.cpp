#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "tnn/experiment.hpp"

using namespace tnn;
using namespace tnn::exp;
namespace fs = std::filesystem;

namespace {

const fs::path kMnist = TNN_MNIST_DIR;

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

ExperimentConfig mnist_config(const std::string& out) {
    ExperimentConfig cfg;
    cfg.images = kMnist / "images-idx3-ubyte";
    cfg.labels = kMnist / "labels-idx1-ubyte";
    cfg.out_dir = fs::temp_directory_path() / out;
    cfg.samples = 600;
    cfg.window = 200;
    return cfg;
}

// First `n` encoded samples; loaded once for the whole suite.
const EncodedSet& subset(std::size_t n) {
    static const EncodedSet full = load_encoded(mnist_config(""));
    static std::map<std::size_t, EncodedSet> cache;
    auto it = cache.find(n);
    if (it == cache.end()) {
        EncodedSet s;
        s.side = full.side;
        s.volleys.assign(full.volleys.begin(), full.volleys.begin() + static_cast<long>(n));
        s.labels.assign(full.labels.begin(), full.labels.begin() + static_cast<long>(n));
        it = cache.emplace(n, std::move(s)).first;
    }
    return it->second;
}

}  // namespace

TEST(Config, SettingsRoundTripThroughIni) {
    ExperimentConfig cfg;
    apply_setting(cfg, "theta", "77");
    apply_setting(cfg, "mu_capture", "0.125");
    apply_setting(cfg, "mode", "stdp");
    apply_setting(cfg, "engine", "cycle");
    apply_setting(cfg, "rng_mode", "shared");
    apply_setting(cfg, "phase2_include_hidden", "false");
    apply_setting(cfg, "out_dir", "somewhere/else");
    apply_setting(cfg, "epsilon", "0.003");
    const fs::path path = fs::temp_directory_path() / "tnn_config_roundtrip.ini";
    std::ofstream(path) << to_ini(cfg);
    ExperimentConfig back;
    load_config_file(back, path);
    EXPECT_EQ(to_ini(back), to_ini(cfg));
    EXPECT_EQ(back.theta, 77);
    EXPECT_EQ(back.params.mu_capture, 0.125);
    EXPECT_EQ(back.mode, LearningMode::Stdp);
    EXPECT_EQ(back.engine, Engine::Cycle);
    EXPECT_EQ(back.rng_mode, RngMode::Shared);
    EXPECT_FALSE(back.phase2_include_hidden);
    EXPECT_EQ(back.epsilon, 0.003);
    fs::remove(path);
}

TEST(Config, EveryKeyAppearsInIni) {
    const std::string ini = to_ini(ExperimentConfig{});
    for (const auto& [key, section] : setting_keys()) {
        EXPECT_NE(ini.find("\n" + key + " = "), std::string::npos) << key;
        EXPECT_NE(ini.find("[" + section + "]"), std::string::npos) << section;
    }
}

TEST(Config, Errors) {
    ExperimentConfig cfg;
    EXPECT_THROW(apply_setting(cfg, "no_such_key", "1"), ConfigError);
    EXPECT_THROW(apply_setting(cfg, "theta", "abc"), ConfigError);
    EXPECT_THROW(apply_setting(cfg, "theta", "12x"), ConfigError);
    EXPECT_THROW(apply_setting(cfg, "mode", "hebbian"), ConfigError);
    EXPECT_THROW(apply_setting(cfg, "phase2_include_hidden", "maybe"), ConfigError);

    const fs::path path = fs::temp_directory_path() / "tnn_config_bad.ini";
    std::ofstream(path) << "[column]\nmu_capture = 0.5\n";
    EXPECT_THROW(load_config_file(cfg, path), ConfigError);
    std::ofstream(path) << "[column\np = 4\n";
    EXPECT_THROW(load_config_file(cfg, path), ConfigError);
    std::ofstream(path) << "# comment\n[column]\np = 64 ; trailing\n";
    EXPECT_NO_THROW(load_config_file(cfg, path));
    EXPECT_EQ(cfg.p, 64);
    fs::remove(path);
    EXPECT_THROW(load_config_file(cfg, path), ConfigError);
}

TEST(Config, Validation) {
    ExperimentConfig cfg;
    cfg.samples = 0;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = {};
    cfg.params.mu_min = 1.5;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = {};
    cfg.theta = 0;
    EXPECT_THROW(cfg.validate(), ConfigError);
    EXPECT_NO_THROW(ExperimentConfig{}.validate());
}

TEST(Metrics, CosineAndPresence) {
    const Volley v{SpikeTime(0), SpikeTime::absent(), SpikeTime(5)};
    const Eigen::VectorXd x = presence(v);
    EXPECT_EQ(x, Eigen::Vector3d(1, 0, 1));
    EXPECT_NEAR(cosine(x, x), 1.0, 1e-12);
    EXPECT_NEAR(cosine(x, Eigen::Vector3d(0, 1, 0)), 0.0, 1e-12);
    EXPECT_EQ(cosine(x, Eigen::Vector3d::Zero()), 0.0);
}

TEST(Metrics, TrackerWindowAndConvergence) {
    ConvergenceTracker t(4, 0.1, 10, 2);
    GammaResult busy;
    busy.synapses = 10;
    busy.weight_changes = 5;
    GammaResult quiet;
    quiet.synapses = 10;
    for (int s = 0; s < 4; ++s) t.record(s, busy, 0);
    EXPECT_NEAR(t.window_mean(), 0.5, 1e-12);
    EXPECT_FALSE(t.converged());
    for (int s = 4; s < 7; ++s) t.record(s, quiet, 0);
    EXPECT_FALSE(t.converged());
    t.record(7, quiet, 0);
    EXPECT_EQ(t.converged_at(), 7);
}

TEST(Dataset, SubsetLoadsAndEncodes) {
    const EncodedSet& s = subset(100);
    ASSERT_EQ(s.volleys.size(), 100u);
    EXPECT_EQ(s.volleys[0].size(), 256u);
    for (const Volley& v : s.volleys)
        for (SpikeTime t : v) ASSERT_TRUE(t.is_absent() || t.cycle() <= kLatestArrival);
    const Eigen::MatrixXd means = class_means(s, 10);
    EXPECT_EQ(means.rows(), 256);
    EXPECT_EQ(means.cols(), 10);
    EXPECT_GE(means.minCoeff(), 0.0);
    EXPECT_LE(means.maxCoeff(), 1.0);
}

TEST(Train, FrozenLearningReportsZeroChange) {
    ExperimentConfig cfg = mnist_config("tnn_exp_frozen");
    cfg.params = PlasticityParams::frozen();
    cfg.samples = 100;
    const TrainResult r = run_train(cfg, subset(100));
    EXPECT_EQ(r.metrics.mean_abs_dw, 0.0);
    EXPECT_TRUE((r.weights.array() == 0).all());
    fs::remove_all(cfg.out_dir);
}

TEST(Train, EnginesProduceIdenticalArtifacts) {
    ExperimentConfig a = mnist_config("tnn_exp_engine_cycle");
    a.engine = Engine::Cycle;
    a.samples = 150;
    ExperimentConfig b = a;
    b.engine = Engine::Functional;
    b.out_dir = fs::temp_directory_path() / "tnn_exp_engine_func";
    const TrainResult ra = run_train(a, subset(100));
    const TrainResult rb = run_train(b, subset(100));
    EXPECT_EQ(ra.weights, rb.weights);
    EXPECT_EQ(slurp(a.out_dir / "metrics.jsonl"), slurp(b.out_dir / "metrics.jsonl"));
    EXPECT_EQ(slurp(a.out_dir / "weights.csv"), slurp(b.out_dir / "weights.csv"));
    fs::remove_all(a.out_dir);
    fs::remove_all(b.out_dir);
}

TEST(Train, RerunIsByteIdentical) {
    ExperimentConfig cfg = mnist_config("tnn_exp_rerun");
    const fs::path d1 = cfg.out_dir;
    run_train(cfg, subset(300));
    const std::string m1 = slurp(d1 / "metrics.jsonl"), w1 = slurp(d1 / "weights.csv");
    fs::remove_all(d1);
    run_train(cfg, subset(300));
    EXPECT_FALSE(m1.empty());
    EXPECT_EQ(slurp(d1 / "metrics.jsonl"), m1);
    EXPECT_EQ(slurp(d1 / "weights.csv"), w1);
    EXPECT_TRUE(fs::exists(d1 / "weights" / "neuron_09.pgm"));
    EXPECT_TRUE(fs::exists(d1 / "summary.json"));
    fs::remove_all(d1);
}

TEST(Train, DifferentSeedsDiverge) {
    ExperimentConfig a = mnist_config("");
    a.out_dir.clear();
    a.initial_weight = -1;
    ExperimentConfig b = a;
    b.seed = 2;
    EXPECT_NE(run_train(a, subset(200)).weights, run_train(b, subset(200)).weights);
}

TEST(Train, GeometryMismatchIsConfigError) {
    ExperimentConfig cfg = mnist_config("");
    cfg.out_dir.clear();
    cfg.p = 64;
    EXPECT_THROW(run_train(cfg, subset(100)), ConfigError);
    cfg.p = 256;
    cfg.q = 4;
    EXPECT_THROW(run_train(cfg, subset(100)), ConfigError);
}

TEST(Train, SnapshotsWritten) {
    ExperimentConfig cfg = mnist_config("tnn_exp_snap");
    cfg.samples = 100;
    cfg.export_every = 50;
    run_train(cfg, subset(100));
    std::size_t snapshots = 0;
    for (const auto& e : fs::recursive_directory_iterator(cfg.out_dir))
        snapshots += e.path().filename() == "weights.csv";
    EXPECT_GE(snapshots, 3u);
    fs::remove_all(cfg.out_dir);
}

TEST(Incremental, StreamWithoutHiddenClassNeverAcquires) {
    ExperimentConfig cfg = mnist_config("tnn_exp_inc_none");
    cfg.phase1_samples = 1000;
    cfg.phase2_samples = 500;
    cfg.phase2_include_hidden = false;
    const IncrementalResult r = run_incremental(cfg, subset(2000));
    EXPECT_FALSE(r.acquired_at.has_value());
    EXPECT_EQ(r.acquiring_neuron, -1);
    EXPECT_TRUE(fs::exists(cfg.out_dir / "phase1" / "weights.csv"));
    fs::remove_all(cfg.out_dir);
}

namespace {

// Ten classes on disjoint 25-pixel blocks; each pixel fires early with
// probability 0.8.
EncodedSet block_classes(std::size_t n) {
    EncodedSet s;
    std::mt19937_64 gen(1);
    std::bernoulli_distribution on(0.8);
    std::uniform_int_distribution<int> when(0, 2);
    for (std::size_t k = 0; k < n; ++k) {
        const int c = static_cast<int>(k % 10);
        Volley v(256);
        for (int i = c * 25; i < c * 25 + 25; ++i) v[i] = on(gen) ? SpikeTime(when(gen)) : SpikeTime::absent();
        s.volleys.push_back(std::move(v));
        s.labels.push_back(c);
    }
    return s;
}

ExperimentConfig block_config() {
    ExperimentConfig cfg;
    cfg.out_dir.clear();
    cfg.theta = 20;
    cfg.params.mu_search = 0.05;
    cfg.phase1_samples = 2000;
    cfg.phase2_samples = 2000;
    cfg.acquire_window = 200;
    return cfg;
}

}  // namespace

TEST(Incremental, SeparableHiddenClassIsAcquiredByFreeNeuron) {
    const IncrementalResult r = run_incremental(block_config(), block_classes(2000));
    ASSERT_TRUE(r.acquired_at.has_value());
    EXPECT_EQ(r.acquiring_neuron, 9);
    EXPECT_GE(*r.acquired_at, 199);
    EXPECT_GE(r.best_cosine, 0.6);
}

TEST(Incremental, SeparableStreamWithoutHiddenClass) {
    ExperimentConfig cfg = block_config();
    cfg.phase2_include_hidden = false;
    const IncrementalResult r = run_incremental(cfg, block_classes(2000));
    EXPECT_FALSE(r.acquired_at.has_value());
    EXPECT_FALSE(r.final_hidden_winner.has_value());
    EXPECT_LT(r.best_cosine, 0.6);
}

TEST(Incremental, OnlyHiddenClassIsDataError) {
    EncodedSet s = block_classes(20);
    for (auto& l : s.labels) l = 9;
    EXPECT_THROW(run_incremental(block_config(), s), DataError);
}

TEST(Incremental, CheckpointReplacesPhaseOne) {
    ExperimentConfig cfg = mnist_config("tnn_exp_inc_ckpt");
    cfg.phase1_samples = 300;
    cfg.phase2_samples = 50;
    const IncrementalResult first = run_incremental(cfg, subset(1000));
    ExperimentConfig resumed = cfg;
    resumed.checkpoint = cfg.out_dir / "phase1" / "weights.csv";
    resumed.out_dir = fs::temp_directory_path() / "tnn_exp_inc_ckpt2";
    const IncrementalResult second = run_incremental(resumed, subset(1000));
    EXPECT_EQ(second.phase1_weights, first.phase1_weights);
    fs::remove_all(cfg.out_dir);
    fs::remove_all(resumed.out_dir);
}

TEST(Incremental, MissingCheckpointIsDataError) {
    ExperimentConfig cfg = mnist_config("");
    cfg.out_dir.clear();
    cfg.checkpoint = "/nonexistent/weights.csv";
    EXPECT_THROW(run_incremental(cfg, subset(100)), DataError);
}

TEST(Equivalence, PassesAndReportsTrials) {
    const auto r = check_equivalence(16, 4, 300, 9);
    EXPECT_TRUE(r.pass) << r.diff;
    EXPECT_EQ(r.trials, 300);
}

TEST(Equivalence, AllAbsentSingleTrial) {
    const auto r = check_equivalence(16, 4, 1, 3, 0.0);
    EXPECT_TRUE(r.pass);
    EXPECT_EQ(r.trials, 1);
}

TEST(Equivalence, PerturbationCaughtAtFirstTrial) {
    const auto r = check_equivalence(16, 4, 10, 5, 0.6, [](std::int64_t t, GammaResult& g) {
        if (t == 0) g.winner = g.winner ? std::nullopt : std::optional<int>(0);
    });
    EXPECT_FALSE(r.pass);
    EXPECT_EQ(r.first_divergence, 0);
    EXPECT_NE(r.diff.find("winner"), std::string::npos) << r.diff;
}

TEST(Equivalence, BadArguments) {
    EXPECT_THROW(check_equivalence(0, 4, 10, 1), ConfigError);
    EXPECT_THROW(check_equivalence(4, 4, 0, 1), ConfigError);
}

TEST(CostReport, ReferenceRowAndJson) {
    const CostSummary s = estimate_cost(64, 8, LearningMode::Stdp);
    EXPECT_EQ(s.report.gates, 53024);
    ASSERT_TRUE(s.reference.has_value());
    EXPECT_EQ(s.reference->gates, 51824);
    std::ostringstream table;
    print_cost_table(table, s, 64, 8, LearningMode::Stdp);
    EXPECT_NE(table.str().find("53024"), std::string::npos) << table.str();
    EXPECT_NE(cost_json(s, 64, 8, LearningMode::Stdp).find("\"gates\""), std::string::npos);
    EXPECT_FALSE(estimate_cost(100, 3, LearningMode::Stdp).reference.has_value());
    EXPECT_TRUE(estimate_cost(64, 8, LearningMode::Rstdp).rstdp_assumption);
}
