// experiment.hpp
//
// Online-learning experiments on a single column fed with encoded MNIST:
// supervised R-STDP training, hidden-class incremental acquisition, plus the
// cost report and the engine equivalence check used by the command line.

#ifndef TNN_EXPERIMENT_HPP
#define TNN_EXPERIMENT_HPP

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "tnn/column.hpp"
#include "tnn/costmodel.hpp"
#include "tnn/dataio.hpp"

namespace tnn::exp {

namespace fs = std::filesystem;

struct ExperimentConfig {
    // column
    int p = 256;
    int q = 10;
    int theta = 64;
    int initial_weight = 0;
    RngMode rng_mode = RngMode::Independent;
    // learning
    PlasticityParams params{0.3, 0.9, 0.02, 0.05};
    LearningMode mode = LearningMode::Rstdp;
    std::uint64_t seed = 1;
    // data
    fs::path images;
    fs::path labels;
    int cutoff = 128;
    // run
    std::int64_t samples = 10000;
    Engine engine = Engine::Functional;
    fs::path out_dir = "runs/latest";
    std::int64_t export_every = 0;
    int window = 1000;
    double epsilon = 0.01;
    double cosine_threshold = 0.6;
    double purity_threshold = 0.5;
    // incremental
    int hidden_class = 9;
    std::int64_t phase1_samples = 10000;
    std::int64_t phase2_samples = 2000;
    fs::path checkpoint;
    bool phase2_include_hidden = true;
    /// Trailing phase-2 samples over which winner purity is judged.
    int acquire_window = 500;
    // equivalence
    std::int64_t trials = 1000;

    /// Throws ConfigError on any inconsistent field.
    void validate() const;
};

/// Sets one field from its key (e.g. "theta", "mu_capture"); throws ConfigError.
void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value);
/// Keys accepted by apply_setting, with their config-file section.
std::vector<std::pair<std::string, std::string>> setting_keys();

/// Flat INI: "[section]" headers and "key = value" lines, '#' or ';' comments.
void load_config_file(ExperimentConfig& cfg, const fs::path& path);
std::string to_ini(const ExperimentConfig& cfg);

/// Encoded dataset: one volley and label per sample.
struct EncodedSet {
    std::vector<Volley> volleys;
    std::vector<int> labels;
    int side = 16;
};

EncodedSet encode_dataset(const io::Dataset& data, const io::EncoderConfig& enc);
EncodedSet load_encoded(const ExperimentConfig& cfg);

/// Spike-presence vector (1 per firing line) of a volley.
Eigen::VectorXd presence(const Volley& v);
double cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// Per-class mean presence vectors (p x classes).
Eigen::MatrixXd class_means(const EncodedSet& set, int classes);

struct ClassReport {
    int label = 0;
    int samples = 0;
    std::optional<int> dominant;
    double purity = 0;
    double cosine = 0;   // dominant neuron's weights vs class mean
    bool centroid = false;
};

struct ConvergenceMetrics {
    int window = 0;
    double mean_abs_dw = 0;                  // last full window
    std::optional<std::int64_t> converged_at;  // first sample closing a window below epsilon
    std::vector<ClassReport> classes;
    Eigen::MatrixXd neuron_class_cosine;     // q x classes
    int centroid_classes = 0;
};

/// Rolling window over per-sample mean |dw| and winner/label pairs.
class ConvergenceTracker {
public:
    ConvergenceTracker(int window, double epsilon, int classes, int neurons);
    void record(std::int64_t sample, const GammaResult& r, std::optional<int> label);
    bool converged() const { return converged_at_.has_value(); }
    std::optional<std::int64_t> converged_at() const { return converged_at_; }
    double window_mean() const;
    ConvergenceMetrics finish(const WeightMatrix& w, const Eigen::MatrixXd& means, double cosine_threshold,
                              double purity_threshold) const;

private:
    int window_;
    double epsilon_;
    int classes_;
    int neurons_;
    std::vector<double> dw_;
    std::vector<std::pair<int, int>> pairs_;  // (label, winner or -1)
    std::size_t head_ = 0;
    std::size_t filled_ = 0;
    double sum_ = 0;
    std::optional<std::int64_t> converged_at_;
};

struct TrainResult {
    ConvergenceMetrics metrics;
    WeightMatrix weights;
    std::int64_t samples = 0;
};

/// The hidden class counts as acquired once one neuron, over the trailing
/// acquire_window phase-2 samples, wins the hidden class with purity at or
/// above purity_threshold, is not the dominant winner of any other class, and
/// has weights with cosine at or above cosine_threshold to the hidden class
/// mean. `cosine_only_at` records when the weaker test (cosine alone) first
/// held, for comparison.
struct IncrementalResult {
    std::optional<std::int64_t> acquired_at;  // phase-2 sample index
    int acquiring_neuron = -1;
    double best_cosine = 0;
    std::optional<std::int64_t> cosine_only_at;
    /// Dominant hidden-class winner and its purity in the final window.
    std::optional<int> final_hidden_winner;
    double final_hidden_purity = 0;
    WeightMatrix phase1_weights;
    WeightMatrix final_weights;
};

/// Output sinks shared by the runners; an empty out_dir disables file output.
struct RunOutput {
    explicit RunOutput(const ExperimentConfig& cfg, const std::string& kind);
    std::optional<io::MetricsWriter> metrics;
    fs::path dir;
};

TrainResult run_train(const ExperimentConfig& cfg, const EncodedSet& data, std::ostream* log = nullptr);
IncrementalResult run_incremental(const ExperimentConfig& cfg, const EncodedSet& data, std::ostream* log = nullptr);

struct CostSummary {
    cost::GateCostReport report;
    cost::PhysicalEstimate physical;
    std::optional<cost::ReferenceRow> reference;
    bool rstdp_assumption = false;
};
CostSummary estimate_cost(int p, int q, LearningMode mode);
void print_cost_table(std::ostream& out, const CostSummary& s, int p, int q, LearningMode mode);
std::string cost_json(const CostSummary& s, int p, int q, LearningMode mode);

struct EquivalenceResult {
    bool pass = true;
    std::int64_t trials = 0;
    std::optional<std::int64_t> first_divergence;
    std::string diff;
};

/// Hook to tamper with the functional engine's result (negative controls).
using Perturbation = std::function<void(std::int64_t trial, GammaResult& functional)>;

/// Runs both engines on identical seeded streams; half STDP, half R-STDP.
/// Each input line spikes with probability `line_density`.
EquivalenceResult check_equivalence(int p, int q, std::int64_t trials, std::uint64_t seed, double line_density = 0.6,
                                    const Perturbation& perturb = {});

}  // namespace tnn::exp

#endif  // TNN_EXPERIMENT_HPP
