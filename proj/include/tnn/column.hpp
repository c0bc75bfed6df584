// column.hpp
//
// p x q column: a synaptic crossbar feeding q neurons, 1-WTA lateral
// inhibition on their outputs, and STDP/R-STDP applied at the end of every
// gamma cycle. Two engines run the same column:
//
//   Engine::Cycle       steps every synapse FSM, neuron accumulator, WTA latch
//                       and STDP comparator latch once per unit clock.
//   Engine::Functional  computes fire times in closed form per volley.
//
// Both feed the same per-synapse draw schedule, so for equal seeds they
// produce identical winners, outputs and weight trajectories.

#ifndef TNN_COLUMN_HPP
#define TNN_COLUMN_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "tnn/neuron.hpp"
#include "tnn/plasticity.hpp"
#include "tnn/synapse.hpp"
#include "tnn/temporal.hpp"

namespace tnn {

/// p x q weights; column j holds neuron j's receptive field.
using WeightMatrix = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>;

enum class LearningMode { Stdp, Rstdp };
enum class RngMode { Independent, Shared };
enum class Engine { Cycle, Functional };

const char* to_string(LearningMode m);
const char* to_string(Engine e);

struct ColumnConfig {
    int p = 1;
    int q = 1;
    int theta = 1;
    /// Optional per-neuron thresholds; empty means `theta` everywhere.
    std::vector<int> neuron_thetas;
    PlasticityParams params;
    LearningMode mode = LearningMode::Stdp;
    std::uint64_t seed = 1;
    RngMode rng_mode = RngMode::Independent;
    int lfsr_width = RandomSource::kDefaultWidth;
    /// Starting weight for every synapse, or -1 for uniform draws over 0..7.
    int initial_weight = 0;
    /// Label -> neuron map for rewards; empty means identity over q.
    std::vector<int> class_map;

    void validate() const;
    int theta_of(int neuron) const;
};

struct GammaResult {
    Volley pre_inhibition;           // q fire times before WTA
    Volley output;                   // q times after WTA, at most one present
    std::optional<int> winner;
    Reward reward = Reward::Unsupervised;
    int weight_changes = 0;          // synapses whose weight moved this cycle
    int synapses = 0;

    double mean_abs_dw() const {
        return synapses == 0 ? 0.0 : static_cast<double>(weight_changes) / synapses;
    }
    friend bool operator==(const GammaResult&, const GammaResult&) = default;
};

/// Earliest fire time passes, ties go to the lowest index, all others absent.
Volley wta_inhibit(std::span<const SpikeTime> fire_times);
std::optional<int> wta_winner(std::span<const SpikeTime> fire_times);

class Column {
public:
    explicit Column(ColumnConfig config);

    /// One gamma cycle. `label` is required in R-STDP mode and ignored otherwise.
    GammaResult step(Engine engine, const Volley& input, std::optional<int> label = std::nullopt);
    GammaResult gamma(const Volley& input, std::optional<int> label = std::nullopt) {
        return step(Engine::Cycle, input, label);
    }
    GammaResult gamma_functional(const Volley& input, std::optional<int> label = std::nullopt) {
        return step(Engine::Functional, input, label);
    }

    /// Fire times only, without touching weights or randomness.
    Volley infer(const Volley& input) const;

    WeightMatrix weights() const;
    void set_weights(const WeightMatrix& w);

    const ColumnConfig& config() const { return config_; }
    int p() const { return config_.p; }
    int q() const { return config_.q; }
    LearningMode mode() const { return config_.mode; }
    void set_mode(LearningMode mode) { config_.mode = mode; }
    void set_params(const PlasticityParams& params);

    const SynapseState& synapse(int input, int neuron) const { return synapses_[index(input, neuron)]; }
    std::span<const RandomSource> random_sources() const { return rngs_; }

    friend bool operator==(const Column& a, const Column& b) {
        return a.synapses_ == b.synapses_ && a.rngs_ == b.rngs_;
    }

private:
    std::size_t index(int input, int neuron) const {
        return static_cast<std::size_t>(neuron) * config_.p + input;
    }
    void check_input(const Volley& input, std::optional<int> label) const;
    Volley fire_times_cycle(const Volley& input, std::vector<std::uint8_t>& x_seen,
                            std::vector<std::uint8_t>& x_le_z, std::optional<int>& winner);
    Volley fire_times_functional(const Volley& input) const;
    Reward reward_for(std::optional<int> winner, std::optional<int> label) const;
    template <typename CaseFn>
    int update_weights(Reward reward, CaseFn&& case_of);

    ColumnConfig config_;
    ClassMap class_map_;
    GateThresholds thresholds_;
    std::vector<SynapseState> synapses_;  // neuron-major, p per neuron
    std::vector<RandomSource> rngs_;      // p*q streams, or one when shared
    std::vector<NeuronBody> bodies_;
};

// ---------------------------------------------------------------------------
// Layers

struct LayerSpec {
    int input_width = 0;
    std::vector<ColumnConfig> columns;
    /// wiring[k][i] = layer input line feeding input i of column k.
    std::vector<std::vector<int>> wiring;

    void validate() const;
};

struct LayerResult {
    std::vector<GammaResult> columns;
    /// Concatenated column outputs in the next layer's encoding window.
    Volley output;
};

/// Spike times past the 0..7 input window cannot be re-encoded downstream and
/// are dropped.
Volley to_next_layer_input(std::span<const SpikeTime> outputs);

class Layer {
public:
    explicit Layer(LayerSpec spec);

    /// Columns are independent within a gamma cycle; `threads` > 1 runs them
    /// concurrently with identical results.
    LayerResult step(Engine engine, const Volley& input, std::span<const std::optional<int>> labels = {},
                     int threads = 1);

    Column& column(int k) { return columns_.at(static_cast<std::size_t>(k)); }
    const Column& column(int k) const { return columns_.at(static_cast<std::size_t>(k)); }
    int size() const { return static_cast<int>(columns_.size()); }
    int output_width() const;

private:
    LayerSpec spec_;
    std::vector<Column> columns_;
};

/// Feeds a volley through cascaded layers. `label` goes to every column of
/// the final layer (where R-STDP is normally deployed).
std::vector<LayerResult> cascade_step(std::span<Layer> layers, Engine engine, const Volley& input,
                                      std::optional<int> label = std::nullopt, int threads = 1);

}  // namespace tnn

#endif  // TNN_COLUMN_HPP
