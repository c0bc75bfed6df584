#include "tnn/column.hpp"

#include <algorithm>
#include <future>
#include <stdexcept>
#include <string>

namespace tnn {

const char* to_string(LearningMode m) { return m == LearningMode::Stdp ? "stdp" : "rstdp"; }
const char* to_string(Engine e) { return e == Engine::Cycle ? "cycle" : "functional"; }

void ColumnConfig::validate() const {
    if (p < 1 || q < 1) throw std::invalid_argument("column needs p >= 1 and q >= 1");
    if (theta < 1) throw std::invalid_argument("column threshold must be positive");
    if (!neuron_thetas.empty()) {
        if (static_cast<int>(neuron_thetas.size()) != q) {
            throw std::invalid_argument("per-neuron thresholds must list exactly q values");
        }
        for (int t : neuron_thetas) {
            if (t < 1) throw std::invalid_argument("column threshold must be positive");
        }
    }
    params.validate();
    if (initial_weight < -1 || initial_weight > kWMax) {
        throw std::invalid_argument("initial weight must be -1 (random) or in 0..7");
    }
    for (int n : class_map) {
        if (n < -1 || n >= q) throw std::invalid_argument("class map names a neuron outside the column");
    }
}

int ColumnConfig::theta_of(int neuron) const {
    return neuron_thetas.empty() ? theta : neuron_thetas[static_cast<std::size_t>(neuron)];
}

Volley wta_inhibit(std::span<const SpikeTime> fire_times) {
    Volley out(fire_times.size());
    if (const auto w = wta_winner(fire_times)) out[*w] = fire_times[*w];
    return out;
}

std::optional<int> wta_winner(std::span<const SpikeTime> fire_times) {
    // min_element keeps the first of equal minima, i.e. the lowest index.
    const auto it = std::min_element(fire_times.begin(), fire_times.end());
    if (it == fire_times.end() || it->is_absent()) return std::nullopt;
    return static_cast<int>(it - fire_times.begin());
}

// ---------------------------------------------------------------------------

Column::Column(ColumnConfig config)
    : config_(std::move(config)),
      class_map_(ClassMap::identity(1)) {
    config_.validate();
    class_map_ = config_.class_map.empty() ? ClassMap::identity(config_.q) : ClassMap(config_.class_map);

    const std::size_t n = static_cast<std::size_t>(config_.p) * config_.q;
    if (config_.rng_mode == RngMode::Independent) {
        rngs_.reserve(n);
        for (std::size_t k = 0; k < n; ++k) rngs_.push_back(RandomSource::derived(config_.seed, k, config_.lfsr_width));
    } else {
        rngs_.push_back(RandomSource::derived(config_.seed, 0, config_.lfsr_width));
    }
    thresholds_ = GateThresholds(config_.params, rngs_.front());

    synapses_.resize(n);
    if (config_.initial_weight >= 0) {
        std::fill(synapses_.begin(), synapses_.end(), SynapseState::with_weight(config_.initial_weight));
    } else {
        // Separate stream so the plasticity draw schedule does not depend on initialisation.
        RandomSource init = RandomSource::derived(config_.seed ^ 0xA5A5A5A5A5A5A5A5ull, n, config_.lfsr_width);
        for (auto& s : synapses_) s = SynapseState::with_weight(static_cast<int>(init.next() & kWMax));
    }

    bodies_.reserve(config_.q);
    for (int j = 0; j < config_.q; ++j) bodies_.emplace_back(NeuronConfig{config_.p, config_.theta_of(j)});
}

void Column::set_params(const PlasticityParams& params) {
    params.validate();
    config_.params = params;
    thresholds_ = GateThresholds(params, rngs_.front());
}

WeightMatrix Column::weights() const {
    WeightMatrix w(config_.p, config_.q);
    for (int j = 0; j < config_.q; ++j)
        for (int i = 0; i < config_.p; ++i) w(i, j) = synapses_[index(i, j)].weight;
    return w;
}

void Column::set_weights(const WeightMatrix& w) {
    if (w.rows() != config_.p || w.cols() != config_.q) throw std::invalid_argument("weight matrix shape mismatch");
    for (int j = 0; j < config_.q; ++j)
        for (int i = 0; i < config_.p; ++i) synapses_[index(i, j)] = SynapseState::with_weight(w(i, j));
}

void Column::check_input(const Volley& input, std::optional<int> label) const {
    if (static_cast<int>(input.size()) != config_.p) {
        throw std::invalid_argument("column expects " + std::to_string(config_.p) + " input lines, got " +
                                    std::to_string(input.size()));
    }
    validate_input_volley(input);
    if (config_.mode == LearningMode::Rstdp) {
        if (!label) throw std::invalid_argument("R-STDP training needs a label for every volley");
        class_map_.neuron_for(*label);
    }
}

Reward Column::reward_for(std::optional<int> winner, std::optional<int> label) const {
    if (config_.mode == LearningMode::Stdp) return Reward::Unsupervised;
    return compute_reward(winner, *label, class_map_);
}

Volley Column::fire_times_cycle(const Volley& input, std::vector<std::uint8_t>& x_seen,
                                std::vector<std::uint8_t>& x_le_z, std::optional<int>& winner) {
    const int p = config_.p;
    const int q = config_.q;
    for (auto& b : bodies_) b.reset();

    Volley fired(q);
    std::vector<std::uint8_t> readout(p);
    std::vector<std::uint8_t> line(p, 0), line_prev(p, 0);
    std::vector<std::uint8_t> z_seen(q, 0);
    bool wta_latch = false;

    for (int t = 0; t < kGammaCycles; ++t) {
        for (int i = 0; i < p; ++i) line[i] = pulse_bit(input[i], t);

        for (int j = 0; j < q; ++j) {
            SynapseState* row = &synapses_[index(0, j)];
            for (int i = 0; i < p; ++i) readout[i] = synapse_step(row[i], line[i]);
            if (bodies_[j].step(readout)) fired[j] = SpikeTime(t);
        }

        // 1-WTA: the first neuron to fire sets the latch; later spikes are blocked.
        int winner_now = -1;
        if (!wta_latch) {
            for (int j = 0; j < q; ++j) {
                if (fired[j].present() && fired[j].cycle() == t) {
                    winner_now = j;
                    wta_latch = true;
                    winner = j;
                    break;
                }
            }
        }

        // Temporal comparator per synapse: an input edge passes unless the
        // (post-inhibition) output edge arrived in an earlier cycle.
        for (int i = 0; i < p; ++i) {
            if (!line[i] || line_prev[i]) continue;
            x_seen[i] = 1;
            for (int j = 0; j < q; ++j) {
                if (!z_seen[j]) x_le_z[index(i, j)] = 1;
            }
        }
        if (winner_now >= 0) z_seen[winner_now] = 1;
        line_prev.swap(line);
    }
    for (auto& s : synapses_) synapse_end_frame(s);
    return fired;
}

Volley Column::fire_times_functional(const Volley& input) const {
    Volley fired(config_.q);
    std::vector<std::uint8_t> w(config_.p);
    for (int j = 0; j < config_.q; ++j) {
        for (int i = 0; i < config_.p; ++i) w[i] = synapses_[index(i, j)].weight;
        fired[j] = response_oracle(w, input, config_.theta_of(j));
    }
    return fired;
}

template <typename CaseFn>
int Column::update_weights(Reward reward, CaseFn&& case_of) {
    const bool shared = config_.rng_mode == RngMode::Shared;
    int changes = 0;
    for (int j = 0; j < config_.q; ++j) {
        for (int i = 0; i < config_.p; ++i) {
            const std::size_t k = index(i, j);
            SynapseState& s = synapses_[k];
            RandomSource& rng = shared ? rngs_.front() : rngs_[k];
            const GateDraws g = draw_gates(rng, thresholds_, s.weight);
            const int delta = gated_delta(case_of(i, j), reward, g);
            const int before = s.weight;
            apply_update(s, delta > 0, delta < 0);
            changes += s.weight != before;
        }
    }
    return changes;
}

GammaResult Column::step(Engine engine, const Volley& input, std::optional<int> label) {
    check_input(input, label);
    GammaResult r;
    r.synapses = config_.p * config_.q;

    if (engine == Engine::Cycle) {
        std::vector<std::uint8_t> x_le_z(static_cast<std::size_t>(r.synapses), 0);
        std::vector<std::uint8_t> x_seen(static_cast<std::size_t>(config_.p), 0);
        std::optional<int> latched;
        r.pre_inhibition = fire_times_cycle(input, x_seen, x_le_z, latched);
        r.winner = latched;
        r.output = Volley(config_.q);
        if (latched) r.output[*latched] = r.pre_inhibition[*latched];
        r.reward = reward_for(r.winner, label);
        r.weight_changes = update_weights(r.reward, [&](int i, int j) {
            const bool z_seen = r.winner && *r.winner == j;
            return case_from_latches(x_seen[i] != 0, z_seen, x_le_z[index(i, j)] != 0);
        });
    } else {
        r.pre_inhibition = fire_times_functional(input);
        r.winner = wta_winner(r.pre_inhibition);
        r.output = wta_inhibit(r.pre_inhibition);
        r.reward = reward_for(r.winner, label);
        r.weight_changes = update_weights(r.reward, [&](int i, int j) { return classify_case(input[i], r.output[j]); });
    }
    return r;
}

Volley Column::infer(const Volley& input) const {
    if (static_cast<int>(input.size()) != config_.p) throw std::invalid_argument("column input width mismatch");
    return wta_inhibit(fire_times_functional(input));
}

// ---------------------------------------------------------------------------

void LayerSpec::validate() const {
    if (wiring.size() != columns.size()) throw std::invalid_argument("layer wiring must list one entry per column");
    for (std::size_t k = 0; k < columns.size(); ++k) {
        columns[k].validate();
        if (static_cast<int>(wiring[k].size()) != columns[k].p) {
            throw std::invalid_argument("column " + std::to_string(k) + " wiring does not cover its p inputs");
        }
        for (int line : wiring[k]) {
            if (line < 0 || line >= input_width) {
                throw std::out_of_range("column " + std::to_string(k) + " wired to input line " +
                                        std::to_string(line) + " outside the layer input");
            }
        }
    }
}

Volley to_next_layer_input(std::span<const SpikeTime> outputs) {
    Volley v(outputs.begin(), outputs.end());
    for (auto& t : v) {
        if (t.present() && t.cycle() > kLatestArrival) t = SpikeTime::absent();
    }
    return v;
}

Layer::Layer(LayerSpec spec) : spec_(std::move(spec)) {
    spec_.validate();
    columns_.reserve(spec_.columns.size());
    for (const auto& c : spec_.columns) columns_.emplace_back(c);
}

int Layer::output_width() const {
    int n = 0;
    for (const auto& c : columns_) n += c.q();
    return n;
}

LayerResult Layer::step(Engine engine, const Volley& input, std::span<const std::optional<int>> labels, int threads) {
    if (static_cast<int>(input.size()) != spec_.input_width) throw std::invalid_argument("layer input width mismatch");
    if (!labels.empty() && labels.size() != columns_.size()) {
        throw std::invalid_argument("layer labels must list one entry per column");
    }
    const std::size_t n = columns_.size();
    LayerResult result;
    result.columns.resize(n);

    auto run = [&](std::size_t k) {
        Volley field(spec_.wiring[k].size());
        for (std::size_t i = 0; i < field.size(); ++i) field[i] = input[spec_.wiring[k][i]];
        result.columns[k] = columns_[k].step(engine, field, labels.empty() ? std::nullopt : labels[k]);
    };

    if (threads <= 1 || n <= 1) {
        for (std::size_t k = 0; k < n; ++k) run(k);
    } else {
        // Columns own disjoint state and RNG streams, so any split is safe.
        const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
        std::vector<std::future<void>> jobs;
        for (std::size_t w = 0; w < workers; ++w) {
            jobs.push_back(std::async(std::launch::async, [&, w] {
                for (std::size_t k = w; k < n; k += workers) run(k);
            }));
        }
        for (auto& j : jobs) j.get();
    }

    for (const auto& r : result.columns) {
        const Volley next = to_next_layer_input(r.output);
        result.output.insert(result.output.end(), next.begin(), next.end());
    }
    return result;
}

std::vector<LayerResult> cascade_step(std::span<Layer> layers, Engine engine, const Volley& input,
                                      std::optional<int> label, int threads) {
    std::vector<LayerResult> results;
    results.reserve(layers.size());
    Volley v = input;
    for (std::size_t l = 0; l < layers.size(); ++l) {
        std::vector<std::optional<int>> labels;
        if (label && l + 1 == layers.size()) labels.assign(static_cast<std::size_t>(layers[l].size()), label);
        results.push_back(layers[l].step(engine, v, labels, threads));
        v = results.back().output;
    }
    return results;
}

}  // namespace tnn
