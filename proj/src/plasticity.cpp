#include "tnn/plasticity.hpp"

#include <stdexcept>

namespace tnn {

void PlasticityParams::validate() const {
    const auto check = [](double mu, const char* name) {
        if (!(mu >= 0.0 && mu <= 1.0)) {
            throw std::invalid_argument(std::string(name) + " = " + std::to_string(mu) + " outside [0, 1]");
        }
    };
    check(mu_capture, "mu_capture");
    check(mu_backoff, "mu_backoff");
    check(mu_search, "mu_search");
    check(mu_min, "mu_min");
}

const char* to_string(StdpCase c) {
    switch (c) {
        case StdpCase::Capture: return "CAPTURE";
        case StdpCase::Backoff: return "BACKOFF";
        case StdpCase::Search: return "SEARCH";
        case StdpCase::AbsentInput: return "ABSENT_INPUT";
        case StdpCase::Idle: return "IDLE";
    }
    return "?";
}

const char* to_string(Reward r) {
    switch (r) {
        case Reward::Zero: return "0";
        case Reward::Plus: return "+1";
        case Reward::Minus: return "-1";
        case Reward::Unsupervised: return "unsupervised";
    }
    return "?";
}

int reward_value(Reward r) {
    switch (r) {
        case Reward::Plus: return 1;
        case Reward::Minus: return -1;
        default: return 0;
    }
}

StdpCase classify_case(SpikeTime x, SpikeTime z) {
    if (x.present() && z.present()) return x <= z ? StdpCase::Capture : StdpCase::Backoff;
    if (x.present()) return StdpCase::Search;
    if (z.present()) return StdpCase::AbsentInput;
    return StdpCase::Idle;
}

StdpCase case_from_latches(bool x_seen, bool z_seen, bool x_le_z) {
    const bool both = x_seen && z_seen;
    const bool one = x_seen != z_seen;
    if (x_le_z && both) return StdpCase::Capture;
    if (!x_le_z && both) return StdpCase::Backoff;
    if (x_le_z && one) return StdpCase::Search;
    if (!x_le_z && one) return StdpCase::AbsentInput;
    return StdpCase::Idle;
}

double stabilization_probability(int w) {
    if (w < 0 || w > kWMax) throw std::out_of_range("weight outside 0..7");
    const double r = static_cast<double>(w) / kWMax;
    return r * (1.0 - r);
}

GateThresholds::GateThresholds(const PlasticityParams& params, const RandomSource& shape) {
    params.validate();
    capture = shape.threshold_for(params.mu_capture);
    backoff = shape.threshold_for(params.mu_backoff);
    search = shape.threshold_for(params.mu_search);
    min = shape.threshold_for(params.mu_min);
    for (int w = 0; w <= kWMax; ++w) stabilization[w] = shape.threshold_for(stabilization_probability(w));
}

GateDraws draw_gates(RandomSource& rng, const GateThresholds& th, int w) {
    GateDraws g;
    g.capture = rng.bernoulli_threshold(th.capture);
    g.backoff = rng.bernoulli_threshold(th.backoff);
    g.search = rng.bernoulli_threshold(th.search);
    g.min = rng.bernoulli_threshold(th.min);
    const std::uint32_t word = rng.next();
    std::array<bool, kWMax + 1> streams{};
    for (int k = 0; k <= kWMax; ++k) streams[k] = word < th.stabilization[k];
    g.stabilization = streams[w];
    // Five 16-bit words are 80 shifts, and 5 divides 2^16 - 1, which would pin
    // each gate to one fifth of the sequence. Two more shifts make the stride
    // 82, coprime with the period, so every gate sees every word.
    for (int k = 0; k < kUpdateStagger; ++k) rng.shift();
    return g;
}

int gated_delta(StdpCase c, Reward reward, const GateDraws& g) {
    // max(F(w), B(mu_min)) is an OR of independent bits.
    const bool floor_or_f = g.stabilization || g.min;
    const int up_capture = (g.capture && floor_or_f) ? 1 : 0;
    const int down_backoff = (g.backoff && floor_or_f) ? -1 : 0;
    const int up_search = g.search ? 1 : 0;

    switch (reward) {
        case Reward::Unsupervised:
            switch (c) {
                case StdpCase::Capture: return up_capture;
                case StdpCase::Backoff:
                case StdpCase::AbsentInput: return down_backoff;
                case StdpCase::Search: return up_search;
                case StdpCase::Idle: return 0;
            }
            break;
        case Reward::Plus:
            switch (c) {
                case StdpCase::Capture: return up_capture;
                case StdpCase::Backoff:
                case StdpCase::AbsentInput: return down_backoff;
                default: return 0;
            }
        case Reward::Minus:
            if (c == StdpCase::Capture) return -up_capture;
            if (c == StdpCase::Search) return up_search;
            return 0;
        case Reward::Zero:
            return c == StdpCase::Search ? up_search : 0;
    }
    return 0;
}

bool stabilization_bit(int w, RandomSource& rng) {
    return rng.bernoulli_threshold(rng.threshold_for(stabilization_probability(w)));
}

int stdp_delta(StdpCase c, int w, const PlasticityParams& params, RandomSource& rng) {
    return rstdp_delta(c, w, Reward::Unsupervised, params, rng);
}

int rstdp_delta(StdpCase c, int w, Reward reward, const PlasticityParams& params, RandomSource& rng) {
    const GateThresholds th(params, rng);
    return gated_delta(c, reward, draw_gates(rng, th, w));
}

ClassMap ClassMap::identity(int classes) {
    std::vector<int> m(static_cast<std::size_t>(classes));
    for (int i = 0; i < classes; ++i) m[i] = i;
    return ClassMap(std::move(m));
}

ClassMap::ClassMap(std::vector<int> neuron_for_label) : neuron_for_label_(std::move(neuron_for_label)) {}

int ClassMap::neuron_for(int label) const {
    if (label < 0 || label >= size() || neuron_for_label_[label] < 0) {
        throw std::out_of_range("label " + std::to_string(label) + " has no mapped neuron");
    }
    return neuron_for_label_[label];
}

Reward compute_reward(std::optional<int> winner, int label, const ClassMap& map) {
    const int target = map.neuron_for(label);
    if (!winner) return Reward::Zero;
    return *winner == target ? Reward::Plus : Reward::Minus;
}

}  // namespace tnn
