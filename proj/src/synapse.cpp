#include "tnn/synapse.hpp"

#include <stdexcept>
#include <string>

namespace tnn {

namespace {
constexpr std::uint8_t kCounterMask = kWMax;  // counter arithmetic is mod w_max + 1
}

SynapseState SynapseState::with_weight(int weight) {
    if (weight < 0 || weight > kWMax) {
        throw std::out_of_range("synapse weight " + std::to_string(weight) + " outside 0..7");
    }
    SynapseState s;
    s.weight = static_cast<std::uint8_t>(weight);
    s.counter = s.weight;
    return s;
}

bool synapse_step(SynapseState& s, bool input_bit) {
    const bool leading_edge = input_bit && !s.prev_input;
    const bool trailing_edge = !input_bit && s.prev_input;
    s.prev_input = input_bit;

    if (trailing_edge) {
        s.in_readout = false;
        s.drained = false;
    }
    if (!input_bit) return false;

    if (leading_edge) {
        s.in_readout = true;
        s.drained = false;
    }
    bool out = false;
    if (!s.drained) {
        if (s.counter > 0) {
            out = true;
        } else {
            s.drained = true;
        }
    }
    s.counter = static_cast<std::uint8_t>((s.counter - 1) & kCounterMask);
    return out;
}

void synapse_end_frame(SynapseState& s) {
    if (s.counter != s.weight) {
        throw std::logic_error("synapse counter not restored at frame end (pulse shorter than 8 cycles?)");
    }
    s.in_readout = false;
    s.drained = false;
    s.prev_input = false;
}

void apply_update(SynapseState& s, bool inc, bool dec) {
    if (inc && dec) throw std::invalid_argument("synapse update with both inc and dec asserted");
    if (s.in_readout) throw std::logic_error("synapse update requested during readout");
    if (inc && s.weight < kWMax) ++s.weight;
    if (dec && s.weight > 0) --s.weight;
    s.counter = s.weight;
}

FrameBits readout_oracle(int weight, SpikeTime arrival) {
    FrameBits bits{};
    if (arrival.is_absent()) return bits;
    for (int t = arrival.cycle(); t < arrival.cycle() + weight && t < kGammaCycles; ++t) bits[t] = true;
    return bits;
}

}  // namespace tnn
