#include "tnn/neuron.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>
#include <string>

namespace tnn {

void NeuronConfig::validate() const {
    if (p < 1) throw std::invalid_argument("neuron needs at least one synapse");
    if (theta < 1) throw std::invalid_argument("neuron threshold must be positive, got " + std::to_string(theta));
}

NeuronBody::NeuronBody(NeuronConfig config) : config_(config) {
    config_.validate();
    reset();
}

void NeuronBody::reset() {
    state_ = NeuronBodyState{};
    state_.accumulator = -config_.theta;
    output_bit_ = false;
}

bool NeuronBody::step(std::span<const std::uint8_t> bits) {
    if (static_cast<int>(bits.size()) != config_.p) {
        throw std::invalid_argument("neuron expects " + std::to_string(config_.p) + " synapse bits, got " +
                                    std::to_string(bits.size()));
    }
    int count = 0;
    for (std::uint8_t b : bits) count += b & 1;
    state_.accumulator += count;

    bool fired_now = false;
    if (state_.fired_cycle.is_absent() && threshold_reached() && state_.cycle < kGammaCycles) {
        state_.fired_cycle = SpikeTime(state_.cycle);
        state_.pulse_remaining = kPulseWidth;
        fired_now = true;
    }
    output_bit_ = state_.pulse_remaining > 0;
    if (state_.pulse_remaining > 0) --state_.pulse_remaining;
    ++state_.cycle;
    return fired_now;
}

SpikeTime response_oracle(std::span<const std::uint8_t> weights, std::span<const SpikeTime> volley, int theta) {
    if (weights.size() != volley.size()) throw std::invalid_argument("weights and volley differ in length");
    // Each present input adds one unit per cycle over [x, x + w); accumulate the
    // ramp starts and ends, then integrate twice.
    std::array<int, kGammaCycles + kPulseWidth + 1> slope{};
    for (std::size_t i = 0; i < volley.size(); ++i) {
        if (volley[i].is_absent() || weights[i] == 0) continue;
        const int x = volley[i].cycle();
        slope[x] += 1;
        slope[x + weights[i]] -= 1;
    }
    int rate = 0;
    int potential = 0;
    for (int t = 0; t < kGammaCycles; ++t) {
        rate += slope[t];
        potential += rate;
        if (potential >= theta) return SpikeTime(t);
    }
    return SpikeTime::absent();
}

FrameBits spike_pulse(SpikeTime fired) {
    FrameBits bits{};
    if (fired.is_absent()) return bits;
    for (int t = fired.cycle(); t < std::min(fired.cycle() + kPulseWidth, kGammaCycles); ++t) bits[t] = true;
    return bits;
}

}  // namespace tnn
