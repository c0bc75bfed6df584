// neuron.hpp
//
// SRM0 neuron body with ramp-no-leak responses. The cycle-level model is an
// accumulator preset to -theta that adds the popcount of the synapse readout
// bits every unit clock; the sign bit going clear marks the output spike.

#ifndef TNN_NEURON_HPP
#define TNN_NEURON_HPP

#include <cstdint>
#include <span>

#include "tnn/synapse.hpp"
#include "tnn/temporal.hpp"

namespace tnn {

struct NeuronConfig {
    int p = 1;
    int theta = 1;

    /// Requires p >= 1 and 1 <= theta. Thresholds above p * w_max are legal
    /// (the neuron is simply silent) so sweeps can cross that boundary.
    void validate() const;
};

struct NeuronBodyState {
    std::int32_t accumulator = 0;
    SpikeTime fired_cycle;
    int pulse_remaining = 0;
    int cycle = 0;
};

class NeuronBody {
public:
    explicit NeuronBody(NeuronConfig config);

    /// Gamma-cycle reset: accumulator <- -theta, no spike, cycle counter 0.
    void reset();

    /// Adds one cycle of synapse bits. Returns true only on the firing cycle.
    bool step(std::span<const std::uint8_t> bits);

    /// Level of the 8-cycle output pulse for the cycle just stepped.
    bool output_bit() const { return output_bit_; }

    const NeuronBodyState& state() const { return state_; }
    const NeuronConfig& config() const { return config_; }
    /// sum - theta >= 0, read from the accumulator's sign bit.
    bool threshold_reached() const {
        return (static_cast<std::uint32_t>(state_.accumulator) >> 31) == 0;
    }

private:
    NeuronConfig config_;
    NeuronBodyState state_;
    bool output_bit_ = false;
};

/// Functional fire time: earliest t with sum_i min(max(t - x_i + 1, 0), w_i) >= theta,
/// or absent if the potential never gets there within the frame.
SpikeTime response_oracle(std::span<const std::uint8_t> weights, std::span<const SpikeTime> volley, int theta);

/// Output pulse of a neuron fired at `fired`, cut at the end of the frame.
FrameBits spike_pulse(SpikeTime fired);

}  // namespace tnn

#endif  // TNN_NEURON_HPP
