// synapse.hpp
//
// Weight-counter synapse. The same 3-bit counter stores the weight, performs
// saturating STDP increments/decrements, and during an input pulse emits the
// weight as a serial thermometer code by counting down through zero and
// wrapping back, which leaves the stored value intact once the 8-cycle pulse
// ends.

#ifndef TNN_SYNAPSE_HPP
#define TNN_SYNAPSE_HPP

#include <array>
#include <cstdint>

#include "tnn/temporal.hpp"

namespace tnn {

struct SynapseState {
    std::uint8_t weight = 0;    // value held between pulses
    std::uint8_t counter = 0;   // live counter contents
    bool in_readout = false;    // inside an input pulse
    bool drained = false;       // counter passed zero during this pulse
    bool prev_input = false;    // edge detector

    static SynapseState with_weight(int weight);

    friend bool operator==(const SynapseState&, const SynapseState&) = default;
};

/// One unit clock of the counter FSM; returns the readout bit for this cycle.
///
/// The leading-edge cycle already emits the first bit when weight > 0.
bool synapse_step(SynapseState& state, bool input_bit);

/// Closes the frame at the end of a gamma cycle. The pulse has run its full
/// 8 cycles by then, so the counter must already hold the weight again.
void synapse_end_frame(SynapseState& state);

/// STDP update at the end of the gamma cycle. inc and dec together are
/// rejected, as is any update while a pulse is being read out.
void apply_update(SynapseState& state, bool inc, bool dec);

using FrameBits = std::array<bool, kGammaCycles>;

/// Expected readout: ones at arrival .. arrival + weight - 1, zeros elsewhere.
FrameBits readout_oracle(int weight, SpikeTime arrival);

}  // namespace tnn

#endif  // TNN_SYNAPSE_HPP
