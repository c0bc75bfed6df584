// plasticity.hpp
//
// STDP and reward-modulated STDP. Every update draws the same five gating
// bits per synapse (capture, backoff, search, min floor, stabilization) in a
// fixed order whatever the case, so two engines that share seeds consume
// identical randomness.

#ifndef TNN_PLASTICITY_HPP
#define TNN_PLASTICITY_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tnn/temporal.hpp"

namespace tnn {

struct PlasticityParams {
    double mu_capture = 0.0;
    double mu_backoff = 0.0;
    double mu_search = 0.0;
    double mu_min = 0.0;

    /// Throws std::invalid_argument for any probability outside [0, 1].
    void validate() const;
    static PlasticityParams frozen() { return {}; }
};

enum class StdpCase : std::uint8_t { Capture = 1, Backoff = 2, Search = 3, AbsentInput = 4, Idle = 5 };

/// Two-bit reward signal; the enumerator values are the wire encoding.
enum class Reward : std::uint8_t { Zero = 0b00, Plus = 0b01, Unsupervised = 0b10, Minus = 0b11 };

const char* to_string(StdpCase c);
const char* to_string(Reward r);
/// +1, 0, -1 for Plus/Zero/Minus; 0 for Unsupervised.
int reward_value(Reward r);

/// Case from input time x and post-inhibition output time z.
StdpCase classify_case(SpikeTime x, SpikeTime z);

/// Case from the three latch bits the hardware comparator produces.
StdpCase case_from_latches(bool x_seen, bool z_seen, bool x_le_z);

/// F(w) = w (w_max - w) / w_max^2.
double stabilization_probability(int w);

/// Bernoulli thresholds for one parameter set and LFSR width.
struct GateThresholds {
    std::uint64_t capture = 0;
    std::uint64_t backoff = 0;
    std::uint64_t search = 0;
    std::uint64_t min = 0;
    std::array<std::uint64_t, kWMax + 1> stabilization{};

    GateThresholds() = default;
    GateThresholds(const PlasticityParams& params, const RandomSource& shape);
};

/// One update's worth of gating bits for a synapse.
struct GateDraws {
    bool capture = false;
    bool backoff = false;
    bool search = false;
    bool min = false;
    bool stabilization = false;
};

/// Draws the five gate bits in their fixed order. The stabilization bit is
/// the w-th output of an 8-way select over Bernoulli streams that all compare
/// against one shared word.
/// Extra single-bit shifts appended to every per-synapse update.
inline constexpr int kUpdateStagger = 2;

GateDraws draw_gates(RandomSource& rng, const GateThresholds& th, int w);

/// Weight change given already-drawn gates. Reward::Unsupervised is plain STDP.
int gated_delta(StdpCase c, Reward reward, const GateDraws& g);

/// B(F(w)) as a single draw from its own word.
bool stabilization_bit(int w, RandomSource& rng);

int stdp_delta(StdpCase c, int w, const PlasticityParams& params, RandomSource& rng);
int rstdp_delta(StdpCase c, int w, Reward reward, const PlasticityParams& params, RandomSource& rng);

/// Label -> neuron map for reward generation; -1 marks an unmapped label.
class ClassMap {
public:
    static ClassMap identity(int classes);
    explicit ClassMap(std::vector<int> neuron_for_label);

    /// Throws std::out_of_range for labels outside the map or mapped to -1.
    int neuron_for(int label) const;
    int size() const { return static_cast<int>(neuron_for_label_.size()); }

private:
    std::vector<int> neuron_for_label_;
};

Reward compute_reward(std::optional<int> winner, int label, const ClassMap& map);

}  // namespace tnn

#endif  // TNN_PLASTICITY_HPP
