// temporal.hpp
//
// Spike-time values, volleys, the 15-cycle gamma frame and the LFSR-backed
// Bernoulli sources shared by every other part of the simulator.

#ifndef TNN_TEMPORAL_HPP
#define TNN_TEMPORAL_HPP

#include <array>
#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace tnn {

inline constexpr int kWMax = 7;
inline constexpr int kWeightBits = 3;
inline constexpr int kPulseWidth = kWMax + 1;
inline constexpr int kEncodeWindow = kWMax;  // cycles 0..6 carry input edges
inline constexpr int kGammaCycles = 15;
inline constexpr int kUpdateCycle = kGammaCycles - 1;
/// Latest arrival time an input volley may carry.
inline constexpr int kLatestArrival = kWMax;

struct ArchParams {
    int w_max = kWMax;
    int weight_bits = kWeightBits;
    int pulse_width = kPulseWidth;
    int gamma = kGammaCycles;

    /// Weight counter width needed for w_max, i.e. ceil(log2(w_max + 1)).
    static constexpr int bits_for(int w_max) {
        int bits = 0;
        while ((1 << bits) < w_max + 1) ++bits;
        return bits;
    }
};

/// Unit-clock time of a spike within one gamma frame, or absent (infinity).
///
/// Absent compares greater than every present time, so min over a volley
/// picks the earliest spike and yields absent only for a silent volley.
class SpikeTime {
public:
    constexpr SpikeTime() = default;
    constexpr explicit SpikeTime(int cycle) : code_(static_cast<std::uint8_t>(cycle)) {
        if (cycle < 0 || cycle >= kGammaCycles) throw_out_of_range(cycle);
    }

    static constexpr SpikeTime absent() { return SpikeTime{}; }

    constexpr bool present() const { return code_ != kAbsentCode; }
    constexpr bool is_absent() const { return code_ == kAbsentCode; }
    /// Cycle of a present spike. Undefined for absent spikes.
    constexpr int cycle() const { return code_; }

    constexpr auto operator<=>(const SpikeTime&) const = default;

    std::string to_string() const;

private:
    static constexpr std::uint8_t kAbsentCode = 0xFF;
    [[noreturn]] static void throw_out_of_range(int cycle);

    std::uint8_t code_ = kAbsentCode;
};

using Volley = std::vector<SpikeTime>;

/// Earliest spike of a volley; absent if it is silent or empty.
SpikeTime earliest(std::span<const SpikeTime> volley);

/// Throws std::invalid_argument unless every present time lies in 0..7.
void validate_input_volley(std::span<const SpikeTime> volley);

/// Input bit of a line during `cycle`: an 8-cycle pulse starting at the spike.
constexpr bool pulse_bit(SpikeTime spike, int cycle) {
    return spike.present() && cycle >= spike.cycle() && cycle < spike.cycle() + kPulseWidth;
}

enum class GammaPhase { InputWindow, Tail, Update };

/// Cycles 0..6 input window, 7..13 readout tail, 14 weight update.
GammaPhase gamma_phase(int cycle);

const char* to_string(GammaPhase phase);

/// Fibonacci LFSR producing one fresh `width`-bit word per draw.
///
/// A draw returns the current register contents and then shifts the register
/// `width` times, so consecutive words never share bits. When gcd(width,
/// 2^width - 1) = 1 (true for the default width of 16) the word sequence
/// keeps the full 2^width - 1 period of the underlying m-sequence.
class RandomSource {
public:
    static constexpr int kDefaultWidth = 16;

    /// Feedback mask for a maximal-length polynomial of the given width (3..32).
    static std::uint32_t maximal_taps(int width);

    explicit RandomSource(std::uint32_t seed, int width = kDefaultWidth);
    RandomSource(std::uint32_t seed, int width, std::uint32_t taps);

    /// Source number `index` of a family derived from one experiment seed.
    static RandomSource derived(std::uint64_t seed, std::uint64_t index, int width = kDefaultWidth);

    /// Returns the current word and advances the register.
    std::uint32_t next();

    /// One register shift (single unit-clock step of the hardware LFSR).
    void shift();

    /// True with probability mu: next() < mu * 2^width.
    bool bernoulli(double mu);
    /// Same draw with a precomputed threshold from threshold_for().
    bool bernoulli_threshold(std::uint64_t threshold) { return next() < threshold; }

    std::uint64_t threshold_for(double mu) const;

    std::uint32_t state() const { return state_; }
    int width() const { return width_; }
    std::uint32_t taps() const { return taps_; }

    friend bool operator==(const RandomSource&, const RandomSource&) = default;

private:
    std::uint32_t state_;
    std::uint32_t taps_;
    int width_;
    bool table_advance_ = false;
};

}  // namespace tnn

#endif  // TNN_TEMPORAL_HPP
