#include "tnn/temporal.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>

namespace tnn {

std::string SpikeTime::to_string() const {
    return present() ? std::to_string(cycle()) : std::string("inf");
}

void SpikeTime::throw_out_of_range(int cycle) {
    throw std::out_of_range("spike time " + std::to_string(cycle) + " outside gamma frame 0..14");
}

SpikeTime earliest(std::span<const SpikeTime> volley) {
    if (volley.empty()) return SpikeTime::absent();
    return *std::min_element(volley.begin(), volley.end());
}

void validate_input_volley(std::span<const SpikeTime> volley) {
    for (std::size_t i = 0; i < volley.size(); ++i) {
        if (volley[i].present() && volley[i].cycle() > kLatestArrival) {
            throw std::invalid_argument("input line " + std::to_string(i) + " spikes at cycle " +
                                        volley[i].to_string() + "; inputs must arrive in 0..7");
        }
    }
}

GammaPhase gamma_phase(int cycle) {
    if (cycle < 0 || cycle >= kGammaCycles) {
        throw std::out_of_range("gamma cycle " + std::to_string(cycle) + " outside 0..14");
    }
    if (cycle < kEncodeWindow) return GammaPhase::InputWindow;
    if (cycle < kUpdateCycle) return GammaPhase::Tail;
    return GammaPhase::Update;
}

const char* to_string(GammaPhase phase) {
    switch (phase) {
        case GammaPhase::InputWindow: return "INPUT_WINDOW";
        case GammaPhase::Tail: return "TAIL";
        case GammaPhase::Update: return "UPDATE";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// LFSR

namespace {

// Maximal-length tap positions (1-indexed, highest first), widths 3..32.
constexpr std::array<std::array<int, 4>, 33> kTapPositions = {{
    {}, {}, {},
    {3, 2}, {4, 3}, {5, 3}, {6, 5}, {7, 6}, {8, 6, 5, 4}, {9, 5}, {10, 7},
    {11, 9}, {12, 6, 4, 1}, {13, 4, 3, 1}, {14, 5, 3, 1}, {15, 14}, {16, 14, 13, 11},
    {17, 14}, {18, 11}, {19, 6, 2, 1}, {20, 17}, {21, 19}, {22, 21}, {23, 18},
    {24, 23, 22, 17}, {25, 22}, {26, 6, 2, 1}, {27, 5, 2, 1}, {28, 25}, {29, 27},
    {30, 6, 4, 1}, {31, 28}, {32, 22, 2, 1},
}};

std::uint32_t width_mask(int width) {
    return width == 32 ? 0xFFFFFFFFu : ((1u << width) - 1u);
}

std::uint32_t shift_once(std::uint32_t state, std::uint32_t taps, int width) {
    const std::uint32_t feedback = std::popcount(state & taps) & 1u;
    return (state >> 1) | (feedback << (width - 1));
}

// 16 single shifts of the default 16-bit register, precomputed per state.
const std::vector<std::uint16_t>& word_advance_table() {
    static const std::vector<std::uint16_t> table = [] {
        const std::uint32_t taps = RandomSource::maximal_taps(16);
        std::vector<std::uint16_t> t(1u << 16);
        for (std::uint32_t s = 0; s < t.size(); ++s) {
            std::uint32_t x = s;
            for (int k = 0; k < 16; ++k) x = shift_once(x, taps, 16);
            t[s] = static_cast<std::uint16_t>(x);
        }
        return t;
    }();
    return table;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

}  // namespace

std::uint32_t RandomSource::maximal_taps(int width) {
    if (width < 3 || width > 32) {
        throw std::invalid_argument("LFSR width must lie in 3..32");
    }
    std::uint32_t mask = 0;
    for (int t : kTapPositions[width]) {
        if (t > 0) mask |= 1u << (width - t);
    }
    return mask;
}

RandomSource::RandomSource(std::uint32_t seed, int width)
    : RandomSource(seed, width, maximal_taps(width)) {}

RandomSource::RandomSource(std::uint32_t seed, int width, std::uint32_t taps)
    : state_(seed), taps_(taps), width_(width) {
    if (width < 3 || width > 32) throw std::invalid_argument("LFSR width must lie in 3..32");
    if ((seed & width_mask(width)) != seed) {
        throw std::invalid_argument("LFSR seed wider than the register");
    }
    if (seed == 0) throw std::invalid_argument("LFSR seed must be nonzero");
    if ((taps & width_mask(width)) == 0) throw std::invalid_argument("LFSR taps empty");
    table_advance_ = width == 16 && taps == maximal_taps(16);
}

RandomSource RandomSource::derived(std::uint64_t seed, std::uint64_t index, int width) {
    const std::uint64_t mask = width_mask(width);
    std::uint64_t h = splitmix64(seed ^ splitmix64(index + 1));
    std::uint32_t s = static_cast<std::uint32_t>(h & mask);
    while (s == 0) {
        h = splitmix64(h);
        s = static_cast<std::uint32_t>(h & mask);
    }
    return RandomSource(s, width);
}

void RandomSource::shift() { state_ = shift_once(state_, taps_, width_); }

std::uint32_t RandomSource::next() {
    const std::uint32_t word = state_;
    if (table_advance_) {
        state_ = word_advance_table()[word];
    } else {
        for (int k = 0; k < width_; ++k) shift();
    }
    return word;
}

std::uint64_t RandomSource::threshold_for(double mu) const {
    if (!(mu >= 0.0 && mu <= 1.0)) throw std::invalid_argument("Bernoulli probability outside [0, 1]");
    // mu = 1 maps to 2^width, which exceeds every word.
    return static_cast<std::uint64_t>(mu * static_cast<double>(std::uint64_t{1} << width_));
}

bool RandomSource::bernoulli(double mu) { return bernoulli_threshold(threshold_for(mu)); }

}  // namespace tnn
