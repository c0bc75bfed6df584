// Independent reference computations used only by the tests.
#ifndef TNN_TEST_ORACLES_HPP
#define TNN_TEST_ORACLES_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "tnn/temporal.hpp"

namespace tnn::testing {

// Ramp-no-leak body potential at cycle t: sum_i min(max(t - x_i + 1, 0), w_i).
inline int potential(const std::vector<std::uint8_t>& w, const Volley& x, int t) {
    int sum = 0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (x[i].is_absent()) continue;
        sum += std::min(std::max(t - x[i].cycle() + 1, 0), static_cast<int>(w[i]));
    }
    return sum;
}

inline SpikeTime first_crossing(const std::vector<std::uint8_t>& w, const Volley& x, int theta) {
    for (int t = 0; t < kGammaCycles; ++t)
        if (potential(w, x, t) >= theta) return SpikeTime(t);
    return SpikeTime::absent();
}

inline Volley random_volley(std::mt19937_64& gen, int p, double density) {
    std::bernoulli_distribution on(density);
    std::uniform_int_distribution<int> t(0, kLatestArrival);
    Volley v(static_cast<std::size_t>(p));
    for (auto& s : v) s = on(gen) ? SpikeTime(t(gen)) : SpikeTime::absent();
    return v;
}

inline std::vector<std::uint8_t> random_weights(std::mt19937_64& gen, int p) {
    std::uniform_int_distribution<int> d(0, kWMax);
    std::vector<std::uint8_t> w(static_cast<std::size_t>(p));
    for (auto& x : w) x = static_cast<std::uint8_t>(d(gen));
    return w;
}

// Three-sigma binomial band around an expected rate.
inline bool within_three_sigma(std::int64_t hits, std::int64_t n, double rate) {
    const double sigma = std::sqrt(rate * (1 - rate) / static_cast<double>(n));
    return std::abs(static_cast<double>(hits) / static_cast<double>(n) - rate) <= 3 * sigma + 1e-12;
}

}  // namespace tnn::testing

#endif  // TNN_TEST_ORACLES_HPP
