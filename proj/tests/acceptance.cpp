// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "test_oracles.hpp"
#include "tnn/column.hpp"
#include "tnn/costmodel.hpp"
#include "tnn/experiment.hpp"
#include "tnn/neuron.hpp"
#include "tnn/plasticity.hpp"
#include "tnn/synapse.hpp"

using namespace tnn;
namespace fs = std::filesystem;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

const fs::path kMnist = TNN_MNIST_DIR;

std::string fmt(double v, int digits = 4) {
    std::ostringstream s;
    s.precision(digits);
    s << v;
    return s.str();
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

exp::ExperimentConfig mnist_defaults(const std::string& out) {
    exp::ExperimentConfig cfg;
    cfg.images = kMnist / "images-idx3-ubyte";
    cfg.labels = kMnist / "labels-idx1-ubyte";
    cfg.out_dir = out.empty() ? fs::path{} : fs::temp_directory_path() / out;
    return cfg;
}

const exp::EncodedSet& mnist() {
    static const exp::EncodedSet set = exp::load_encoded(mnist_defaults(""));
    return set;
}

// 1 -------------------------------------------------------------------------
Verdict synapse_exhaustive() {
    int cases = 0;
    for (int w = 0; w <= kWMax; ++w) {
        for (int a = -1; a <= kLatestArrival; ++a) {
            const SpikeTime arrival = a < 0 ? SpikeTime::absent() : SpikeTime(a);
            SynapseState s = SynapseState::with_weight(w);
            int ones = 0, first = -1;
            bool contiguous = true;
            for (int c = 0; c < kGammaCycles; ++c) {
                const bool bit = synapse_step(s, pulse_bit(arrival, c));
                if (bit) {
                    if (first < 0) first = c;
                    contiguous &= c == first + ones;
                    ++ones;
                }
            }
            const int expected = arrival.present() ? w : 0;
            const bool start_ok = expected == 0 || first == arrival.cycle();
            if (ones != expected || !start_ok || !contiguous || s.counter != w || s.weight != w) {
                return {false, "w=" + std::to_string(w) + " arrival=" + arrival.to_string()};
            }
            ++cases;
        }
    }
    return {true, std::to_string(cases) + " (weight, arrival) pairs"};
}

// 2 -------------------------------------------------------------------------
Verdict neuron_equivalence() {
    int cases = 0;
    for (int p : {4, 16, 64}) {
        std::mt19937_64 gen(2024 + p);
        std::uniform_int_distribution<int> theta_dist(1, p * kWMax / 2);
        for (int trial = 0; trial < 1000; ++trial) {
            const auto w = testing::random_weights(gen, p);
            const auto x = testing::random_volley(gen, p, 0.7);
            const int theta = theta_dist(gen);
            std::vector<SynapseState> syn;
            for (auto v : w) syn.push_back(SynapseState::with_weight(v));
            NeuronBody body({p, theta});
            std::vector<std::uint8_t> bits(static_cast<std::size_t>(p));
            for (int c = 0; c < kGammaCycles; ++c) {
                for (int i = 0; i < p; ++i) bits[i] = synapse_step(syn[i], pulse_bit(x[i], c));
                body.step(bits);
            }
            const SpikeTime oracle = response_oracle(w, x, theta);
            if (body.state().fired_cycle != oracle || oracle != testing::first_crossing(w, x, theta)) {
                return {false, "p=" + std::to_string(p) + " trial " + std::to_string(trial)};
            }
            ++cases;
        }
    }
    return {true, std::to_string(cases) + " randomized cases at p = 4, 16, 64"};
}

// 3 -------------------------------------------------------------------------
Verdict engine_equivalence() {
    std::string detail;
    for (auto [p, q] : {std::pair{16, 4}, std::pair{64, 8}, std::pair{256, 10}}) {
        const auto r = exp::check_equivalence(p, q, 1000, 1);
        if (!r.pass) {
            return {false, std::to_string(p) + "x" + std::to_string(q) + " diverged at " +
                               std::to_string(*r.first_divergence) + ": " + r.diff};
        }
        detail += std::to_string(p) + "x" + std::to_string(q) + " ";
    }
    return {true, detail + "x 1000 gamma cycles bit-identical"};
}

// 4 -------------------------------------------------------------------------
Verdict stdp_statistics() {
    const PlasticityParams params{0.6, 0.5, 0.02, 0.006};
    const double f = 12.0 / 49.0;
    const double gate = f + params.mu_min - f * params.mu_min;
    struct Check {
        StdpCase c;
        int sign;
        double rate;
    };
    const int n = 100000;
    std::string detail;
    for (const Check& chk : {Check{StdpCase::Capture, 1, params.mu_capture * gate},
                             Check{StdpCase::Backoff, -1, params.mu_backoff * gate},
                             Check{StdpCase::Search, 1, params.mu_search}}) {
        RandomSource rng = RandomSource::derived(4, static_cast<std::uint64_t>(chk.c));
        std::int64_t hits = 0;
        for (int k = 0; k < n; ++k) {
            const int d = stdp_delta(chk.c, 4, params, rng);
            if (d != 0 && d != chk.sign) return {false, std::string(to_string(chk.c)) + " produced wrong sign"};
            hits += d != 0;
        }
        const double sigma = std::sqrt(chk.rate * (1 - chk.rate) / n);
        const double z = (static_cast<double>(hits) / n - chk.rate) / sigma;
        detail += std::string(to_string(chk.c)) + " z=" + fmt(z, 3) + " ";
        if (!testing::within_three_sigma(hits, n, chk.rate)) return {false, detail};
    }
    return {true, detail + "(|z| <= 3)"};
}

// 5 -------------------------------------------------------------------------
Verdict rstdp_regimes() {
    const PlasticityParams on{1.0, 1.0, 1.0, 1.0};
    RandomSource rng(5);
    if (rstdp_delta(StdpCase::Search, 3, Reward::Plus, on, rng) != 0) return {false, "(SEARCH, PLUS) != 0"};
    if (rstdp_delta(StdpCase::Capture, 3, Reward::Minus, {1.0, 0.0, 0.0, 1.0}, rng) != -1)
        return {false, "(CAPTURE, MINUS) != -1"};
    for (StdpCase c : {StdpCase::Capture, StdpCase::Backoff, StdpCase::Search, StdpCase::AbsentInput, StdpCase::Idle}) {
        const int d = rstdp_delta(c, 3, Reward::Zero, on, rng);
        if ((d != 0) != (c == StdpCase::Search)) return {false, std::string("ZERO regime, ") + to_string(c)};
    }
    return {true, "(SEARCH,+1)=0, (CAPTURE,-1)=-1, ZERO acts on SEARCH only"};
}

// 6 -------------------------------------------------------------------------
Verdict wta_exhaustive() {
    std::vector<SpikeTime> domain;
    for (int t = 0; t <= kLatestArrival; ++t) domain.emplace_back(t);
    domain.push_back(SpikeTime::absent());
    const int n = static_cast<int>(domain.size());
    int tuples = 0;
    for (int code = 0; code < n * n * n * n; ++code) {
        Volley in(4);
        for (int j = 0, rest = code; j < 4; ++j, rest /= n) in[j] = domain[rest % n];
        const Volley out = wta_inhibit(in);
        int winner = -1, survivors = 0;
        for (int j = 0; j < 4; ++j)
            if (in[j].present() && (winner < 0 || in[j].cycle() < in[winner].cycle())) winner = j;
        for (int j = 0; j < 4; ++j) {
            survivors += out[j].present();
            if (out[j] != (j == winner ? in[j] : SpikeTime::absent())) return {false, "tuple " + std::to_string(code)};
        }
        if (survivors > 1) return {false, "multiple survivors"};
        ++tuples;
    }
    return {true, std::to_string(tuples) + " tuples"};
}

// 7 -------------------------------------------------------------------------
Verdict cost_regression() {
    const auto rows = cost::reference_rows(LearningMode::Stdp);
    std::string detail;
    bool ok = true;
    for (const auto& r : rows) {
        const auto g = cost::column_cost(r.p, r.q).gates;
        const double e = rel(static_cast<double>(g), static_cast<double>(r.gates));
        detail += std::to_string(r.p) + "x" + std::to_string(r.q) + " " + std::to_string(g) + "/" +
                  std::to_string(r.gates) + " (" + fmt(100 * e, 3) + "%) ";
        ok &= e <= 0.05;
    }
    for (std::size_t a = 0; a < rows.size(); ++a) {
        for (std::size_t b = a + 1; b < rows.size(); ++b) {
            const double eq = static_cast<double>(cost::column_cost(rows[b].p, rows[b].q).time_gate_delays) /
                              static_cast<double>(cost::column_cost(rows[a].p, rows[a].q).time_gate_delays);
            const double syn = rows[b].time_ns / rows[a].time_ns;
            detail += "T ratio " + fmt(eq) + " vs " + fmt(syn) + " ";
            ok &= rel(eq, syn) <= 0.10;
        }
    }
    return {ok, detail};
}

// 8 -------------------------------------------------------------------------
Verdict calibrated_estimate() {
    const auto fit = cost::calibrate(cost::reference_rows(LearningMode::Stdp));
    const auto est = cost::estimate_physical(cost::column_cost(1024, 16), fit.calibration);
    const bool ok = rel(est.area_mm2, 1.65) <= 0.05 && rel(est.time_ns, 42.30) <= 0.05 && rel(est.power_mw, 7.96) <= 0.05;
    return {ok, fmt(est.area_mm2) + " mm2, " + fmt(est.time_ns) + " ns, " + fmt(est.power_mw) +
                    " mW vs 1.65 / 42.30 / 7.96"};
}

// 9 -------------------------------------------------------------------------
Verdict online_learning() {
    exp::ExperimentConfig cfg = mnist_defaults("tnn_acceptance_train");
    cfg.samples = 20000;
    const auto r = exp::run_train(cfg, mnist());
    const auto& m = r.metrics;
    const bool ok = m.converged_at.has_value() && m.centroid_classes >= 7;
    std::string detail = "converged ";
    detail += m.converged_at ? "at sample " + std::to_string(*m.converged_at) : std::string("never");
    detail += ", final window |dw| " + fmt(m.mean_abs_dw, 3) + ", centroid classes " +
              std::to_string(m.centroid_classes) + "/10";
    fs::remove_all(cfg.out_dir);
    return {ok, detail};
}

// 10 ------------------------------------------------------------------------
Verdict incremental_acquisition() {
    exp::ExperimentConfig cfg = mnist_defaults("tnn_acceptance_incremental");
    const auto r = exp::run_incremental(cfg, mnist());
    fs::remove_all(cfg.out_dir);
    if (!r.acquired_at) {
        std::string detail = "NOT_ACQUIRED; class 9 mostly won by ";
        detail += r.final_hidden_winner ? "neuron " + std::to_string(*r.final_hidden_winner) : std::string("nobody");
        detail += " (purity " + fmt(r.final_hidden_purity, 2) + "), best weight cosine " + fmt(r.best_cosine, 3);
        if (r.cosine_only_at) detail += ", cosine alone >= 0.6 from sample " + std::to_string(*r.cosine_only_at);
        return {false, detail};
    }
    return {*r.acquired_at < 2000, "digit 9 acquired by neuron " + std::to_string(r.acquiring_neuron) +
                                        " after " + std::to_string(*r.acquired_at) + " unlabeled samples"};
}

// 11 ------------------------------------------------------------------------
Verdict determinism() {
    std::string detail;
    for (const std::string kind : {"train", "incremental"}) {
        std::string metrics[2], weights[2];
        for (int run = 0; run < 2; ++run) {
            exp::ExperimentConfig cfg = mnist_defaults("tnn_acceptance_det_" + kind + std::to_string(run));
            cfg.samples = 3000;
            cfg.phase1_samples = 2000;
            cfg.phase2_samples = 500;
            if (kind == "train") exp::run_train(cfg, mnist());
            else exp::run_incremental(cfg, mnist());
            metrics[run] = slurp(cfg.out_dir / "metrics.jsonl");
            weights[run] = slurp(cfg.out_dir / (kind == "train" ? "weights.csv" : "phase1/weights.csv"));
            fs::remove_all(cfg.out_dir);
        }
        if (metrics[0].empty() || metrics[0] != metrics[1] || weights[0] != weights[1]) return {false, kind + " differs"};
        if (!detail.empty()) detail += "; ";
        detail += kind + " " + std::to_string(metrics[0].size()) + " B metrics and weights identical";
    }
    return {true, detail};
}

}  // namespace

// Usage: acceptance [--xfail N[,N...]]
// Criteria listed with --xfail are still run and reported; the exit status is
// zero only when the failing set equals the listed set exactly.
int main(int argc, char** argv) {
    std::set<int> expected_failures;
    for (int a = 1; a < argc; ++a) {
        const std::string arg = argv[a];
        if (arg == "--xfail" && a + 1 < argc) {
            std::stringstream list(argv[++a]);
            for (std::string item; std::getline(list, item, ',');) expected_failures.insert(std::stoi(item));
        } else {
            std::fprintf(stderr, "usage: %s [--xfail N[,N...]]\n", argv[0]);
            return 2;
        }
    }

    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
        {"synapse FSM exhaustive", synapse_exhaustive},
        {"neuron cycle vs oracle", neuron_equivalence},
        {"engine equivalence", engine_equivalence},
        {"STDP statistics", stdp_statistics},
        {"R-STDP regime table", rstdp_regimes},
        {"WTA exhaustive", wta_exhaustive},
        {"cost equation regression", cost_regression},
        {"calibrated estimate", calibrated_estimate},
        {"online learning", online_learning},
        {"incremental acquisition", incremental_acquisition},
        {"determinism", determinism},
    };
    std::set<int> failed;
    int index = 0;
    for (const auto& [name, fn] : criteria) {
        ++index;
        const auto start = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = fn();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (!v.pass) failed.insert(index);
        const char* note = expected_failures.count(index) ? (v.pass ? " (listed as expected failure)" : " (expected)") : "";
        std::printf("%s %2d %-26s %s [%.1fs]%s\n", v.pass ? "PASS" : "FAIL", index, name.c_str(), v.detail.c_str(), secs,
                    note);
        std::fflush(stdout);
    }
    std::printf("%zu/%zu criteria passed\n", criteria.size() - failed.size(), criteria.size());
    if (!expected_failures.empty()) {
        std::printf("expected failures:");
        for (int k : expected_failures) std::printf(" %d", k);
        std::printf("; status %s\n", failed == expected_failures ? "matches" : "DIFFERS");
    }
    return failed == expected_failures ? 0 : 1;
}
