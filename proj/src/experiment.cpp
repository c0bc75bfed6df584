#include "tnn/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "tnn/errors.hpp"

namespace tnn::exp {

namespace {

constexpr int kClasses = 10;

ColumnConfig column_config(const ExperimentConfig& cfg) {
    ColumnConfig c;
    c.p = cfg.p;
    c.q = cfg.q;
    c.theta = cfg.theta;
    c.params = cfg.params;
    c.mode = cfg.mode;
    c.seed = cfg.seed;
    c.rng_mode = cfg.rng_mode;
    c.initial_weight = cfg.initial_weight;
    c.class_map.assign(kClasses, -1);
    for (int k = 0; k < std::min(kClasses, cfg.q); ++k) c.class_map[k] = k;
    return c;
}

void check_geometry(const ExperimentConfig& cfg, const EncodedSet& data) {
    if (data.volleys.empty()) throw DataError("dataset is empty");
    if (static_cast<int>(data.volleys.front().size()) != cfg.p) {
        throw ConfigError("column has p = " + std::to_string(cfg.p) + " inputs but encoded images have " +
                          std::to_string(data.volleys.front().size()) + " pixels");
    }
    if (cfg.mode == LearningMode::Rstdp && cfg.q < kClasses) {
        throw ConfigError("R-STDP training maps digit d to neuron d and needs q >= 10");
    }
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
}

void snapshot(const ExperimentConfig& cfg, const RunOutput& out, const Column& col, std::int64_t sample, int side) {
    if (out.dir.empty() || cfg.export_every <= 0 || (sample + 1) % cfg.export_every != 0) return;
    std::ostringstream name;
    name << "sample_" << std::setw(7) << std::setfill('0') << (sample + 1);
    io::export_weights(out.dir / "snapshots" / name.str(), col.weights(), side);
}

nlohmann::ordered_json metrics_json(const ConvergenceMetrics& m) {
    nlohmann::ordered_json j;
    j["window"] = m.window;
    j["window_mean_abs_dw"] = m.mean_abs_dw;
    j["converged"] = m.converged_at.has_value();
    j["converged_at"] = m.converged_at ? nlohmann::ordered_json(*m.converged_at) : nlohmann::ordered_json(nullptr);
    j["centroid_classes"] = m.centroid_classes;
    auto& classes = j["classes"] = nlohmann::ordered_json::array();
    for (const auto& c : m.classes) {
        nlohmann::ordered_json cj;
        cj["label"] = c.label;
        cj["samples"] = c.samples;
        cj["dominant"] = c.dominant ? nlohmann::ordered_json(*c.dominant) : nlohmann::ordered_json(nullptr);
        cj["purity"] = c.purity;
        cj["cosine"] = c.cosine;
        cj["centroid"] = c.centroid;
        classes.push_back(cj);
    }
    return j;
}

int image_side(int p) {
    const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(p))));
    return side * side == p ? side : 0;
}

void export_if_square(const fs::path& dir, const WeightMatrix& w) {
    if (const int side = image_side(static_cast<int>(w.rows())); side > 0) {
        io::export_weights(dir, w, side);
    } else {
        io::ensure_directory(dir);
        io::write_weights_csv(dir / "weights.csv", w);
    }
}

}  // namespace

// ---------------------------------------------------------------------------

EncodedSet encode_dataset(const io::Dataset& data, const io::EncoderConfig& enc) {
    EncodedSet set;
    set.labels = data.labels;
    set.volleys.reserve(data.images.size());
    for (const auto& img : data.images) {
        const io::GrayImage small = (img.rows() == 28 && img.cols() == 28) ? io::resize_16(img) : img;
        set.side = static_cast<int>(small.rows());
        set.volleys.push_back(io::encode_image(small, enc));
    }
    return set;
}

EncodedSet load_encoded(const ExperimentConfig& cfg) {
    if (cfg.images.empty() || cfg.labels.empty()) throw ConfigError("dataset paths (images, labels) are required");
    io::EncoderConfig enc;
    enc.cutoff = cfg.cutoff;
    return encode_dataset(io::read_idx(cfg.images, cfg.labels), enc);
}

Eigen::VectorXd presence(const Volley& v) {
    Eigen::VectorXd x(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) x(static_cast<Eigen::Index>(i)) = v[i].present() ? 1.0 : 0.0;
    return x;
}

double cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const double na = a.norm(), nb = b.norm();
    if (na == 0.0 || nb == 0.0) return 0.0;
    return a.dot(b) / (na * nb);
}

Eigen::MatrixXd class_means(const EncodedSet& set, int classes) {
    const Eigen::Index p = set.volleys.empty() ? 0 : static_cast<Eigen::Index>(set.volleys.front().size());
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(p, classes);
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(classes);
    for (std::size_t k = 0; k < set.volleys.size(); ++k) {
        const int c = set.labels[k];
        if (c < 0 || c >= classes) continue;
        sums.col(c) += presence(set.volleys[k]);
        counts(c) += 1;
    }
    for (int c = 0; c < classes; ++c) {
        if (counts(c) > 0) sums.col(c) /= counts(c);
    }
    return sums;
}

// ---------------------------------------------------------------------------

ConvergenceTracker::ConvergenceTracker(int window, double epsilon, int classes, int neurons)
    : window_(window), epsilon_(epsilon), classes_(classes), neurons_(neurons),
      dw_(static_cast<std::size_t>(window), 0.0), pairs_(static_cast<std::size_t>(window), {-1, -1}) {}

void ConvergenceTracker::record(std::int64_t sample, const GammaResult& r, std::optional<int> label) {
    const double dw = r.mean_abs_dw();
    sum_ += dw - dw_[head_];
    dw_[head_] = dw;
    pairs_[head_] = {label.value_or(-1), r.winner.value_or(-1)};
    head_ = (head_ + 1) % dw_.size();
    filled_ = std::min(filled_ + 1, dw_.size());
    if (!converged_at_ && filled_ == dw_.size() && window_mean() < epsilon_) converged_at_ = sample;
}

double ConvergenceTracker::window_mean() const {
    if (filled_ == 0) return 0.0;
    // Recompute instead of trusting the running sum, which drifts.
    double s = 0;
    for (std::size_t k = 0; k < filled_; ++k) s += dw_[k];
    return s / static_cast<double>(filled_);
}

ConvergenceMetrics ConvergenceTracker::finish(const WeightMatrix& w, const Eigen::MatrixXd& means,
                                              double cosine_threshold, double purity_threshold) const {
    ConvergenceMetrics m;
    m.window = window_;
    m.mean_abs_dw = window_mean();
    m.converged_at = converged_at_;

    const Eigen::MatrixXd wd = w.cast<double>();
    m.neuron_class_cosine = Eigen::MatrixXd::Zero(neurons_, classes_);
    for (int j = 0; j < neurons_; ++j)
        for (int c = 0; c < classes_ && c < means.cols(); ++c) m.neuron_class_cosine(j, c) = cosine(wd.col(j), means.col(c));

    Eigen::MatrixXi counts = Eigen::MatrixXi::Zero(classes_, neurons_);
    Eigen::VectorXi totals = Eigen::VectorXi::Zero(classes_);
    for (std::size_t k = 0; k < filled_; ++k) {
        const auto [label, winner] = pairs_[k];
        if (label < 0 || label >= classes_) continue;
        ++totals(label);
        if (winner >= 0) ++counts(label, winner);
    }
    for (int c = 0; c < classes_; ++c) {
        ClassReport rep;
        rep.label = c;
        rep.samples = totals(c);
        if (totals(c) > 0) {
            Eigen::Index best = 0;
            const int top = counts.row(c).maxCoeff(&best);
            if (top > 0) {
                rep.dominant = static_cast<int>(best);
                rep.purity = static_cast<double>(top) / totals(c);
                rep.cosine = m.neuron_class_cosine(best, c);
            }
        }
        rep.centroid = rep.dominant && rep.purity >= purity_threshold && rep.cosine >= cosine_threshold;
        m.centroid_classes += rep.centroid;
        m.classes.push_back(rep);
    }
    return m;
}

// ---------------------------------------------------------------------------

RunOutput::RunOutput(const ExperimentConfig& cfg, const std::string& kind) : dir(cfg.out_dir) {
    if (dir.empty()) return;
    io::ensure_directory(dir);
    write_text(dir / "config.ini", "# " + kind + "\n" + to_ini(cfg));
    metrics.emplace(dir / "metrics.jsonl");
}

TrainResult run_train(const ExperimentConfig& cfg, const EncodedSet& data, std::ostream* log) {
    cfg.validate();
    check_geometry(cfg, data);
    Column col(column_config(cfg));
    RunOutput out(cfg, "train");
    ConvergenceTracker tracker(cfg.window, cfg.epsilon, kClasses, cfg.q);
    const Eigen::MatrixXd means = class_means(data, kClasses);
    const std::size_t n = data.volleys.size();

    for (std::int64_t s = 0; s < cfg.samples; ++s) {
        const std::size_t k = static_cast<std::size_t>(s) % n;
        const int label = data.labels[k];
        const std::optional<int> supervision =
            cfg.mode == LearningMode::Rstdp ? std::optional<int>(label) : std::nullopt;
        const GammaResult r = col.step(cfg.engine, data.volleys[k], supervision);
        tracker.record(s, r, label);
        if (out.metrics) out.metrics->write({s, r.winner, label, r.reward, r.mean_abs_dw()});
        snapshot(cfg, out, col, s, data.side);
        if (log && (s + 1) % 1000 == 0) {
            *log << "sample " << (s + 1) << "  window mean |dw| " << tracker.window_mean() << "\n";
        }
    }

    TrainResult result;
    result.samples = cfg.samples;
    result.weights = col.weights();
    result.metrics = tracker.finish(result.weights, means, cfg.cosine_threshold, cfg.purity_threshold);

    if (!out.dir.empty()) {
        export_if_square(out.dir, result.weights);
        nlohmann::ordered_json summary;
        summary["experiment"] = "train";
        summary["samples"] = result.samples;
        summary["engine"] = to_string(cfg.engine);
        summary["mode"] = to_string(cfg.mode);
        summary["seed"] = cfg.seed;
        summary["epsilon"] = cfg.epsilon;
        summary["convergence"] = metrics_json(result.metrics);
        write_text(out.dir / "summary.json", summary.dump(2) + "\n");
    }
    return result;
}

IncrementalResult run_incremental(const ExperimentConfig& cfg, const EncodedSet& data, std::ostream* log) {
    cfg.validate();
    check_geometry(cfg, data);
    if (cfg.hidden_class < 0 || cfg.hidden_class >= kClasses) throw ConfigError("hidden_class outside 0..9");
    if (std::all_of(data.labels.begin(), data.labels.end(), [&](int l) { return l == cfg.hidden_class; })) {
        throw DataError("dataset holds no samples outside the hidden class");
    }

    ColumnConfig cc = column_config(cfg);
    cc.mode = LearningMode::Rstdp;
    cc.class_map[cfg.hidden_class] = -1;
    Column col(cc);
    RunOutput out(cfg, "incremental");
    const Eigen::MatrixXd means = class_means(data, kClasses);
    const std::size_t n = data.volleys.size();
    std::int64_t global = 0;

    IncrementalResult result;
    if (!cfg.checkpoint.empty()) {
        if (!fs::exists(cfg.checkpoint)) throw DataError("checkpoint " + cfg.checkpoint.string() + " not found");
        col.set_weights(io::read_weights_csv(cfg.checkpoint));
    } else {
        // Phase 1: supervised on every class but the hidden one.
        std::int64_t done = 0;
        for (std::size_t k = 0; done < cfg.phase1_samples; k = (k + 1) % n) {
            const int label = data.labels[k];
            if (label == cfg.hidden_class) continue;
            const GammaResult r = col.step(cfg.engine, data.volleys[k], label);
            if (out.metrics) out.metrics->write({global, r.winner, label, r.reward, r.mean_abs_dw()});
            ++done;
            ++global;
        }
        if (log) *log << "phase 1 done after " << done << " samples\n";
    }
    result.phase1_weights = col.weights();
    if (!out.dir.empty()) export_if_square(out.dir / "phase1", result.phase1_weights);

    // Phase 2: unlabeled stream, plain STDP.
    col.set_mode(LearningMode::Stdp);
    const int hidden = cfg.hidden_class;
    const Eigen::VectorXd target = means.col(hidden);
    const std::size_t window = static_cast<std::size_t>(cfg.acquire_window);
    std::vector<std::pair<int, int>> recent(window, {-1, -1});  // (label, winner or -1)
    std::size_t filled = 0, head = 0;
    Eigen::MatrixXi counts = Eigen::MatrixXi::Zero(kClasses, cfg.q + 1);  // last column: no winner

    const auto dominant = [&](int label) -> std::pair<int, double> {
        const int total = counts.row(label).sum();
        if (total == 0) return {-1, 0.0};
        Eigen::Index best = 0;
        const int top = counts.row(label).maxCoeff(&best);
        if (best == cfg.q) return {-1, static_cast<double>(top) / total};
        return {static_cast<int>(best), static_cast<double>(top) / total};
    };

    std::int64_t done = 0;
    for (std::size_t k = 0; done < cfg.phase2_samples; k = (k + 1) % n) {
        const int label = data.labels[k];
        if (!cfg.phase2_include_hidden && label == hidden) continue;
        const GammaResult r = col.step(cfg.engine, data.volleys[k]);
        if (out.metrics) out.metrics->write({global, r.winner, label, r.reward, r.mean_abs_dw()});

        if (filled == window) --counts(recent[head].first, recent[head].second);
        recent[head] = {label, r.winner.value_or(cfg.q)};
        ++counts(label, recent[head].second);
        head = (head + 1) % window;
        filled = std::min(filled + 1, window);

        const Eigen::MatrixXd wd = col.weights().cast<double>();
        double best = 0;
        for (int j = 0; j < cfg.q; ++j) best = std::max(best, cosine(wd.col(j), target));
        result.best_cosine = std::max(result.best_cosine, best);
        if (!result.cosine_only_at && best >= cfg.cosine_threshold) result.cosine_only_at = done;

        const auto [winner, purity] = dominant(hidden);
        result.final_hidden_winner = winner >= 0 ? std::optional<int>(winner) : std::nullopt;
        result.final_hidden_purity = purity;
        if (!result.acquired_at && filled == window && winner >= 0 && purity >= cfg.purity_threshold &&
            cosine(wd.col(winner), target) >= cfg.cosine_threshold) {
            bool exclusive = true;
            for (int c = 0; c < kClasses && exclusive; ++c) exclusive = c == hidden || dominant(c).first != winner;
            if (exclusive) {
                result.acquired_at = done;
                result.acquiring_neuron = winner;
                if (log) *log << "hidden class acquired by neuron " << winner << " at phase-2 sample " << done << "\n";
            }
        }
        snapshot(cfg, out, col, global, data.side);
        ++done;
        ++global;
    }
    result.final_weights = col.weights();

    if (!out.dir.empty()) {
        export_if_square(out.dir, result.final_weights);
        nlohmann::ordered_json summary;
        summary["experiment"] = "incremental";
        summary["hidden_class"] = cfg.hidden_class;
        summary["phase1_samples"] = cfg.checkpoint.empty() ? cfg.phase1_samples : 0;
        summary["phase2_samples"] = cfg.phase2_samples;
        summary["acquired"] = result.acquired_at.has_value();
        summary["acquired_at"] =
            result.acquired_at ? nlohmann::ordered_json(*result.acquired_at) : nlohmann::ordered_json("NOT_ACQUIRED");
        summary["acquiring_neuron"] = result.acquiring_neuron;
        summary["best_cosine"] = result.best_cosine;
        summary["cosine_threshold"] = cfg.cosine_threshold;
        summary["purity_threshold"] = cfg.purity_threshold;
        summary["acquire_window"] = cfg.acquire_window;
        summary["cosine_only_at"] =
            result.cosine_only_at ? nlohmann::ordered_json(*result.cosine_only_at) : nlohmann::ordered_json(nullptr);
        summary["final_hidden_winner"] = result.final_hidden_winner ? nlohmann::ordered_json(*result.final_hidden_winner)
                                                                    : nlohmann::ordered_json(nullptr);
        summary["final_hidden_purity"] = result.final_hidden_purity;
        write_text(out.dir / "summary.json", summary.dump(2) + "\n");
    }
    return result;
}

// ---------------------------------------------------------------------------

CostSummary estimate_cost(int p, int q, LearningMode mode) {
    CostSummary s;
    s.report = cost::column_cost(p, q, mode);
    const auto fit = cost::calibrate(cost::reference_rows(LearningMode::Stdp));
    s.physical = cost::estimate_physical(s.report, fit.calibration);
    s.rstdp_assumption = mode == LearningMode::Rstdp;
    for (const auto& row : cost::reference_rows()) {
        if (row.p == p && row.q == q && row.mode == mode) s.reference = row;
    }
    return s;
}

void print_cost_table(std::ostream& out, const CostSummary& s, int p, int q, LearningMode mode) {
    const auto flags = out.flags();
    out << std::fixed;
    out << "column " << p << " x " << q << " (" << to_string(mode) << ")\n";
    out << std::left << std::setw(12) << "" << std::right << std::setw(14) << "gates" << std::setw(12) << "T [gd]"
        << std::setw(12) << "area[mm2]" << std::setw(12) << "T [ns]" << std::setw(12) << "power[mW]" << "\n";
    out << std::left << std::setw(12) << "estimate" << std::right << std::setw(14) << std::setprecision(0)
        << s.report.effective_gates() << std::setw(12) << s.report.time_gate_delays << std::setprecision(3)
        << std::setw(12) << s.physical.area_mm2 << std::setw(12) << s.physical.time_ns << std::setw(12)
        << s.physical.power_mw << "\n";
    if (s.reference) {
        out << std::left << std::setw(12) << "synthesized" << std::right << std::setw(14) << s.reference->gates
            << std::setw(12) << "-" << std::setprecision(3) << std::setw(12) << s.reference->area_mm2 << std::setw(12)
            << s.reference->time_ns << std::setw(12) << s.reference->power_mw << "\n";
    }
    out << "critical path " << s.report.delay_gates << " gates, dynamic " << s.report.p_dynamic_units
        << " transitions\n";
    if (s.rstdp_assumption) out << "note: R-STDP figures are the STDP equations x 1.05 (assumed overhead)\n";
    out.flags(flags);
}

std::string cost_json(const CostSummary& s, int p, int q, LearningMode mode) {
    nlohmann::ordered_json j;
    j["p"] = p;
    j["q"] = q;
    j["mode"] = to_string(mode);
    j["gates"] = s.report.gates;
    j["effective_gates"] = s.report.effective_gates();
    j["multiplier"] = s.report.multiplier;
    j["delay_gates"] = s.report.delay_gates;
    j["time_gate_delays"] = s.report.time_gate_delays;
    j["p_static_units"] = s.report.p_static_units;
    j["p_dynamic_units"] = s.report.p_dynamic_units;
    j["area_mm2"] = s.physical.area_mm2;
    j["time_ns"] = s.physical.time_ns;
    j["power_mw"] = s.physical.power_mw;
    j["rstdp_overhead_assumed"] = s.rstdp_assumption;
    if (s.reference) {
        j["reference"] = {{"gates", s.reference->gates},
                          {"area_mm2", s.reference->area_mm2},
                          {"time_ns", s.reference->time_ns},
                          {"power_mw", s.reference->power_mw}};
    }
    return j.dump(2);
}

// ---------------------------------------------------------------------------

namespace {

std::string describe_diff(const GammaResult& a, const GammaResult& b, const Column& ca, const Column& cb) {
    std::ostringstream d;
    const auto winner = [](const std::optional<int>& w) { return w ? std::to_string(*w) : std::string("none"); };
    if (a.winner != b.winner) d << "winner cycle=" << winner(a.winner) << " functional=" << winner(b.winner) << "; ";
    for (std::size_t j = 0; j < a.pre_inhibition.size() && j < b.pre_inhibition.size(); ++j) {
        if (a.pre_inhibition[j] != b.pre_inhibition[j]) {
            d << "neuron " << j << " fires at " << a.pre_inhibition[j].to_string() << " vs "
              << b.pre_inhibition[j].to_string() << "; ";
        }
        if (a.output[j] != b.output[j]) {
            d << "output " << j << " " << a.output[j].to_string() << " vs " << b.output[j].to_string() << "; ";
        }
    }
    if (a.weight_changes != b.weight_changes) {
        d << "weight changes " << a.weight_changes << " vs " << b.weight_changes << "; ";
    }
    for (int j = 0; j < ca.q(); ++j) {
        for (int i = 0; i < ca.p(); ++i) {
            if (ca.synapse(i, j).weight != cb.synapse(i, j).weight) {
                d << "first weight mismatch at input " << i << " neuron " << j << ": "
                  << int(ca.synapse(i, j).weight) << " vs " << int(cb.synapse(i, j).weight) << "; ";
                return d.str();
            }
        }
    }
    return d.str();
}

}  // namespace

EquivalenceResult check_equivalence(int p, int q, std::int64_t trials, std::uint64_t seed, double line_density,
                                    const Perturbation& perturb) {
    if (p < 1 || q < 1) throw ConfigError("equivalence check needs p >= 1 and q >= 1");
    if (trials < 1) throw ConfigError("trials must be at least 1");
    if (!(line_density >= 0.0 && line_density <= 1.0)) throw ConfigError("line density must lie in [0, 1]");
    std::mt19937_64 gen(seed);

    ColumnConfig cc;
    cc.p = p;
    cc.q = q;
    cc.theta = std::uniform_int_distribution<int>(std::max(1, p / 4), std::max(1, p))(gen);
    cc.params = {0.6, 0.5, 0.05, 0.05};
    cc.seed = seed;
    cc.initial_weight = -1;
    Column cycle(cc), functional(cc);

    std::bernoulli_distribution line_on(line_density);
    std::uniform_int_distribution<int> when(0, kLatestArrival), label_of(0, q - 1);

    EquivalenceResult res;
    for (std::int64_t t = 0; t < trials; ++t) {
        const LearningMode mode = t < (trials + 1) / 2 ? LearningMode::Stdp : LearningMode::Rstdp;
        cycle.set_mode(mode);
        functional.set_mode(mode);
        Volley v(static_cast<std::size_t>(p));
        for (auto& s : v) s = line_on(gen) ? SpikeTime(when(gen)) : SpikeTime::absent();
        const int label = label_of(gen);

        const GammaResult a = cycle.step(Engine::Cycle, v, label);
        GammaResult b = functional.step(Engine::Functional, v, label);
        if (perturb) perturb(t, b);
        res.trials = t + 1;
        if (!(a == b) || !(cycle == functional)) {
            res.pass = false;
            res.first_divergence = t;
            res.diff = describe_diff(a, b, cycle, functional);
            if (res.diff.empty()) res.diff = "random-source state differs";
            break;
        }
    }
    return res;
}

}  // namespace tnn::exp
