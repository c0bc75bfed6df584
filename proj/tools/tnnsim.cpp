// tnnsim: command-line driver for the column simulator.
//
//   tnnsim train       supervised (R-STDP) or unsupervised online training
//   tnnsim incremental hidden-class acquisition experiment
//   tnnsim cost        gate / area / time / power estimate for a column
//   tnnsim equiv       cycle-accurate vs functional engine comparison

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "tnn/errors.hpp"
#include "tnn/experiment.hpp"

namespace {

enum ExitCode : int { kOk = 0, kFailure = 1, kConfig = 2, kData = 3, kDivergence = 4, kIo = 5 };

// Every ExperimentConfig key is exposed as --key; values are applied after the
// config file so the command line wins.
struct Overrides {
    std::vector<std::pair<std::string, std::string>> values;
    std::string config_file;
};

void add_config_flags(CLI::App* cmd, Overrides& ov) {
    cmd->add_option("--config", ov.config_file, "INI config file")->check(CLI::ExistingFile);
    for (const auto& [key, section] : tnn::exp::setting_keys()) {
        std::string flag = "--" + key;
        for (auto& ch : flag) if (ch == '_') ch = '-';
        cmd->add_option_function<std::string>(
               flag, [&ov, key = key](const std::string& v) { ov.values.emplace_back(key, v); },
               "[" + section + "] " + key)
            ->type_name("VALUE");
    }
}

tnn::exp::ExperimentConfig build_config(const Overrides& ov) {
    tnn::exp::ExperimentConfig cfg;
    if (!ov.config_file.empty()) tnn::exp::load_config_file(cfg, ov.config_file);
    for (const auto& [k, v] : ov.values) tnn::exp::apply_setting(cfg, k, v);
    cfg.validate();
    return cfg;
}

void print_metrics(const tnn::exp::ConvergenceMetrics& m, double epsilon) {
    std::cout << "window mean |dw| " << m.mean_abs_dw << " (epsilon " << epsilon << ")\n";
    std::cout << "converged: " << (m.converged_at ? "yes, at sample " + std::to_string(*m.converged_at) : "no") << "\n";
    std::cout << "class  dominant  purity  cosine  centroid\n";
    for (const auto& c : m.classes) {
        std::cout << "  " << c.label << "     " << (c.dominant ? std::to_string(*c.dominant) : "-") << "        "
                  << std::fixed << std::setprecision(3) << c.purity << "   " << c.cosine << "   "
                  << (c.centroid ? "yes" : "no") << "\n";
        std::cout.unsetf(std::ios::fixed);
    }
    std::cout << "centroid classes: " << m.centroid_classes << " / " << m.classes.size() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Temporal neural network column simulator"};
    app.require_subcommand(1);

    Overrides train_ov, inc_ov;
    auto* train = app.add_subcommand("train", "online training on an IDX dataset");
    add_config_flags(train, train_ov);
    auto* inc = app.add_subcommand("incremental", "hide one class, then learn it unsupervised");
    add_config_flags(inc, inc_ov);

    int cost_p = 64, cost_q = 8;
    std::string cost_mode = "stdp", cost_json_path;
    auto* cost = app.add_subcommand("cost", "hardware cost estimate for a column");
    cost->add_option("-p,--p", cost_p, "synapses per neuron");
    cost->add_option("-q,--q", cost_q, "neurons");
    cost->add_option("--mode", cost_mode, "stdp|rstdp")->check(CLI::IsMember({"stdp", "rstdp"}));
    cost->add_option("--json", cost_json_path, "also write the report as JSON ('-' for stdout)");

    int eq_p = 16, eq_q = 4;
    std::int64_t eq_trials = 1000;
    std::uint64_t eq_seed = 1;
    auto* equiv = app.add_subcommand("equiv", "check cycle-accurate and functional engines agree");
    equiv->add_option("-p,--p", eq_p, "synapses per neuron");
    equiv->add_option("-q,--q", eq_q, "neurons");
    equiv->add_option("--trials", eq_trials, "gamma cycles");
    equiv->add_option("--seed", eq_seed, "seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfig;
    }

    try {
        if (*train) {
            const auto cfg = build_config(train_ov);
            const auto data = tnn::exp::load_encoded(cfg);
            const auto res = tnn::exp::run_train(cfg, data, &std::cerr);
            print_metrics(res.metrics, cfg.epsilon);
            std::cout << "outputs in " << cfg.out_dir.string() << "\n";
        } else if (*inc) {
            const auto cfg = build_config(inc_ov);
            const auto data = tnn::exp::load_encoded(cfg);
            const auto res = tnn::exp::run_incremental(cfg, data, &std::cerr);
            if (res.acquired_at) {
                std::cout << "class " << cfg.hidden_class << " acquired by neuron " << res.acquiring_neuron
                          << " after " << *res.acquired_at << " unlabeled samples\n";
            } else {
                std::cout << "class " << cfg.hidden_class << " NOT_ACQUIRED\n";
            }
            std::cout << "best weight cosine to class " << cfg.hidden_class << " mean " << res.best_cosine;
            if (res.cosine_only_at) std::cout << " (cosine alone crossed " << cfg.cosine_threshold << " at sample " << *res.cosine_only_at << ")";
            std::cout << "\nfinal window: class " << cfg.hidden_class << " mostly won by "
                      << (res.final_hidden_winner ? "neuron " + std::to_string(*res.final_hidden_winner) : std::string("nobody"))
                      << " (purity " << res.final_hidden_purity << ")\n";
            std::cout << "outputs in " << cfg.out_dir.string() << "\n";
        } else if (*cost) {
            if (cost_p < 2 || cost_q < 1) throw tnn::ConfigError("cost needs p >= 2 and q >= 1");
            const auto mode = cost_mode == "rstdp" ? tnn::LearningMode::Rstdp : tnn::LearningMode::Stdp;
            const auto s = tnn::exp::estimate_cost(cost_p, cost_q, mode);
            tnn::exp::print_cost_table(std::cout, s, cost_p, cost_q, mode);
            if (!cost_json_path.empty()) {
                const std::string j = tnn::exp::cost_json(s, cost_p, cost_q, mode);
                if (cost_json_path == "-") {
                    std::cout << j << "\n";
                } else {
                    std::ofstream out(cost_json_path);
                    if (!out) throw tnn::IoError("cannot write " + cost_json_path);
                    out << j << "\n";
                }
            }
        } else if (*equiv) {
            const auto r = tnn::exp::check_equivalence(eq_p, eq_q, eq_trials, eq_seed);
            if (r.pass) {
                std::cout << "PASS " << eq_p << "x" << eq_q << " over " << r.trials << " gamma cycles\n";
            } else {
                std::cout << "FAIL " << eq_p << "x" << eq_q << " diverged at gamma cycle " << *r.first_divergence
                          << ": " << r.diff << "\n";
                return kDivergence;
            }
        }
    } catch (const tnn::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const tnn::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kData;
    } catch (const tnn::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFailure;
    }
    return kOk;
}
