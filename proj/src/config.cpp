#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "tnn/errors.hpp"
#include "tnn/experiment.hpp"

namespace tnn::exp {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
    T out{};
    const char* first = value.data();
    const char* last = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc{} || ptr != last) throw ConfigError("bad value '" + value + "' for " + key);
    return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("bad boolean '" + v + "' for " + key);
}

std::string fmt_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

struct Setting {
    std::string section;
    std::function<void(ExperimentConfig&, const std::string&, const std::string&)> set;
    std::function<std::string(const ExperimentConfig&)> get;
};

template <typename T>
Setting int_setting(const char* section, T ExperimentConfig::*field) {
    return {section, [field](ExperimentConfig& c, const std::string& k, const std::string& v) {
                c.*field = parse_number<T>(k, v);
            },
            [field](const ExperimentConfig& c) { return std::to_string(c.*field); }};
}

Setting double_setting(const char* section, double ExperimentConfig::*field) {
    return {section, [field](ExperimentConfig& c, const std::string& k, const std::string& v) {
                c.*field = parse_number<double>(k, v);
            },
            [field](const ExperimentConfig& c) { return fmt_double(c.*field); }};
}

Setting mu_setting(double PlasticityParams::*field) {
    return {"learning", [field](ExperimentConfig& c, const std::string& k, const std::string& v) {
                c.params.*field = parse_number<double>(k, v);
            },
            [field](const ExperimentConfig& c) { return fmt_double(c.params.*field); }};
}

Setting path_setting(const char* section, fs::path ExperimentConfig::*field) {
    return {section, [field](ExperimentConfig& c, const std::string&, const std::string& v) { c.*field = v; },
            [field](const ExperimentConfig& c) { return (c.*field).string(); }};
}

const std::map<std::string, Setting>& settings() {
    static const std::map<std::string, Setting> table = [] {
        std::map<std::string, Setting> t;
        t["p"] = int_setting("column", &ExperimentConfig::p);
        t["q"] = int_setting("column", &ExperimentConfig::q);
        t["theta"] = int_setting("column", &ExperimentConfig::theta);
        t["initial_weight"] = int_setting("column", &ExperimentConfig::initial_weight);
        t["rng_mode"] = {"column",
                         [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                             if (v == "independent") c.rng_mode = RngMode::Independent;
                             else if (v == "shared") c.rng_mode = RngMode::Shared;
                             else throw ConfigError("bad value '" + v + "' for " + k + " (independent|shared)");
                         },
                         [](const ExperimentConfig& c) {
                             return std::string(c.rng_mode == RngMode::Independent ? "independent" : "shared");
                         }};
        t["mu_capture"] = mu_setting(&PlasticityParams::mu_capture);
        t["mu_backoff"] = mu_setting(&PlasticityParams::mu_backoff);
        t["mu_search"] = mu_setting(&PlasticityParams::mu_search);
        t["mu_min"] = mu_setting(&PlasticityParams::mu_min);
        t["mode"] = {"learning",
                     [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                         if (v == "stdp") c.mode = LearningMode::Stdp;
                         else if (v == "rstdp") c.mode = LearningMode::Rstdp;
                         else throw ConfigError("bad value '" + v + "' for " + k + " (stdp|rstdp)");
                     },
                     [](const ExperimentConfig& c) { return std::string(to_string(c.mode)); }};
        t["seed"] = int_setting("learning", &ExperimentConfig::seed);
        t["images"] = path_setting("data", &ExperimentConfig::images);
        t["labels"] = path_setting("data", &ExperimentConfig::labels);
        t["cutoff"] = int_setting("data", &ExperimentConfig::cutoff);
        t["samples"] = int_setting("run", &ExperimentConfig::samples);
        t["engine"] = {"run",
                       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                           if (v == "cycle") c.engine = Engine::Cycle;
                           else if (v == "functional") c.engine = Engine::Functional;
                           else throw ConfigError("bad value '" + v + "' for " + k + " (cycle|functional)");
                       },
                       [](const ExperimentConfig& c) { return std::string(to_string(c.engine)); }};
        t["out_dir"] = path_setting("run", &ExperimentConfig::out_dir);
        t["export_every"] = int_setting("run", &ExperimentConfig::export_every);
        t["window"] = int_setting("run", &ExperimentConfig::window);
        t["epsilon"] = double_setting("run", &ExperimentConfig::epsilon);
        t["cosine_threshold"] = double_setting("run", &ExperimentConfig::cosine_threshold);
        t["purity_threshold"] = double_setting("run", &ExperimentConfig::purity_threshold);
        t["hidden_class"] = int_setting("incremental", &ExperimentConfig::hidden_class);
        t["phase1_samples"] = int_setting("incremental", &ExperimentConfig::phase1_samples);
        t["phase2_samples"] = int_setting("incremental", &ExperimentConfig::phase2_samples);
        t["checkpoint"] = path_setting("incremental", &ExperimentConfig::checkpoint);
        t["acquire_window"] = int_setting("incremental", &ExperimentConfig::acquire_window);
        t["phase2_include_hidden"] = {
            "incremental",
            [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                c.phase2_include_hidden = parse_bool(k, v);
            },
            [](const ExperimentConfig& c) { return std::string(c.phase2_include_hidden ? "true" : "false"); }};
        t["trials"] = int_setting("equiv", &ExperimentConfig::trials);
        return t;
    }();
    return table;
}

}  // namespace

void ExperimentConfig::validate() const {
    try {
        params.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (p < 1 || q < 1) throw ConfigError("column geometry needs p >= 1 and q >= 1");
    if (theta < 1) throw ConfigError("theta must be positive");
    if (initial_weight < -1 || initial_weight > kWMax) throw ConfigError("initial_weight must be -1 or 0..7");
    if (samples < 1) throw ConfigError("sample budget must be at least 1");
    if (window < 1) throw ConfigError("window must be at least 1");
    if (epsilon < 0) throw ConfigError("epsilon must be non-negative");
    if (cutoff < 0 || cutoff > 255) throw ConfigError("cutoff outside 0..255");
    if (export_every < 0) throw ConfigError("export_every must be non-negative");
    if (!(cosine_threshold >= 0 && cosine_threshold <= 1)) throw ConfigError("cosine_threshold outside [0, 1]");
    if (!(purity_threshold >= 0 && purity_threshold <= 1)) throw ConfigError("purity_threshold outside [0, 1]");
    if (phase1_samples < 0 || phase2_samples < 1) throw ConfigError("incremental phase budgets out of range");
    if (acquire_window < 1) throw ConfigError("acquire_window must be at least 1");
    if (trials < 1) throw ConfigError("trials must be at least 1");
}

void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
    const auto it = settings().find(key);
    if (it == settings().end()) throw ConfigError("unknown setting '" + key + "'");
    it->second.set(cfg, key, trim(value));
}

std::vector<std::pair<std::string, std::string>> setting_keys() {
    std::vector<std::pair<std::string, std::string>> keys;
    for (const auto& [k, s] : settings()) keys.emplace_back(k, s.section);
    return keys;
}

void load_config_file(ExperimentConfig& cfg, const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line.substr(0, line.find_first_of("#;")));
        if (line.empty()) continue;
        const std::string where = path.string() + ":" + std::to_string(lineno);
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(where + ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const auto it = settings().find(key);
        if (it == settings().end()) throw ConfigError(where + ": unknown setting '" + key + "'");
        if (!section.empty() && section != it->second.section) {
            throw ConfigError(where + ": '" + key + "' belongs in [" + it->second.section + "], not [" + section + "]");
        }
        it->second.set(cfg, key, trim(line.substr(eq + 1)));
    }
}

std::string to_ini(const ExperimentConfig& cfg) {
    std::map<std::string, std::vector<std::pair<std::string, std::string>>> by_section;
    for (const auto& [k, s] : settings()) by_section[s.section].emplace_back(k, s.get(cfg));
    std::ostringstream out;
    for (const char* section : {"column", "learning", "data", "run", "incremental", "equiv"}) {
        out << "[" << section << "]\n";
        for (const auto& [k, v] : by_section[section]) out << k << " = " << v << "\n";
        out << "\n";
    }
    return out.str();
}

}  // namespace tnn::exp
