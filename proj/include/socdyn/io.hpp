#pragma once
// Config parsing, CSV artifact writers, and the JSON check report.  The
// config format is flat `key = value` text with `#` comments; the key set is
// closed, and both unknown and missing-but-needed keys fail loudly by name.
// Everything written here must be byte-stable: fixed key order, fixed float
// formatting, no timestamps, no environment echoes.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "socdyn/errors.hpp"
#include "socdyn/particle_sde.hpp"

namespace socdyn {

struct ExperimentConfig {
    std::string experiment;
    std::vector<int> n_values;
    std::optional<double> sigma_sq;
    std::optional<double> dt;
    std::optional<double> horizon;
    std::optional<std::int64_t> replicas;
    std::uint64_t seed = 1;
    int workers = 4;
    std::string out_dir = "out";
    double k_box = 2.0;

    double sigma_sq_or_default() const { return sigma_sq.value_or(1.0); }

    // Accessors for keys that are optional in the file but mandatory for the
    // experiment being run; the error names the missing key.
    int single_n() const {
        if (n_values.empty()) throw config_error("n", "experiment '" + experiment + "' needs n");
        return n_values.front();
    }
    double dt_required() const {
        if (!dt) throw config_error("dt", "experiment '" + experiment + "' needs dt");
        return *dt;
    }
    double horizon_required() const {
        if (!horizon)
            throw config_error("horizon", "experiment '" + experiment + "' needs horizon");
        return *horizon;
    }
    std::int64_t replicas_required() const {
        if (!replicas)
            throw config_error("replicas", "experiment '" + experiment + "' needs replicas");
        return *replicas;
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

inline double parse_double(const std::string& key, const std::string& value) {
    try {
        size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw config_error(key, "key '" + key + "': cannot parse '" + value + "' as a number");
    }
}

inline std::int64_t parse_int(const std::string& key, const std::string& value) {
    try {
        size_t used = 0;
        const std::int64_t v = std::stoll(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw config_error(key, "key '" + key + "': cannot parse '" + value + "' as an integer");
    }
}

inline std::vector<int> parse_int_list(const std::string& key, const std::string& value) {
    std::vector<int> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) throw config_error(key, "key '" + key + "': empty entry in list");
        const std::int64_t v = parse_int(key, item);
        if (v < 1 || v > (1 << 24))
            throw config_error(key, "key '" + key + "': size " + item + " out of range");
        out.push_back(static_cast<int>(v));
    }
    if (out.empty()) throw config_error(key, "key '" + key + "': empty list");
    return out;
}

} // namespace detail

inline ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig cfg;
    bool have_experiment = false;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error("", "line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (value.empty())
            throw config_error(key, "key '" + key + "' has no value");

        if (key == "experiment") {
            cfg.experiment = value;
            have_experiment = true;
        } else if (key == "n") {
            cfg.n_values = detail::parse_int_list(key, value);
        } else if (key == "sigma_sq") {
            cfg.sigma_sq = detail::parse_double(key, value);
            if (!(*cfg.sigma_sq > 0.0)) throw config_error(key, "sigma_sq must be positive");
        } else if (key == "dt") {
            cfg.dt = detail::parse_double(key, value);
            if (!(*cfg.dt > 0.0)) throw config_error(key, "dt must be positive");
        } else if (key == "horizon") {
            cfg.horizon = detail::parse_double(key, value);
            if (!(*cfg.horizon > 0.0)) throw config_error(key, "horizon must be positive");
        } else if (key == "replicas") {
            const auto r = detail::parse_int(key, value);
            if (r < 1) throw config_error(key, "replicas must be >= 1");
            cfg.replicas = r;
        } else if (key == "seed") {
            cfg.seed = static_cast<std::uint64_t>(detail::parse_int(key, value));
        } else if (key == "workers") {
            const auto w = detail::parse_int(key, value);
            if (w < 1 || w > 256) throw config_error(key, "workers must be in [1, 256]");
            cfg.workers = static_cast<int>(w);
        } else if (key == "out_dir") {
            cfg.out_dir = value;
        } else if (key == "k_box") {
            cfg.k_box = detail::parse_double(key, value);
            if (!(cfg.k_box > 0.0)) throw config_error(key, "k_box must be positive");
        } else {
            throw config_error(key, "unknown key '" + key + "'");
        }
    }
    if (!have_experiment) throw config_error("experiment", "missing required key 'experiment'");
    return cfg;
}

inline ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("", "cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

// ---------- CSV writers ----------

// All floats go through %.17g: shortest text that round-trips a double and is
// identical across runs.
inline std::string format_g17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void write_path_csv(std::ostream& out, const RescaledPath& path) {
    out << "t,s_tilde,t_tilde\n";
    for (size_t i = 0; i < path.times.size(); ++i)
        out << format_g17(path.times[i]) << ',' << format_g17(path.s_tilde[i]) << ','
            << format_g17(path.t_tilde[i]) << '\n';
}

inline void write_samples_csv(std::ostream& out, const std::string& column,
                              const std::vector<double>& values) {
    out << column << '\n';
    for (double v : values) out << format_g17(v) << '\n';
}

// Overlay of an empirical CDF with either a reference CDF or a second
// empirical one, for external plotting.
inline void write_cdf_overlay_csv(std::ostream& out, std::vector<double> samples,
                                  const std::function<double(double)>& reference_cdf,
                                  const std::string& reference_name = "reference_cdf") {
    std::sort(samples.begin(), samples.end());
    out << "value,empirical_cdf," << reference_name << '\n';
    const auto m = static_cast<double>(samples.size());
    for (size_t i = 0; i < samples.size(); ++i)
        out << format_g17(samples[i]) << ',' << format_g17((i + 1.0) / m) << ','
            << format_g17(reference_cdf(samples[i])) << '\n';
}

// ---------- check report ----------

struct CheckResult {
    std::string name;
    double value = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

// "value within tolerance" in the direction each check means; builders below
// keep the comparisons next to the numbers.
inline CheckResult check_below(std::string name, double value, double tolerance) {
    return {std::move(name), value, tolerance, value < tolerance};
}
inline CheckResult check_at_most(std::string name, double value, double tolerance) {
    return {std::move(name), value, tolerance, value <= tolerance};
}

// The embedded config deliberately skips workers and out_dir: reports must be
// byte-identical across worker counts and output locations, and those two
// knobs do not affect any computed number.
inline nlohmann::ordered_json config_to_json(const ExperimentConfig& cfg) {
    nlohmann::ordered_json j;
    j["experiment"] = cfg.experiment;
    if (!cfg.n_values.empty()) j["n"] = cfg.n_values;
    j["sigma_sq"] = cfg.sigma_sq_or_default();
    if (cfg.dt) j["dt"] = *cfg.dt;
    if (cfg.horizon) j["horizon"] = *cfg.horizon;
    if (cfg.replicas) j["replicas"] = *cfg.replicas;
    j["seed"] = cfg.seed;
    j["k_box"] = cfg.k_box;
    return j;
}

inline nlohmann::ordered_json report_to_json(const ExperimentConfig& cfg,
                                             const std::vector<CheckResult>& checks) {
    nlohmann::ordered_json j;
    j["config"] = config_to_json(cfg);
    j["checks"] = nlohmann::ordered_json::array();
    bool all = true;
    for (const auto& c : checks) {
        nlohmann::ordered_json cj;
        cj["name"] = c.name;
        cj["value"] = c.value;
        cj["tolerance"] = c.tolerance;
        cj["pass"] = c.pass;
        j["checks"].push_back(cj);
        all = all && c.pass;
    }
    j["all_pass"] = all;
    return j;
}

} // namespace socdyn
