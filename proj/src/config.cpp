#include "mtsim/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "mtsim/errors.hpp"

namespace mtsim {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

double parse_double(const std::string& value, const std::string& where) {
    const std::string v = trim(value);
    double out = 0.0;
    const char* end = v.data() + v.size();
    auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || ptr != end)
        throw ConfigError(where + ": expected a number, got \"" + value + "\"");
    if (!std::isfinite(out)) throw ConfigError(where + ": value must be finite");
    return out;
}

int parse_int(const std::string& value, const std::string& where) {
    const std::string v = trim(value);
    int out = 0;
    const char* end = v.data() + v.size();
    auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || ptr != end)
        throw ConfigError(where + ": expected an integer, got \"" + value + "\"");
    return out;
}

bool parse_bool(const std::string& value, const std::string& where) {
    const std::string v = trim(value);
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    throw ConfigError(where + ": expected a boolean (0/1/true/false), got \"" + value + "\"");
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& key_table() {
    static const std::map<std::string, Setter> table = {
        {"experiment", [](RunConfig& c, const std::string& v, const std::string&) {
             c.experiment = trim(v);
         }},
        {"e_c", [](RunConfig& c, const std::string& v, const std::string& w) {
             c.e_c = parse_double(v, w);
         }},
        {"e_j", [](RunConfig& c, const std::string& v, const std::string& w) {
             c.e_j = parse_double(v, w);
         }},
        {"n_g", [](RunConfig& c, const std::string& v, const std::string& w) {
             c.n_g = parse_double(v, w);
         }},
        {"w", [](RunConfig& c, const std::string& v, const std::string& w) {
             c.w = parse_double(v, w);
         }},
        {"w_f", [](RunConfig& c, const std::string& v, const std::string& w) {
             c.w_f = parse_double(v, w);
         }},
        {"mu", [](RunConfig& c, const std::string& v, const std::string& w) {
             c.mu = parse_double(v, w);
         }},
        {"t_hop", [](RunConfig& c, const std::string& v, const std::string& w) {
             c.t_hop = parse_double(v, w);
         }},
        {"delta_abs", [](RunConfig& c, const std::string& v, const std::string& w) {
             c.delta_abs = parse_double(v, w);
         }},
        {"length", [](RunConfig& c, const std::string& v, const std::string& w) {
             c.length = parse_int(v, w);
         }},
        {"twice_cutoff", [](RunConfig& c, const std::string& v, const std::string& w) {
             c.twice_cutoff = parse_int(v, w);
         }},
        {"leakage_twice_cutoff", [](RunConfig& c, const std::string& v, const std::string& w) {
             c.leakage_twice_cutoff = parse_int(v, w);
         }},
        {"bands_integer_cutoff", [](RunConfig& c, const std::string& v, const std::string& w) {
             c.bands_integer_cutoff = parse_int(v, w);
         }},
        {"t_end", [](RunConfig& c, const std::string& v, const std::string& w) {
             c.t_end = parse_double(v, w);
         }},
        {"n_points", [](RunConfig& c, const std::string& v, const std::string& w) {
             c.n_points = parse_int(v, w);
         }},
        {"alpha", [](RunConfig& c, const std::string& v, const std::string& w) {
             c.alpha = parse_double(v, w);
         }},
        {"convergence_check", [](RunConfig& c, const std::string& v, const std::string& w) {
             c.convergence_check = parse_bool(v, w);
         }},
        {"n_kappa", [](RunConfig& c, const std::string& v, const std::string& w) {
             c.n_kappa = parse_int(v, w);
         }},
        {"theta_points", [](RunConfig& c, const std::string& v, const std::string& w) {
             c.theta_points = parse_int(v, w);
         }},
        {"theta_max_over_pi", [](RunConfig& c, const std::string& v, const std::string& w) {
             c.theta_max_over_pi = parse_double(v, w);
         }},
        {"angle_over_pi", [](RunConfig& c, const std::string& v, const std::string& w) {
             c.angle_over_pi = parse_double(v, w);
         }},
        {"gate_amplitude", [](RunConfig& c, const std::string& v, const std::string& w) {
             c.gate_amplitude = parse_double(v, w);
         }},
        {"leakage_mu", [](RunConfig& c, const std::string& v, const std::string&) {
             c.leakage_mu = trim(v);
         }},
        {"length_min", [](RunConfig& c, const std::string& v, const std::string& w) {
             c.length_min = parse_int(v, w);
         }},
        {"length_max", [](RunConfig& c, const std::string& v, const std::string& w) {
             c.length_max = parse_int(v, w);
         }},
        {"f_max", [](RunConfig& c, const std::string& v, const std::string& w) {
             c.f_max = parse_int(v, w);
         }},
        {"shell_threshold", [](RunConfig& c, const std::string& v, const std::string& w) {
             c.shell_threshold = parse_double(v, w);
         }},
        {"initial", [](RunConfig& c, const std::string& v, const std::string& w) {
             c.initial = parse_int(v, w);
         }},
        {"w12", [](RunConfig& c, const std::string& v, const std::string& w) {
             c.w12 = parse_double(v, w);
         }},
        {"two_qubit_theta_over_pi", [](RunConfig& c, const std::string& v, const std::string& w) {
             c.two_qubit_theta_over_pi = parse_double(v, w);
         }},
        {"two_qubit_full", [](RunConfig& c, const std::string& v, const std::string& w) {
             c.two_qubit_full = parse_bool(v, w);
         }},
        {"out_dir", [](RunConfig& c, const std::string& v, const std::string&) {
             c.out_dir = trim(v);
         }},
    };
    return table;
}

void set_key(RunConfig& cfg, std::set<std::string>& seen, const std::string& key,
             const std::string& value, const std::string& where) {
    const auto& table = key_table();
    auto it = table.find(key);
    if (it == table.end()) throw ConfigError(where + ": unknown key \"" + key + "\"");
    it->second(cfg, value, where + ": key \"" + key + "\"");
    seen.insert(key);
}

void load_file(RunConfig& cfg, std::set<std::string>& seen, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file \"" + path + "\"");
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string body = trim(line);
        if (body.empty()) continue;
        const std::string where = path + ":" + std::to_string(lineno);
        const std::size_t eq = body.find('=');
        if (eq == std::string::npos)
            throw ConfigError(where + ": expected `key = value`, got \"" + body + "\"");
        const std::string key = trim(body.substr(0, eq));
        const std::string value = body.substr(eq + 1);
        if (key.empty()) throw ConfigError(where + ": empty key");
        set_key(cfg, seen, key, value, where);
    }
}

void apply_override(RunConfig& cfg, std::set<std::string>& seen, const std::string& kv) {
    const std::size_t eq = kv.find('=');
    if (eq == std::string::npos)
        throw ConfigError("--set expects key=value, got \"" + kv + "\"");
    const std::string key = trim(kv.substr(0, eq));
    if (key.empty()) throw ConfigError("--set expects key=value, got \"" + kv + "\"");
    set_key(cfg, seen, key, kv.substr(eq + 1), "--set");
}

std::vector<double> parse_mu_list(const std::string& list) {
    std::vector<double> out;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const std::string v = trim(item);
        if (v.empty()) throw ConfigError("key \"leakage_mu\": empty entry in list");
        out.push_back(parse_double(v, "key \"leakage_mu\""));
    }
    if (out.empty()) throw ConfigError("key \"leakage_mu\": list is empty");
    return out;
}

void require(bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
}

void validate(RunConfig& cfg) {
    static const std::set<std::string> experiments = {
        "bands", "junction-spectrum", "rabi", "gate", "leakage", "two-qubit", "verify"};
    require(experiments.count(cfg.experiment) == 1,
            "unknown experiment \"" + cfg.experiment +
                "\"; expected one of bands, junction-spectrum, rabi, gate, leakage, "
                "two-qubit, verify");

    require(cfg.e_c > 0.0, "key \"e_c\": charging energy must be positive");
    require(cfg.e_j > 0.0, "key \"e_j\": Josephson energy must be positive");
    require(cfg.w >= 0.0, "key \"w\": tunneling amplitude must be non-negative");
    require(cfg.w_f > 0.0, "key \"w_f\": chain coupling must be positive");
    require(cfg.t_hop > 0.0, "key \"t_hop\": hopping must be positive");
    require(cfg.delta_abs > 0.0, "key \"delta_abs\": pairing must be positive");
    require(cfg.length >= 2, "key \"length\": chains need at least two sites");
    require(cfg.twice_cutoff >= 3 && cfg.twice_cutoff % 2 == 1,
            "key \"twice_cutoff\": charge cutoff is odd (half-integer grid), at least 3");
    require(cfg.leakage_twice_cutoff >= 3 && cfg.leakage_twice_cutoff % 2 == 1,
            "key \"leakage_twice_cutoff\": charge cutoff is odd, at least 3");
    require(cfg.bands_integer_cutoff >= 2, "key \"bands_integer_cutoff\": at least 2");
    require(cfg.t_end >= 0.0, "key \"t_end\": time window must be non-negative");
    require(cfg.n_points >= 2, "key \"n_points\": at least 2 samples");
    require(cfg.alpha >= 0.0, "key \"alpha\": noise strength must be non-negative");
    require(cfg.n_kappa >= 2, "key \"n_kappa\": at least 2 samples");
    require(cfg.theta_points >= 2, "key \"theta_points\": at least 2 samples");
    require(cfg.theta_max_over_pi > 0.0, "key \"theta_max_over_pi\": must be positive");
    require(cfg.angle_over_pi > 0.0, "key \"angle_over_pi\": must be positive");
    require(cfg.gate_amplitude > 0.0, "key \"gate_amplitude\": must be positive");
    require(cfg.length_min >= 2, "key \"length_min\": chains need at least two sites");
    require(cfg.length_max >= cfg.length_min,
            "key \"length_max\": must be at least length_min");
    require(cfg.f_max >= 4, "key \"f_max\": the shell sum starts at 4");
    require(cfg.shell_threshold > 0.0, "key \"shell_threshold\": must be positive");
    require(cfg.initial == 0 || cfg.initial == 1, "key \"initial\": qubit level 0 or 1");
    require(cfg.w12 > 0.0, "key \"w12\": inter-qubit tunneling must be positive");
    require(cfg.two_qubit_theta_over_pi > 0.0,
            "key \"two_qubit_theta_over_pi\": must be positive");
    require(!cfg.out_dir.empty(), "key \"out_dir\": must not be empty");

    cfg.leakage_mu_values = parse_mu_list(cfg.leakage_mu);

    if (cfg.experiment == "rabi" || cfg.experiment == "gate" || cfg.experiment == "two-qubit")
        require(cfg.length == 2,
                "key \"length\": the " + cfg.experiment +
                    " experiment evolves the explicit two-site chain vacuum; set length = 2");
}

}  // namespace

RunConfig make_run_config(const std::string& experiment, const std::string& config_path,
                          const std::vector<std::string>& overrides,
                          const std::string& out_override) {
    RunConfig cfg;
    std::set<std::string> seen;
    if (!config_path.empty()) load_file(cfg, seen, config_path);
    for (const auto& kv : overrides) apply_override(cfg, seen, kv);
    if (!experiment.empty()) cfg.experiment = experiment;
    if (!out_override.empty()) cfg.out_dir = out_override;

    // chains follow the sweet-spot coupling unless detuned explicitly
    if (!seen.count("t_hop")) cfg.t_hop = cfg.w_f;
    if (!seen.count("delta_abs")) cfg.delta_abs = cfg.w_f;

    validate(cfg);
    return cfg;
}

}  // namespace mtsim
