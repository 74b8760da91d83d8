#include "bistab/config.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace bistab {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

struct RawEntry {
    std::string value;
    int line = 0;
};

double parse_double(const std::string& key, const RawEntry& e) {
    try {
        size_t pos = 0;
        const double v = std::stod(e.value, &pos);
        if (pos != e.value.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        throw ConfigError("line " + std::to_string(e.line) + ": key '" + key +
                          "' expects a number, got '" + e.value + "'");
    }
}

int parse_int(const std::string& key, const RawEntry& e) {
    try {
        size_t pos = 0;
        const long v = std::stol(e.value, &pos);
        if (pos != e.value.size()) throw std::invalid_argument("");
        return static_cast<int>(v);
    } catch (...) {
        throw ConfigError("line " + std::to_string(e.line) + ": key '" + key +
                          "' expects an integer, got '" + e.value + "'");
    }
}

std::vector<double> parse_list(const std::string& key, const RawEntry& e) {
    std::vector<double> out;
    std::stringstream ss(e.value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        try {
            out.push_back(std::stod(item));
        } catch (...) {
            throw ConfigError("line " + std::to_string(e.line) + ": key '" + key +
                              "' expects a comma-separated list of numbers");
        }
    }
    return out;
}

const std::set<std::string> kKnownKeys = {
    "model", "transmon_levels", "cavity_cutoff", "preset",
    "f_c_ghz", "f_q_ghz", "delta_ghz", "g_ghz", "chi_ghz",
    "kappa_mhz", "gamma_mhz", "gamma_phi_mhz", "t1_us", "t2_us",
    "temperature_mk",
    "drive_scale", "drive_freq_ghz",
    "sweep_start_ghz", "sweep_stop_ghz", "sweep_points",
    "traj_seed", "traj_m", "traj_t_max", "traj_dt", "traj_scheme", "traj_samples",
    "dark_threshold", "dim_bright_threshold",
    "qfunc_resolution", "qfunc_halfwidth",
    "relax_coeffs", "dephase_coeffs",
    "workers",
};

double mhz_rate(double mhz) { return 2.0 * M_PI * mhz * 1e-3; }

}  // namespace

std::string model_name(RunModel m) {
    switch (m) {
        case RunModel::Jc: return "jc";
        case RunModel::Gjc: return "gjc";
        case RunModel::Duffing: return "duffing";
        case RunModel::Meanfield: return "meanfield";
        case RunModel::Fpe: return "fpe";
    }
    return "?";
}

RunConfig parse_config(const std::string& text) {
    std::map<std::string, RawEntry> raw;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[' && line.back() == ']') continue;  // section headers are cosmetic
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value', got '" + line + "'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!kKnownKeys.count(key)) {
            throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        }
        if (raw.count(key)) {
            throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
        }
        raw[key] = {value, line_no};
    }

    if (!raw.count("model")) {
        throw ConfigError("missing required key 'model' (required keys: model; plus either "
                          "'preset' or explicit f_c_ghz/f_q_ghz/g_ghz/kappa_mhz parameters)");
    }

    RunConfig cfg;
    cfg.source_text = text;

    {
        const std::string m = raw.at("model").value;
        if (m == "jc") cfg.model = RunModel::Jc;
        else if (m == "gjc") cfg.model = RunModel::Gjc;
        else if (m == "duffing") cfg.model = RunModel::Duffing;
        else if (m == "meanfield") cfg.model = RunModel::Meanfield;
        else if (m == "fpe") cfg.model = RunModel::Fpe;
        else throw ConfigError("line " + std::to_string(raw.at("model").line) +
                               ": key 'model' must be jc|gjc|duffing|meanfield|fpe");
    }

    if (raw.count("preset")) {
        cfg.preset = raw.at("preset").value;
        try {
            cfg.params = device_preset(*cfg.preset);
        } catch (const std::invalid_argument& e) {
            throw ConfigError("line " + std::to_string(raw.at("preset").line) + ": " + e.what());
        }
    }

    auto get_d = [&](const char* key) { return parse_double(key, raw.at(key)); };
    auto has = [&](const char* key) { return raw.count(key) != 0; };

    if (has("f_c_ghz")) cfg.params.omega_c = ghz(get_d("f_c_ghz"));
    if (has("f_q_ghz")) cfg.params.omega_q = ghz(get_d("f_q_ghz"));
    if (has("delta_ghz")) cfg.params.omega_q = cfg.params.omega_c - ghz(get_d("delta_ghz"));
    if (has("g_ghz")) cfg.params.g = ghz(get_d("g_ghz"));
    if (has("chi_ghz")) cfg.params.chi = ghz(get_d("chi_ghz"));
    if (has("kappa_mhz")) cfg.params.kappa = mhz_rate(get_d("kappa_mhz"));
    if (has("gamma_mhz")) cfg.params.gamma = mhz_rate(get_d("gamma_mhz"));
    if (has("gamma_phi_mhz")) cfg.params.gamma_phi = mhz_rate(get_d("gamma_phi_mhz"));
    if (has("t1_us")) cfg.params.gamma = 1e-3 / get_d("t1_us");
    if (has("t2_us")) {
        const double t2 = get_d("t2_us");
        cfg.params.gamma_phi = 1e-3 / t2 - 0.5 * cfg.params.gamma;
    }
    if (has("temperature_mk")) cfg.params.temperature = 1e-3 * get_d("temperature_mk");

    for (const char* key : {"kappa_mhz", "gamma_mhz", "gamma_phi_mhz"}) {
        if (has(key) && get_d(key) < 0) {
            throw ConfigError("line " + std::to_string(raw.at(key).line) + ": key '" +
                              std::string(key) + "' must be nonnegative");
        }
    }
    if (cfg.params.gamma_phi < 0) {
        throw ConfigError("derived gamma_phi is negative (check t1_us/t2_us: requires T2 <= 2 T1)");
    }
    if (cfg.params.temperature < 0) {
        throw ConfigError("key 'temperature_mk' must be nonnegative");
    }

    if (has("transmon_levels")) {
        cfg.transmon_levels = parse_int("transmon_levels", raw.at("transmon_levels"));
        if (cfg.transmon_levels < 2) {
            throw ConfigError("line " + std::to_string(raw.at("transmon_levels").line) +
                              ": key 'transmon_levels' must be >= 2");
        }
    }
    if (has("cavity_cutoff")) {
        const RawEntry& e = raw.at("cavity_cutoff");
        if (e.value == "auto") {
            cfg.cavity_cutoff = 0;
        } else {
            cfg.cavity_cutoff = parse_int("cavity_cutoff", e);
            if (cfg.cavity_cutoff < 2) {
                throw ConfigError("line " + std::to_string(e.line) +
                                  ": key 'cavity_cutoff' must be >= 2 or 'auto'");
            }
        }
    }

    if (has("drive_scale")) {
        cfg.drive_scale = get_d("drive_scale");
        if (cfg.drive_scale < 0) {
            throw ConfigError("line " + std::to_string(raw.at("drive_scale").line) +
                              ": key 'drive_scale' must be nonnegative");
        }
    }
    cfg.params.eps_d = cfg.drive_scale * 2.0 * cfg.params.kappa;
    if (has("drive_freq_ghz")) {
        cfg.drive_freq_ghz = get_d("drive_freq_ghz");
        cfg.params.omega_d = ghz(*cfg.drive_freq_ghz);
    }

    if (has("sweep_start_ghz")) cfg.sweep_start_ghz = get_d("sweep_start_ghz");
    if (has("sweep_stop_ghz")) cfg.sweep_stop_ghz = get_d("sweep_stop_ghz");
    if (has("sweep_points")) {
        cfg.sweep_points = parse_int("sweep_points", raw.at("sweep_points"));
        if (cfg.sweep_points < 2) {
            throw ConfigError("line " + std::to_string(raw.at("sweep_points").line) +
                              ": key 'sweep_points' must be >= 2");
        }
    }

    if (has("traj_seed")) cfg.traj_seed = static_cast<std::uint64_t>(
        parse_int("traj_seed", raw.at("traj_seed")));
    if (has("traj_m")) {
        cfg.traj_m = parse_int("traj_m", raw.at("traj_m"));
        if (cfg.traj_m < 1) {
            throw ConfigError("line " + std::to_string(raw.at("traj_m").line) +
                              ": key 'traj_m' must be >= 1");
        }
    }
    if (has("traj_t_max")) cfg.traj_t_max = get_d("traj_t_max");
    if (has("traj_dt")) cfg.traj_dt = get_d("traj_dt");
    if (has("traj_samples")) cfg.traj_samples = parse_int("traj_samples", raw.at("traj_samples"));
    if (has("traj_scheme")) {
        const std::string s = raw.at("traj_scheme").value;
        if (s == "weak2") cfg.traj_scheme = SseScheme::Weak2;
        else if (s == "euler") cfg.traj_scheme = SseScheme::Euler;
        else throw ConfigError("line " + std::to_string(raw.at("traj_scheme").line) +
                               ": key 'traj_scheme' must be weak2|euler");
    }
    if (has("dark_threshold")) cfg.dark_threshold = get_d("dark_threshold");
    if (has("dim_bright_threshold")) cfg.dim_bright_threshold = get_d("dim_bright_threshold");
    if (cfg.dim_bright_threshold && !(cfg.dark_threshold < *cfg.dim_bright_threshold)) {
        throw ConfigError("thresholds must satisfy dark_threshold < dim_bright_threshold");
    }

    if (has("qfunc_resolution")) cfg.qfunc_resolution = parse_int("qfunc_resolution", raw.at("qfunc_resolution"));
    if (has("qfunc_halfwidth")) cfg.qfunc_halfwidth = get_d("qfunc_halfwidth");
    if (has("relax_coeffs")) cfg.relax_coeffs = parse_list("relax_coeffs", raw.at("relax_coeffs"));
    if (has("dephase_coeffs")) cfg.dephase_coeffs = parse_list("dephase_coeffs", raw.at("dephase_coeffs"));
    if (has("workers")) cfg.workers = parse_int("workers", raw.at("workers"));

    try {
        cfg.params.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return cfg;
}

std::vector<double> RunConfig::sweep_grid() const {
    if (!sweep_start_ghz || !sweep_stop_ghz || sweep_points < 2) {
        throw ConfigError("sweep requires keys sweep_start_ghz, sweep_stop_ghz, sweep_points (>= 2)");
    }
    if (!(*sweep_start_ghz < *sweep_stop_ghz)) {
        throw ConfigError("sweep_start_ghz must be below sweep_stop_ghz");
    }
    std::vector<double> grid(sweep_points);
    for (int i = 0; i < sweep_points; ++i) {
        const double f = *sweep_start_ghz +
                         (*sweep_stop_ghz - *sweep_start_ghz) * i / (sweep_points - 1);
        grid[i] = ghz(f);
    }
    return grid;
}

ModelSpec RunConfig::model_spec() const {
    switch (model) {
        case RunModel::Jc: return {ModelKind::Jc, 2};
        case RunModel::Gjc: return {ModelKind::Gjc, transmon_levels};
        case RunModel::Duffing: return {ModelKind::Duffing, 2};
        default:
            throw ConfigError("model '" + model_name(model) + "' has no master-equation form");
    }
}

bool RunConfig::operator==(const RunConfig& other) const {
    auto key = [](const RunConfig& c) {
        return std::make_tuple(
            c.model, c.transmon_levels, c.cavity_cutoff, c.preset,
            c.params.omega_c, c.params.omega_q, c.params.g, c.params.chi,
            c.params.eps_d, c.params.omega_d, c.params.kappa, c.params.gamma,
            c.params.gamma_phi, c.params.temperature,
            c.drive_scale, c.drive_freq_ghz,
            c.sweep_start_ghz, c.sweep_stop_ghz, c.sweep_points,
            c.traj_seed, c.traj_m, c.traj_t_max, c.traj_dt, c.traj_scheme,
            c.traj_samples, c.dark_threshold, c.dim_bright_threshold,
            c.qfunc_resolution, c.qfunc_halfwidth, c.relax_coeffs,
            c.dephase_coeffs, c.workers);
    };
    return key(*this) == key(other);
}

}  // namespace bistab
