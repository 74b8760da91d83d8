#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bistab/master.hpp"
#include "bistab/trajectory.hpp"

// Run configuration: a flat key = value document (# comments allowed).
// Frequencies are given in GHz and rates as rate/2pi in MHz, both converted
// to rad/ns internally; drive strength is eps_d/(2 kappa); trajectory times
// are in units of 1/(2 kappa).

namespace bistab {

class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

enum class RunModel { Jc, Gjc, Duffing, Meanfield, Fpe };

struct RunConfig {
    RunModel model = RunModel::Jc;
    int transmon_levels = 2;
    int cavity_cutoff = 0;  ///< 0 = "auto"

    std::optional<std::string> preset;  // D1 | D2
    SystemParams params;                // resolved preset + overrides
    double drive_scale = 0.0;           // eps_d / (2 kappa)
    std::optional<double> drive_freq_ghz;

    std::optional<double> sweep_start_ghz;
    std::optional<double> sweep_stop_ghz;
    int sweep_points = 0;

    std::uint64_t traj_seed = 1;
    int traj_m = 1;
    double traj_t_max = 100.0;
    double traj_dt = 0.0;
    SseScheme traj_scheme = SseScheme::Weak2;
    int traj_samples = 2000;
    double dark_threshold = 0.15;
    std::optional<double> dim_bright_threshold;  // absent = derive from Q peaks

    int qfunc_resolution = 101;
    double qfunc_halfwidth = 0.0;  // 0 = 1.5 sqrt(N_crit)

    std::vector<double> relax_coeffs;
    std::vector<double> dephase_coeffs;

    int workers = 0;  // 0 = hardware concurrency

    /// Verbatim source text the config was parsed from.
    std::string source_text;

    std::vector<double> sweep_grid() const;  ///< rad/ns; throws if sweep keys missing
    ModelSpec model_spec() const;
    bool operator==(const RunConfig& other) const;
};

/// Parse and validate a config document. Errors carry line and key context.
RunConfig parse_config(const std::string& text);

std::string model_name(RunModel m);

}  // namespace bistab
