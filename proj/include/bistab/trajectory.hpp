#pragma once

#include <cstdint>
#include <vector>

#include "bistab/master.hpp"

// Diffusive (heterodyne-style) stochastic Schrodinger unraveling of the
// master equation, switching-state labeling with hysteresis, dwell-time and
// simultaneity statistics, and deterministic ensemble averaging.

namespace bistab {

enum class SseScheme { Weak2, Euler };

struct TrajectoryOptions {
    std::uint64_t seed = 1;
    double t_max = 100.0;   ///< in units of 1/(2 kappa)
    double dt = 0.0;        ///< same units; 0 selects 0.05 / max-rate
    int n_samples = 2000;   ///< recorded observable samples
    SseScheme scheme = SseScheme::Weak2;
    int n_snapshots = 0;    ///< optional evenly spaced state checkpoints
    double norm_tol = 0.2;  ///< per-step pre-renormalization norm guard; rare
                            ///< stochastic spikes reach a few percent, real
                            ///< step-size instability blows past this fast
    bool no_dissipation = false;  ///< drop all channels (unitary limit, for tests)
};

/// Observable time series of one stochastic unraveling. Qubit columns are
/// empty for the Duffing model.
struct TrajectoryRecord {
    std::uint64_t seed = 0;
    double dt = 0.0;                    ///< step used, units of 1/(2 kappa)
    std::vector<double> times;          ///< dimensionless 2 kappa t
    std::vector<double> n_photon;
    std::vector<double> sigma_z;
    std::vector<Complex> sigma_minus;
    std::vector<Complex> a_amp;
    std::vector<std::pair<double, StateVector>> snapshots;

    double sample_spacing() const { return times.size() > 1 ? times[1] - times[0] : 0.0; }
};

TrajectoryRecord sse_simulate(const SystemParams& p, const ModelSpec& m, int cutoff,
                              const TrajectoryOptions& opts);

enum class StateLabel : std::uint8_t { Transit, Dark, Dim, Bright };

struct LabelThresholds {
    double dark = 0.15;        ///< dark/dim boundary on smoothed <n>
    double dim_bright = 4.0;   ///< dim/bright boundary on smoothed <n>
    double hysteresis = 0.2;   ///< relative band around dim_bright
    double smooth_window = 1.0;///< moving-average window, units of 1/(2 kappa)
};

/// sqrt(n_dim * n_bright) boundary from the two Q-function peak photon
/// numbers, with the default dark threshold and hysteresis.
LabelThresholds thresholds_from_peaks(double n_dim, double n_bright);

/// Hysteresis labeling on the smoothed photon record; the dark tag requires
/// smoothed sigma_z > 0. Samples inside the hysteresis band keep the previous
/// committed label (Transit before the first commitment).
std::vector<StateLabel> label_states(const TrajectoryRecord& rec,
                                     const LabelThresholds& thresholds);

struct SwitchingStats {
    std::vector<double> dwell_bright;  ///< units of 1/(2 kappa)
    std::vector<double> dwell_dim;
    std::vector<double> dwell_dark;
    int n_switches = 0;        ///< bright <-> (dim|dark) transitions
    double simultaneity = 0.0; ///< Pearson corr. of cavity/qubit indicators
    bool insufficient_statistics = false;  ///< fewer than 2 dwell intervals
};

SwitchingStats switching_stats(const TrajectoryRecord& rec,
                               const std::vector<StateLabel>& labels,
                               const LabelThresholds& thresholds);

struct EnsembleSummary {
    int m = 0;
    std::vector<double> times;
    std::vector<double> n_mean, n_se;
    std::vector<double> sz_mean, sz_se;
    std::vector<double> amp_mean_a;  ///< |ensemble mean of <a>| per bin
    std::vector<double> mean_abs_a;  ///< ensemble mean of |<a>| per bin
    /// Across-trajectory statistics of per-trajectory means over the trailing
    /// steady window (last half of the record).
    double steady_n_mean = 0.0;
    double steady_n_se = 0.0;
};

/// M independent trajectories with per-trajectory streams derived from
/// (opts.seed, index); the reduction is performed in index order, so results
/// are deterministic for fixed (seed, M) regardless of worker count.
EnsembleSummary ensemble_run(const SystemParams& p, const ModelSpec& m, int cutoff,
                             const TrajectoryOptions& opts, int m_count,
                             int workers = 0);

}  // namespace bistab
