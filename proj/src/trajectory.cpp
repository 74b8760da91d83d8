#include "bistab/trajectory.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <numeric>
#include <random>
#include <thread>

namespace bistab {

namespace {

double sparse_inf_norm(const SparseOp& m) {
    std::vector<double> row_sum(m.rows(), 0.0);
    for (int k = 0; k < m.outerSize(); ++k) {
        for (SparseOp::InnerIterator it(m, k); it; ++it) {
            row_sum[it.row()] += std::abs(it.value());
        }
    }
    return row_sum.empty() ? 0.0 : *std::max_element(row_sum.begin(), row_sum.end());
}

std::mt19937_64 stream_for(std::uint64_t base_seed, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(base_seed),
                      static_cast<std::uint32_t>(base_seed >> 32),
                      static_cast<std::uint32_t>(index),
                      static_cast<std::uint32_t>(index >> 32)};
    return std::mt19937_64(seq);
}

struct SseEngine {
    int dim;
    int levels;  // 0 for Duffing
    SparseOp h;
    std::vector<SparseOp> jump_ops;       // sqrt(rate) * op
    Eigen::VectorXd d_total;              // diag of sum_k C_k^t C_k (diagonal here)
    bool d_is_diagonal = true;
    SparseOp d_total_sparse;              // fallback when not diagonal
    SparseOp n_full, a_full, sm_full;
    double max_rate;

    SseEngine(const SystemParams& p, const ModelSpec& m, int cutoff, bool no_dissipation) {
        h = build_model_hamiltonian(p, m, cutoff);
        dim = static_cast<int>(h.rows());
        levels = m.levels();
        if (!no_dissipation) {
            for (const auto& ch : build_model_channels(p, m, cutoff)) {
                if (ch.rate <= 0.0 || ch.op.nonZeros() == 0) continue;
                jump_ops.push_back(SparseOp(std::sqrt(ch.rate) * ch.op));
            }
        }
        SparseOp dsum(dim, dim);
        for (const auto& c : jump_ops) {
            dsum += SparseOp(adjoint(c) * c);
        }
        dsum = pruned(dsum);
        d_total_sparse = dsum;
        d_total = Eigen::VectorXd::Zero(dim);
        for (int k = 0; k < dsum.outerSize(); ++k) {
            for (SparseOp::InnerIterator it(dsum, k); it; ++it) {
                if (it.row() != it.col()) {
                    d_is_diagonal = false;
                } else {
                    d_total(it.row()) = it.value().real();
                }
            }
        }
        const SparseOp a_cav = annihilation(cutoff);
        if (levels > 0) {
            const SparseOp iq = identity_op(levels);
            a_full = tensor(a_cav, iq);
            n_full = tensor(SparseOp(adjoint(a_cav) * a_cav), iq);
            sm_full = tensor(identity_op(cutoff), lowering_ladder(levels));
        } else {
            a_full = a_cav;
            n_full = SparseOp(adjoint(a_cav) * a_cav);
        }
        max_rate = sparse_inf_norm(h) + sparse_inf_norm(d_total_sparse);
    }

    // drift = -iH psi - D psi/2 + sum_k [e_k^* C_k psi - |e_k|^2 psi / 2]
    // with e_k = <C_k>; the per-channel C_k psi and e_k are returned for reuse.
    // All buffers are caller-owned so the hot loop never allocates.
    void drift(const StateVector& psi, std::vector<StateVector>& c_psi,
               std::vector<Complex>& e, StateVector& out, StateVector& tmp) const {
        tmp.noalias() = h * psi;
        if (d_is_diagonal) {
            out.array() = -kI * tmp.array() - 0.5 * d_total.array() * psi.array();
        } else {
            out.noalias() = -0.5 * (d_total_sparse * psi);
            out.array() -= kI * tmp.array();
        }
        double e2_sum = 0.0;
        for (size_t k = 0; k < jump_ops.size(); ++k) {
            c_psi[k].noalias() = jump_ops[k] * psi;
            e[k] = psi.dot(c_psi[k]);
            out += std::conj(e[k]) * c_psi[k];
            e2_sum += std::norm(e[k]);
        }
        out -= 0.5 * e2_sum * psi;
    }
};

}  // namespace

namespace {

TrajectoryRecord simulate_stream(const SystemParams& p, const ModelSpec& m, int cutoff,
                                 const TrajectoryOptions& opts, std::uint64_t stream_index) {
    p.validate();
    if (p.kappa <= 0.0) {
        throw std::invalid_argument("sse_simulate: kappa must be positive (sets the time unit)");
    }
    const SseEngine eng(p, m, cutoff, opts.no_dissipation);
    const double two_kappa = 2.0 * p.kappa;
    const double t_max_ns = opts.t_max / two_kappa;

    double dt_ns = opts.dt > 0 ? opts.dt / two_kappa : 0.05 / eng.max_rate;
    if (dt_ns * eng.max_rate >= 0.1) {
        throw std::invalid_argument("sse_simulate: dt too large (dt * max-rate must be < 0.1)");
    }

    const int n_samples = std::max(2, opts.n_samples);
    long stride = std::lround(std::ceil(t_max_ns / (n_samples - 1) / dt_ns));
    stride = std::max(1L, stride);
    dt_ns = t_max_ns / (static_cast<double>(stride) * (n_samples - 1));
    const long total_steps = stride * (n_samples - 1);

    TrajectoryRecord rec;
    rec.seed = opts.seed;
    rec.dt = dt_ns * two_kappa;
    rec.times.reserve(n_samples);
    rec.n_photon.reserve(n_samples);
    rec.a_amp.reserve(n_samples);
    if (eng.levels > 0) {
        rec.sigma_z.reserve(n_samples);
        rec.sigma_minus.reserve(n_samples);
    }

    StateVector psi = StateVector::Zero(eng.dim);
    psi(0) = 1.0;  // |0> (x) |ground>

    std::mt19937_64 rng = stream_for(opts.seed, stream_index);
    std::normal_distribution<double> normal(0.0, 1.0);

    const size_t n_ch = eng.jump_ops.size();
    std::vector<StateVector> c_psi(n_ch, StateVector(eng.dim));
    std::vector<Complex> e(n_ch);
    StateVector phi1(eng.dim), phi2(eng.dim), noise(eng.dim), pred(eng.dim), tmp(eng.dim);

    const double noise_scale = std::sqrt(0.5 * dt_ns);
    const long snapshot_stride =
        opts.n_snapshots > 0 ? std::max(1L, total_steps / opts.n_snapshots) : 0;

    auto sample = [&](double t_ns) {
        rec.times.push_back(t_ns * two_kappa);
        rec.n_photon.push_back(std::real(psi.dot(eng.n_full * psi)));
        rec.a_amp.push_back(psi.dot(eng.a_full * psi));
        if (eng.levels > 0) {
            double p0 = 0.0;
            for (int i = 0; i < eng.dim; i += eng.levels) p0 += std::norm(psi(i));
            rec.sigma_z.push_back(1.0 - 2.0 * p0);
            rec.sigma_minus.push_back(psi.dot(eng.sm_full * psi));
        }
    };

    sample(0.0);
    for (long step = 0; step < total_steps; ++step) {
        eng.drift(psi, c_psi, e, phi1, tmp);
        noise.setZero();
        for (size_t k = 0; k < n_ch; ++k) {
            const Complex dxi(normal(rng) * noise_scale, normal(rng) * noise_scale);
            noise.array() += dxi * (c_psi[k].array() - e[k] * psi.array());
        }
        if (opts.scheme == SseScheme::Euler) {
            psi.array() += dt_ns * phi1.array() + noise.array();
        } else {
            pred.array() = psi.array() + dt_ns * phi1.array() + noise.array();
            pred /= pred.norm();
            eng.drift(pred, c_psi, e, phi2, tmp);
            psi.array() += 0.5 * dt_ns * (phi1.array() + phi2.array()) + noise.array();
        }
        const double norm = psi.norm();
        if (!(std::abs(norm - 1.0) < opts.norm_tol)) {
            throw NumericalError("sse_simulate: norm drift " + std::to_string(norm - 1.0) +
                                 " at t = " + std::to_string((step + 1) * dt_ns * two_kappa) +
                                 " / (2 kappa); reduce dt");
        }
        psi /= norm;
        if ((step + 1) % stride == 0) sample((step + 1) * dt_ns);
        if (snapshot_stride > 0 && (step + 1) % snapshot_stride == 0) {
            rec.snapshots.emplace_back((step + 1) * dt_ns * two_kappa, psi);
        }
    }
    return rec;
}

}  // namespace

TrajectoryRecord sse_simulate(const SystemParams& p, const ModelSpec& m, int cutoff,
                              const TrajectoryOptions& opts) {
    return simulate_stream(p, m, cutoff, opts, 0);
}

LabelThresholds thresholds_from_peaks(double n_dim, double n_bright) {
    LabelThresholds t;
    t.dim_bright = std::sqrt(std::max(n_dim, 1e-12) * std::max(n_bright, 1e-12));
    return t;
}

namespace {

std::vector<double> moving_average(const std::vector<double>& x, int half_window) {
    if (half_window <= 0) return x;
    const int n = static_cast<int>(x.size());
    std::vector<double> out(n);
    double acc = 0.0;
    int lo = 0, hi = -1;  // inclusive window [lo, hi]
    for (int i = 0; i < n; ++i) {
        const int want_lo = std::max(0, i - half_window);
        const int want_hi = std::min(n - 1, i + half_window);
        while (hi < want_hi) acc += x[++hi];
        while (lo < want_lo) acc -= x[lo++];
        out[i] = acc / (hi - lo + 1);
    }
    return out;
}

}  // namespace

std::vector<StateLabel> label_states(const TrajectoryRecord& rec,
                                     const LabelThresholds& th) {
    if (!(th.dark < th.dim_bright)) {
        throw std::invalid_argument("label_states: thresholds must satisfy dark < dim_bright");
    }
    const int n = static_cast<int>(rec.times.size());
    const double spacing = rec.sample_spacing();
    const int half_window =
        spacing > 0 ? static_cast<int>(0.5 * th.smooth_window / spacing) : 0;
    const std::vector<double> n_smooth = moving_average(rec.n_photon, half_window);
    const bool have_sz = !rec.sigma_z.empty();
    const std::vector<double> sz_smooth =
        have_sz ? moving_average(rec.sigma_z, half_window) : std::vector<double>{};

    const double hi = th.dim_bright * (1.0 + th.hysteresis);
    const double lo = th.dim_bright * (1.0 - th.hysteresis);

    std::vector<StateLabel> labels(n, StateLabel::Transit);
    StateLabel current = StateLabel::Transit;
    for (int i = 0; i < n; ++i) {
        if (n_smooth[i] >= hi) {
            current = StateLabel::Bright;
        } else if (n_smooth[i] <= lo) {
            if (n_smooth[i] < th.dark && have_sz && sz_smooth[i] > 0.0) {
                current = StateLabel::Dark;
            } else {
                current = StateLabel::Dim;
            }
        }
        labels[i] = current;
    }
    return labels;
}

SwitchingStats switching_stats(const TrajectoryRecord& rec,
                               const std::vector<StateLabel>& labels,
                               const LabelThresholds& th) {
    if (labels.size() != rec.times.size()) {
        throw std::invalid_argument("switching_stats: label/record length mismatch");
    }
    SwitchingStats st;
    const int n = static_cast<int>(labels.size());
    const double spacing = rec.sample_spacing();

    auto bucket = [&st](StateLabel l) -> std::vector<double>* {
        switch (l) {
            case StateLabel::Bright: return &st.dwell_bright;
            case StateLabel::Dim: return &st.dwell_dim;
            case StateLabel::Dark: return &st.dwell_dark;
            default: return nullptr;
        }
    };

    int run_start = -1;
    StateLabel run_label = StateLabel::Transit;
    int dwell_count = 0;
    for (int i = 0; i <= n; ++i) {
        const StateLabel l = (i < n) ? labels[i] : StateLabel::Transit;
        if (l != run_label) {
            if (auto* b = bucket(run_label); b && i > run_start) {
                b->push_back((i - run_start) * spacing);
                ++dwell_count;
            }
            const bool was_bright = run_label == StateLabel::Bright;
            const bool is_bright = l == StateLabel::Bright;
            if (i < n && run_label != StateLabel::Transit && was_bright != is_bright) {
                ++st.n_switches;
            }
            run_label = l;
            run_start = i;
        }
    }
    st.insufficient_statistics = dwell_count < 2;

    // Simultaneity: cavity bright-indicator vs qubit bright-indicator. Each
    // raw sample is first classified on sigma_z alone -- north-pole samples
    // (sigma_z > 0) are dark, the rest split at the bimodal dim/bright
    // midpoint from a 1D two-cluster fit -- and the binary bright-indicator
    // is then majority-smoothed over the labeling window. Without dephasing
    // no sample is dark and this reduces to plain above/below-midpoint.
    if (!rec.sigma_z.empty()) {
        std::vector<double> south;
        for (double v : rec.sigma_z) {
            if (v <= 0.0) south.push_back(v);
        }
        double midpoint = 0.0;
        if (!south.empty()) {
            std::vector<double> sorted = south;
            std::sort(sorted.begin(), sorted.end());
            auto pct = [&](double q) {
                return sorted[static_cast<size_t>(q * (sorted.size() - 1))];
            };
            // Two-cluster 1D fit; the objective is multimodal, so start from
            // two inits and keep the split with lower within-cluster spread.
            auto kmeans = [&](double init, double& objective) {
                double mid = init;
                for (int it = 0; it < 50; ++it) {
                    double sum_lo = 0.0, sum_hi = 0.0;
                    int n_lo = 0, n_hi = 0;
                    for (double v : south) {
                        if (v < mid) {
                            sum_lo += v;
                            ++n_lo;
                        } else {
                            sum_hi += v;
                            ++n_hi;
                        }
                    }
                    if (n_lo == 0 || n_hi == 0) break;
                    const double next = 0.5 * (sum_lo / n_lo + sum_hi / n_hi);
                    if (std::abs(next - mid) < 1e-12) break;
                    mid = next;
                }
                double mean_lo = 0.0, mean_hi = 0.0;
                int n_lo = 0, n_hi = 0;
                for (double v : south) {
                    if (v < mid) {
                        mean_lo += v;
                        ++n_lo;
                    } else {
                        mean_hi += v;
                        ++n_hi;
                    }
                }
                if (n_lo == 0 || n_hi == 0) {
                    objective = 1e300;
                    return mid;
                }
                mean_lo /= n_lo;
                mean_hi /= n_hi;
                objective = 0.0;
                for (double v : south) {
                    const double c = (v < mid) ? mean_lo : mean_hi;
                    objective += (v - c) * (v - c);
                }
                return mid;
            };
            double obj_a = 0.0, obj_b = 0.0;
            const double mid_a = kmeans(0.5 * (pct(0.15) + pct(0.85)), obj_a);
            const double mid_b = kmeans(0.5 * (sorted.front() + sorted.back()), obj_b);
            midpoint = (obj_a <= obj_b) ? mid_a : mid_b;
            // Degenerate split (essentially unimodal south distribution, e.g.
            // when every low-photon phase is dark): count the whole southern
            // hemisphere as the qubit bright side.
            size_t below = 0;
            for (double v : south) {
                if (v < midpoint) ++below;
            }
            const size_t minority = std::min(below, south.size() - below);
            if (minority < south.size() / 50) midpoint = sorted.front() - 1.0;
        }

        std::vector<double> qi_raw(n);
        for (int i = 0; i < n; ++i) {
            qi_raw[i] = (rec.sigma_z[i] > midpoint && rec.sigma_z[i] <= 0.0) ? 1.0 : 0.0;
        }
        const int half_window =
            spacing > 0 ? static_cast<int>(0.5 * th.smooth_window / spacing) : 0;
        const std::vector<double> qi_smooth = moving_average(qi_raw, half_window);

        double mean_c = 0.0, mean_q = 0.0;
        std::vector<double> ci(n), qi(n);
        for (int i = 0; i < n; ++i) {
            ci[i] = labels[i] == StateLabel::Bright ? 1.0 : 0.0;
            qi[i] = qi_smooth[i] > 0.5 ? 1.0 : 0.0;
            mean_c += ci[i];
            mean_q += qi[i];
        }
        mean_c /= n;
        mean_q /= n;
        double cov = 0.0, var_c = 0.0, var_q = 0.0;
        for (int i = 0; i < n; ++i) {
            cov += (ci[i] - mean_c) * (qi[i] - mean_q);
            var_c += (ci[i] - mean_c) * (ci[i] - mean_c);
            var_q += (qi[i] - mean_q) * (qi[i] - mean_q);
        }
        st.simultaneity =
            (var_c > 0 && var_q > 0) ? cov / std::sqrt(var_c * var_q) : 0.0;
    }
    return st;
}

EnsembleSummary ensemble_run(const SystemParams& p, const ModelSpec& m, int cutoff,
                             const TrajectoryOptions& opts, int m_count, int workers) {
    if (m_count < 1) {
        throw std::invalid_argument("ensemble_run: M must be >= 1");
    }
    const int n_samples = std::max(2, opts.n_samples);
    const bool has_qubit = m.kind != ModelKind::Duffing;

    Eigen::MatrixXd n_all(m_count, n_samples);
    Eigen::MatrixXd sz_all = has_qubit ? Eigen::MatrixXd(m_count, n_samples) : Eigen::MatrixXd();
    Eigen::MatrixXcd a_all(m_count, n_samples);
    std::vector<double> times;

    int n_workers = workers > 0 ? workers
                                : static_cast<int>(std::thread::hardware_concurrency());
    n_workers = std::max(1, std::min(n_workers, m_count));

    std::atomic<int> cursor{0};
    std::mutex shared_mutex;
    std::exception_ptr first_error;
    auto work = [&]() {
        try {
            for (int j = cursor.fetch_add(1); j < m_count; j = cursor.fetch_add(1)) {
                TrajectoryRecord rec =
                    simulate_stream(p, m, cutoff, opts, static_cast<std::uint64_t>(j));
                for (int i = 0; i < n_samples; ++i) {
                    n_all(j, i) = rec.n_photon[i];
                    a_all(j, i) = rec.a_amp[i];
                    if (has_qubit) sz_all(j, i) = rec.sigma_z[i];
                }
                if (j == 0) {
                    std::lock_guard<std::mutex> lk(shared_mutex);
                    times = rec.times;
                }
            }
        } catch (...) {
            std::lock_guard<std::mutex> lk(shared_mutex);
            if (!first_error) first_error = std::current_exception();
            cursor.store(m_count);  // stop handing out work
        }
    };
    if (n_workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < n_workers; ++w) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    EnsembleSummary out;
    out.m = m_count;
    out.times = times;
    out.n_mean.resize(n_samples);
    out.n_se.resize(n_samples);
    out.amp_mean_a.resize(n_samples);
    out.mean_abs_a.resize(n_samples);
    if (has_qubit) {
        out.sz_mean.resize(n_samples);
        out.sz_se.resize(n_samples);
    }
    const double inv_m = 1.0 / m_count;
    for (int i = 0; i < n_samples; ++i) {
        out.n_mean[i] = n_all.col(i).mean();
        out.amp_mean_a[i] = std::abs(a_all.col(i).mean());
        out.mean_abs_a[i] = a_all.col(i).cwiseAbs().mean();
        double var = 0.0;
        for (int j = 0; j < m_count; ++j) {
            var += (n_all(j, i) - out.n_mean[i]) * (n_all(j, i) - out.n_mean[i]);
        }
        out.n_se[i] = m_count > 1 ? std::sqrt(var / (m_count - 1.0) * inv_m) : 0.0;
        if (has_qubit) {
            out.sz_mean[i] = sz_all.col(i).mean();
            double var_z = 0.0;
            for (int j = 0; j < m_count; ++j) {
                var_z += (sz_all(j, i) - out.sz_mean[i]) * (sz_all(j, i) - out.sz_mean[i]);
            }
            out.sz_se[i] = m_count > 1 ? std::sqrt(var_z / (m_count - 1.0) * inv_m) : 0.0;
        }
    }

    // Steady-window statistics from per-trajectory means over the last half.
    const int w0 = n_samples / 2;
    std::vector<double> traj_means(m_count, 0.0);
    for (int j = 0; j < m_count; ++j) {
        double acc = 0.0;
        for (int i = w0; i < n_samples; ++i) acc += n_all(j, i);
        traj_means[j] = acc / (n_samples - w0);
    }
    out.steady_n_mean =
        std::accumulate(traj_means.begin(), traj_means.end(), 0.0) * inv_m;
    double var = 0.0;
    for (double v : traj_means) {
        var += (v - out.steady_n_mean) * (v - out.steady_n_mean);
    }
    out.steady_n_se = m_count > 1 ? std::sqrt(var / (m_count - 1.0) * inv_m) : 0.0;
    return out;
}

}  // namespace bistab
