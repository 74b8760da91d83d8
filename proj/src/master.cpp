#include "bistab/master.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>

namespace bistab {

namespace {

// vec(A rho B) = (B^T kron A) vec(rho) for column-major vectorization.
SparseOp left_mult(const SparseOp& a, int dim) {
    return tensor(identity_op(dim), a);
}

SparseOp right_mult(const SparseOp& b, int dim) {
    return tensor(SparseOp(b.transpose()), identity_op(dim));
}

double max_abs_entry(const SparseOp& m) {
    double v = 0.0;
    for (int k = 0; k < m.outerSize(); ++k) {
        for (SparseOp::InnerIterator it(m, k); it; ++it) {
            v = std::max(v, std::abs(it.value()));
        }
    }
    return v;
}

}  // namespace

Liouvillian build_liouvillian(const SparseOp& h,
                              const std::vector<LindbladChannel>& channels) {
    const int d = static_cast<int>(h.rows());
    if (h.rows() != h.cols()) {
        throw std::invalid_argument("build_liouvillian: Hamiltonian must be square");
    }
    SparseOp action = SparseOp(-kI * (left_mult(h, d) - right_mult(h, d)));
    for (const auto& ch : channels) {
        if (ch.op.rows() != d || ch.op.cols() != d) {
            throw std::invalid_argument("build_liouvillian: channel dimension mismatch");
        }
        if (ch.rate < 0.0) {
            throw std::invalid_argument("build_liouvillian: negative channel rate");
        }
        if (ch.rate == 0.0 || ch.op.nonZeros() == 0) continue;
        const SparseOp c = SparseOp(std::sqrt(ch.rate) * ch.op);
        const SparseOp cd = adjoint(c);
        const SparseOp cdc = SparseOp(cd * c);
        action += SparseOp(tensor(SparseOp(c.conjugate()), c)
                           - 0.5 * (left_mult(cdc, d) + right_mult(cdc, d)));
    }
    return {d, pruned(action)};
}

namespace {

// Bordered system [[L, w], [t^T, 0]] [x; mu] = [0; 1] with both borders the
// vectorized identity (trace functional). Nonsingular exactly when the steady
// state is unique and has nonzero trace.
SparseOp bordered(const Liouvillian& liou) {
    const int n = liou.dim();
    const int d = liou.hilbert_dim;
    std::vector<Eigen::Triplet<Complex>> trip;
    trip.reserve(liou.action.nonZeros() + 2 * d);
    for (int k = 0; k < liou.action.outerSize(); ++k) {
        for (SparseOp::InnerIterator it(liou.action, k); it; ++it) {
            trip.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
        }
    }
    for (int i = 0; i < d; ++i) {
        const int diag = i * d + i;
        trip.emplace_back(diag, n, 1.0);  // w column
        trip.emplace_back(n, diag, 1.0);  // trace row
    }
    SparseOp m(n + 1, n + 1);
    m.setFromTriplets(trip.begin(), trip.end());
    m.makeCompressed();
    return m;
}

DensityMatrix finalize_steady(const Liouvillian& liou, const Eigen::VectorXcd& x,
                              double residual_tol) {
    const int d = liou.hilbert_dim;
    DensityMatrix rho = unvectorize(x.head(liou.dim()), d);
    rho = 0.5 * (rho + rho.adjoint().eval());
    const double tr = rho.trace().real();
    if (!std::isfinite(tr) || std::abs(tr) < 1e-12) {
        throw NumericalError("steady_state: solution has vanishing trace");
    }
    rho /= tr;
    const double scale = std::max(max_abs_entry(liou.action), 1e-300);
    const double res = liou.apply_vec(vectorize(rho)).norm() / scale;
    if (!(res < residual_tol)) {
        throw NumericalError("steady_state: residual " + std::to_string(res) +
                             " exceeds tolerance");
    }
    return rho;
}

}  // namespace

DensityMatrix steady_state(const Liouvillian& liou, const SteadyOptions& opts) {
    const int n = liou.dim();
    const SparseOp m = bordered(liou);
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(n + 1);
    rhs(n) = 1.0;

    auto direct = [&]() -> Eigen::VectorXcd {
        Eigen::SparseLU<SparseOp> lu;
        lu.compute(m);
        if (lu.info() != Eigen::Success) {
            throw NumericalError("steady_state: singular bordered system (degenerate null space?)");
        }
        return lu.solve(rhs);
    };

    if (n <= opts.direct_threshold) {
        return finalize_steady(liou, direct(), opts.residual_tol);
    }

    Eigen::BiCGSTAB<SparseOp, Eigen::IncompleteLUT<Complex>> solver;
    solver.preconditioner().setDroptol(1e-6);
    solver.preconditioner().setFillfactor(24);
    solver.setTolerance(opts.iterative_tol);
    solver.setMaxIterations(opts.max_iterations);
    solver.compute(m);
    if (solver.info() == Eigen::Success) {
        Eigen::VectorXcd x = solver.solve(rhs);
        if (solver.info() == Eigen::Success) {
            try {
                return finalize_steady(liou, x, opts.residual_tol);
            } catch (const NumericalError&) {
                // fall through to direct solve
            }
        }
    }
    return finalize_steady(liou, direct(), opts.residual_tol);
}

std::vector<std::pair<double, DensityMatrix>> evolve(
    const DensityMatrix& rho0, const Liouvillian& liou,
    const std::vector<double>& t_out, const EvolveOptions& opts) {
    const int d = liou.hilbert_dim;
    if (rho0.rows() != d || rho0.cols() != d) {
        throw std::invalid_argument("evolve: initial state dimension mismatch");
    }
    if (std::abs(rho0.trace().real() - 1.0) > 1e-6) {
        throw std::invalid_argument("evolve: initial state must have unit trace");
    }
    if (t_out.empty()) return {};
    for (size_t i = 1; i < t_out.size(); ++i) {
        if (t_out[i] <= t_out[i - 1]) {
            throw std::invalid_argument("evolve: output times must be strictly increasing");
        }
    }

    // Dormand-Prince 5(4) tableau (nodes unused: the system is autonomous).
    static const double a21 = 1.0 / 5;
    static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                        a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static const double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    auto symmetrized = [d](const Eigen::VectorXcd& v) {
        DensityMatrix r = unvectorize(v, d);
        r = 0.5 * (r + r.adjoint().eval());
        return vectorize(r);
    };

    Eigen::VectorXcd y = vectorize(rho0);
    double t = 0.0;
    const double t_end = t_out.back();
    const double rate_scale = std::max(max_abs_entry(liou.action), 1e-12);
    double h = std::min(0.1 / rate_scale, t_end > 0 ? t_end : 1.0);
    if (opts.max_step > 0) h = std::min(h, opts.max_step);

    std::vector<std::pair<double, DensityMatrix>> out;
    size_t next_out = 0;
    while (next_out < t_out.size() && t_out[next_out] <= t + 1e-300) {
        out.emplace_back(t_out[next_out], unvectorize(y, d));
        ++next_out;
    }

    const auto& a = liou.action;
    while (next_out < t_out.size()) {
        const double t_target = t_out[next_out];
        bool hit_target = false;
        double step = h;
        if (t + step >= t_target) {
            step = t_target - t;
            hit_target = true;
        }
        if (step < 1e-14 * std::max(1.0, std::abs(t))) {
            throw NumericalError("evolve: step size underflow at t = " + std::to_string(t));
        }

        Eigen::VectorXcd k1 = a * y;
        Eigen::VectorXcd k2 = a * (y + step * (a21 * k1));
        Eigen::VectorXcd k3 = a * (y + step * (a31 * k1 + a32 * k2));
        Eigen::VectorXcd k4 = a * (y + step * (a41 * k1 + a42 * k2 + a43 * k3));
        Eigen::VectorXcd k5 = a * (y + step * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        Eigen::VectorXcd k6 = a * (y + step * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        Eigen::VectorXcd y5 = y + step * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        Eigen::VectorXcd k7 = a * y5;
        Eigen::VectorXcd err_vec =
            step * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

        double err = 0.0;
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            const double sc = opts.atol + opts.rtol * std::max(std::abs(y(i)), std::abs(y5(i)));
            err = std::max(err, std::abs(err_vec(i)) / sc);
        }

        if (err <= 1.0) {
            t += step;
            y = symmetrized(y5);
            if (hit_target) {
                out.emplace_back(t, unvectorize(y, d));
                ++next_out;
            }
        }
        const double factor = (err > 0) ? 0.9 * std::pow(err, -0.2) : 5.0;
        h = step * std::clamp(factor, 0.2, 5.0);
        if (opts.max_step > 0) h = std::min(h, opts.max_step);
        if (!(h > 0) || !std::isfinite(err)) {
            throw NumericalError("evolve: step size underflow at t = " + std::to_string(t));
        }
    }
    return out;
}

SparseOp build_model_hamiltonian(const SystemParams& p, const ModelSpec& m, int cutoff) {
    switch (m.kind) {
        case ModelKind::Jc:
            return build_jc(p, HilbertSpec(cutoff, 2));
        case ModelKind::Gjc:
            return build_gjc(p, HilbertSpec(cutoff, m.transmon_levels));
        case ModelKind::Duffing:
            return build_duffing(p, cutoff);
    }
    throw std::invalid_argument("build_model_hamiltonian: unknown model");
}

std::vector<LindbladChannel> build_model_channels(const SystemParams& p,
                                                  const ModelSpec& m, int cutoff) {
    if (m.kind == ModelKind::Duffing) {
        return collapse_channels_cavity(p, cutoff);
    }
    const int levels = (m.kind == ModelKind::Jc) ? 2 : m.transmon_levels;
    return collapse_channels(p, HilbertSpec(cutoff, levels));
}

namespace {

SteadyPoint observables_from_rho(const SystemParams&, const ModelSpec& m, int cutoff,
                                 DensityMatrix rho) {
    SteadyPoint pt;
    pt.cutoff = cutoff;
    pt.rho = std::move(rho);
    const SparseOp a_cav = annihilation(cutoff);
    if (m.kind == ModelKind::Duffing) {
        pt.transmon_levels = 0;
        pt.rho_cavity = pt.rho;
        pt.a = expectation(pt.rho, a_cav);
        pt.n_photon = expectation(pt.rho, SparseOp(adjoint(a_cav) * a_cav)).real();
        return pt;
    }
    const int levels = (m.kind == ModelKind::Jc) ? 2 : m.transmon_levels;
    const HilbertSpec spec(cutoff, levels);
    pt.transmon_levels = levels;
    pt.rho_cavity = partial_trace(pt.rho, spec, Subsystem::Cavity);
    const DensityMatrix rho_q = partial_trace(pt.rho, spec, Subsystem::Transmon);
    pt.a = expectation(pt.rho_cavity, a_cav);
    pt.n_photon = expectation(pt.rho_cavity, SparseOp(adjoint(a_cav) * a_cav)).real();
    pt.populations.resize(levels);
    for (int j = 0; j < levels; ++j) pt.populations[j] = rho_q(j, j).real();
    pt.sigma_z = 1.0 - 2.0 * pt.populations[0];
    pt.sigma_minus = expectation(rho_q, lowering_ladder(levels));
    return pt;
}

SteadyPoint solve_at_cutoff(const SystemParams& p, const ModelSpec& m, int cutoff,
                            const SteadyOptions& so) {
    const SparseOp h = build_model_hamiltonian(p, m, cutoff);
    const Liouvillian liou = build_liouvillian(h, build_model_channels(p, m, cutoff));
    return observables_from_rho(p, m, cutoff, steady_state(liou, so));
}

}  // namespace

SteadyPoint solve_steady_point(const SystemParams& p, const ModelSpec& m,
                               const SweepOptions& opts) {
    if (opts.cutoff > 0) {
        return solve_at_cutoff(p, m, opts.cutoff, opts.steady);
    }
    // Automatic cutoff: grow until <n> moves by less than auto_rel_tol.
    int cutoff = opts.min_cutoff;
    SteadyPoint current = solve_at_cutoff(p, m, cutoff, opts.steady);
    while (cutoff < opts.max_cutoff) {
        const int next = std::min(opts.max_cutoff, cutoff + std::max(8, cutoff / 2));
        SteadyPoint refined = solve_at_cutoff(p, m, next, opts.steady);
        const double scale = std::max({refined.n_photon, current.n_photon, 1e-9});
        const bool converged =
            std::abs(refined.n_photon - current.n_photon) < opts.auto_rel_tol * scale;
        current = std::move(refined);
        cutoff = next;
        if (converged) return current;
    }
    throw NumericalError("solve_steady_point: cutoff not converged at max_cutoff = " +
                         std::to_string(opts.max_cutoff));
}

SweepResult transmission_sweep(const SystemParams& p, const ModelSpec& m,
                               const std::vector<double>& omega_d_grid,
                               const SweepOptions& opts) {
    for (size_t i = 1; i < omega_d_grid.size(); ++i) {
        if (omega_d_grid[i] <= omega_d_grid[i - 1]) {
            throw std::invalid_argument("transmission_sweep: grid must be strictly increasing");
        }
    }
    const size_t n = omega_d_grid.size();
    const bool has_transmon = m.kind != ModelKind::Duffing;
    const int levels = has_transmon ? ((m.kind == ModelKind::Jc) ? 2 : m.transmon_levels) : 0;

    SweepResult res;
    res.omega_d = omega_d_grid;
    res.amp_a.assign(n, std::nan(""));
    res.n_photon.assign(n, std::nan(""));
    if (has_transmon) {
        res.sigma_z.assign(n, std::nan(""));
        res.amp_sm.assign(n, std::nan(""));
        res.populations.assign(n, std::vector<double>(levels, std::nan("")));
    }
    res.cutoff_used.assign(n, 0);
    res.errors.assign(n, "");

    int workers = opts.workers > 0 ? opts.workers
                                   : static_cast<int>(std::thread::hardware_concurrency());
    workers = std::max(1, std::min<int>(workers, static_cast<int>(n)));

    std::atomic<size_t> cursor{0};
    auto work = [&]() {
        for (size_t i = cursor.fetch_add(1); i < n; i = cursor.fetch_add(1)) {
            SystemParams q = p;
            q.omega_d = omega_d_grid[i];
            try {
                const SteadyPoint pt = solve_steady_point(q, m, opts);
                res.amp_a[i] = std::abs(pt.a);
                res.n_photon[i] = pt.n_photon;
                res.cutoff_used[i] = pt.cutoff;
                if (has_transmon) {
                    res.sigma_z[i] = *pt.sigma_z;
                    res.amp_sm[i] = std::abs(*pt.sigma_minus);
                    res.populations[i] = pt.populations;
                }
            } catch (const std::exception& e) {
                res.errors[i] = e.what();
            }
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }
    return res;
}

}  // namespace bistab
