#include "bistab/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace bistab {

namespace {

struct MBCoeffs {
    double kappa, dwc, dwq, gamma, gamma_q, g, eps;
    double s;  // saturation coefficient: zeta(x) = -1/(1 + s x)

    explicit MBCoeffs(const SystemParams& p)
        : kappa(p.kappa),
          dwc(p.delta_omega_c()),
          dwq(p.delta_omega_q()),
          gamma(p.gamma),
          gamma_q(0.5 * p.gamma + p.gamma_phi),
          g(p.g),
          eps(p.eps_d) {
        s = 4.0 * g * g * gamma_q / (gamma * (gamma_q * gamma_q + dwq * dwq));
    }

    Complex bracket(double x) const {
        const double zeta = -1.0 / (1.0 + s * x);
        return Complex(kappa, dwc) - g * g * zeta / Complex(gamma_q, dwq);
    }

    // F(x) = x |bracket(x)|^2 - eps^2; roots are steady-state photon numbers.
    double f(double x) const { return x * std::norm(bracket(x)) - eps * eps; }

    MBState state_at(double x) const {
        MBState st;
        const double zeta = -1.0 / (1.0 + s * x);
        st.alpha = eps / bracket(x);
        st.beta = kI * g * st.alpha * zeta / Complex(gamma_q, dwq);
        st.zeta = zeta;
        return st;
    }
};

// 5x5 real Jacobian over (Re a, Im a, Re b, Im b, zeta).
Eigen::Matrix<double, 5, 5> mb_jacobian(const MBState& s, const MBCoeffs& c) {
    Eigen::Matrix<double, 5, 5> j = Eigen::Matrix<double, 5, 5>::Zero();
    auto put_complex_block = [&](int row, int col, Complex m) {
        j(row, col) += m.real();
        j(row, col + 1) += -m.imag();
        j(row + 1, col) += m.imag();
        j(row + 1, col + 1) += m.real();
    };
    // d(f_alpha)/d(alpha, beta)
    put_complex_block(0, 0, -Complex(c.kappa, c.dwc));
    put_complex_block(0, 2, -kI * c.g);
    // d(f_beta)/d(alpha, beta, zeta)
    put_complex_block(2, 0, kI * c.g * s.zeta);
    put_complex_block(2, 2, -Complex(c.gamma_q, c.dwq));
    const Complex dbeta_dzeta = kI * c.g * s.alpha;
    j(2, 4) = dbeta_dzeta.real();
    j(3, 4) = dbeta_dzeta.imag();
    // f_zeta = -gamma (zeta+1) + 4 g (Im a Re b - Re a Im b)
    const double ar = s.alpha.real(), ai = s.alpha.imag();
    const double br = s.beta.real(), bi = s.beta.imag();
    j(4, 0) = -4.0 * c.g * bi;
    j(4, 1) = 4.0 * c.g * br;
    j(4, 2) = 4.0 * c.g * ai;
    j(4, 3) = -4.0 * c.g * ar;
    j(4, 4) = -c.gamma;
    return j;
}

bool is_stable(const MBState& s, const MBCoeffs& c) {
    Eigen::EigenSolver<Eigen::Matrix<double, 5, 5>> es(mb_jacobian(s, c), false);
    return es.eigenvalues().real().maxCoeff() < 0.0;
}

double bisect_root(const MBCoeffs& c, double lo, double hi) {
    double flo = c.f(lo);
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fmid = c.f(mid);
        if ((flo < 0) == (fmid < 0)) {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
        if (hi - lo <= 1e-12 * std::max(1.0, hi)) break;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

MBState mb_rhs(const MBState& s, const SystemParams& p) {
    const MBCoeffs c(p);
    MBState d;
    d.alpha = -Complex(c.kappa, c.dwc) * s.alpha - kI * c.g * s.beta + c.eps;
    d.beta = -Complex(c.gamma_q, c.dwq) * s.beta + kI * c.g * s.alpha * s.zeta;
    const Complex cross = std::conj(s.alpha) * s.beta - s.alpha * std::conj(s.beta);
    d.zeta = (-c.gamma * (s.zeta + 1.0) + (2.0 * kI * c.g * cross).real());
    return d;
}

double mb_residual(const MBState& s, const SystemParams& p) {
    const MBState d = mb_rhs(s, p);
    return std::sqrt(std::norm(d.alpha) + std::norm(d.beta) + d.zeta * d.zeta);
}

std::vector<BranchPoint> mb_steady_states(const SystemParams& p) {
    if (p.gamma <= 0.0) {
        throw std::invalid_argument("mb_steady_states: requires gamma > 0");
    }
    const MBCoeffs c(p);
    std::vector<BranchPoint> out;
    if (c.eps == 0.0) {
        BranchPoint b;
        b.state = MBState{};  // vacuum
        b.stable = is_stable(b.state, c);
        b.drive_frequency = p.omega_d;
        out.push_back(b);
        return out;
    }

    // Dense log-spaced scan in x = |alpha|^2, bracketing every sign change.
    // Any root satisfies x >= eps^2 / max|bracket|^2 and x <= eps^2 / kappa^2.
    const double bmax = c.kappa + std::abs(c.dwc)
                      + c.g * c.g / std::hypot(c.gamma_q, c.dwq);
    const double lo = 0.5 * c.eps * c.eps / (bmax * bmax);
    const double ncrit = critical_photon_number(c.g, std::abs(p.omega_c - p.omega_q));
    const double hi = std::max(10.0 * ncrit, 1.2 * c.eps * c.eps / (c.kappa * c.kappa));
    const int n_scan = 1000;
    const double ratio = std::pow(hi / lo, 1.0 / (n_scan - 1));

    std::vector<double> roots;
    double x_prev = lo;
    double f_prev = c.f(lo);
    for (int i = 1; i < n_scan; ++i) {
        const double x = lo * std::pow(ratio, i);
        const double fx = c.f(x);
        if (f_prev == 0.0) {
            roots.push_back(x_prev);
        } else if ((f_prev < 0) != (fx < 0)) {
            roots.push_back(bisect_root(c, x_prev, x));
        }
        x_prev = x;
        f_prev = fx;
    }
    if (roots.empty()) {
        throw std::runtime_error("mb_steady_states: root scan found no steady state (bracket exhausted)");
    }

    for (double x : roots) {
        BranchPoint b;
        b.state = c.state_at(x);
        b.stable = is_stable(b.state, c);
        b.drive_frequency = p.omega_d;
        out.push_back(b);
    }
    std::sort(out.begin(), out.end(), [](const BranchPoint& a, const BranchPoint& b) {
        return std::norm(a.state.alpha) < std::norm(b.state.alpha);
    });
    return out;
}

std::vector<MBSweepPoint> mb_sweep(const SystemParams& p,
                                   const std::vector<double>& omega_d_grid) {
    for (size_t i = 1; i < omega_d_grid.size(); ++i) {
        if (omega_d_grid[i] <= omega_d_grid[i - 1]) {
            throw std::invalid_argument("mb_sweep: grid must be strictly increasing");
        }
    }
    std::vector<MBSweepPoint> out;
    out.reserve(omega_d_grid.size());
    for (double wd : omega_d_grid) {
        SystemParams q = p;
        q.omega_d = wd;
        out.push_back({wd, mb_steady_states(q)});
    }
    return out;
}

}  // namespace bistab
