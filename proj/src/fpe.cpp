#include "bistab/fpe.hpp"

#include <cmath>
#include <stdexcept>

namespace bistab {

namespace {

bool is_nonpositive_integer(Complex v) {
    if (std::abs(v.imag()) > 1e-14) return false;
    const double r = v.real();
    return r <= 1e-14 && std::abs(r - std::round(r)) < 1e-12;
}

}  // namespace

EffectiveParams effective_params(const SystemParams& p) {
    if (p.chi == 0.0) {
        throw std::invalid_argument("effective_params: chi must be nonzero (c undefined)");
    }
    EffectiveParams e;
    e.gamma_c = Complex(p.kappa, 2.0 * p.delta_omega_c());
    if (e.gamma_c == Complex(0.0, 0.0)) {
        throw std::invalid_argument("effective_params: gamma_c vanishes");
    }
    e.gamma_q = Complex(p.gamma, 2.0 * p.delta_omega_q()) + 2.0 * p.g * p.g / e.gamma_c;
    e.eps = -2.0 * kI * p.g * p.eps_d / e.gamma_c;
    e.c = e.gamma_q / (2.0 * kI * p.chi);
    return e;
}

Complex hyp0f2(Complex a, Complex b, Complex z) {
    if (is_nonpositive_integer(a) || is_nonpositive_integer(b)) {
        throw std::invalid_argument("hyp0f2: pole (parameter is a nonpositive integer)");
    }
    Complex term{1.0, 0.0};
    Complex sum{1.0, 0.0};
    constexpr int kMaxTerms = 100000;
    for (int k = 0; k < kMaxTerms; ++k) {
        const Complex denom = (static_cast<double>(k) + 1.0) * (a + static_cast<double>(k)) *
                              (b + static_cast<double>(k));
        if (denom == Complex(0.0, 0.0)) {
            throw std::invalid_argument("hyp0f2: pole in Pochhammer denominator");
        }
        term *= z / denom;
        sum += term;
        // Once the term ratio is safely below one the remaining tail is
        // bounded by a geometric series; stop when that bound is negligible.
        const double ratio = std::abs(z) / std::abs(denom);
        if (ratio < 0.5) {
            const double tail = std::abs(term) * ratio / (1.0 - ratio);
            if (tail < 1e-13 * std::abs(sum) || std::abs(term) == 0.0) return sum;
        }
    }
    throw NumericalError("hyp0f2: series did not converge within 1e5 terms");
}

Complex fpe_first_moment(const SystemParams& p) {
    const EffectiveParams e = effective_params(p);
    if (p.g == 0.0) {
        return 2.0 * p.eps_d / e.gamma_c;
    }
    const Complex cs = std::conj(e.c);
    const double z = 2.0 * std::norm(e.eps / p.chi);
    const Complex num = hyp0f2(e.c + 1.0, cs, z);
    const Complex den = hyp0f2(e.c, cs, z);
    if (den == Complex(0.0, 0.0)) {
        throw NumericalError("fpe_first_moment: denominator 0F2 vanished");
    }
    return (2.0 / e.gamma_c) * (p.eps_d - (e.eps * p.g / (p.chi * e.c)) * num / den);
}

SweepResult fpe_sweep(const SystemParams& p, const std::vector<double>& omega_d_grid) {
    for (size_t i = 1; i < omega_d_grid.size(); ++i) {
        if (omega_d_grid[i] <= omega_d_grid[i - 1]) {
            throw std::invalid_argument("fpe_sweep: grid must be strictly increasing");
        }
    }
    SweepResult res;
    res.omega_d = omega_d_grid;
    res.amp_a.assign(omega_d_grid.size(), std::nan(""));
    res.cutoff_used.assign(omega_d_grid.size(), 0);
    res.errors.assign(omega_d_grid.size(), "");
    for (size_t i = 0; i < omega_d_grid.size(); ++i) {
        SystemParams q = p;
        q.omega_d = omega_d_grid[i];
        try {
            res.amp_a[i] = std::abs(fpe_first_moment(q));
        } catch (const std::exception& e) {
            res.errors[i] = e.what();
        }
    }
    return res;
}

}  // namespace bistab
