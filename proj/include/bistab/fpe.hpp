#pragma once

#include "bistab/master.hpp"
#include "bistab/models.hpp"

// Closed-form transmon Fokker-Planck model obtained by adiabatic elimination
// of the cavity: effective constants, a direct-series 0F2 evaluator for
// complex arguments, and the resulting steady-state first moment of the
// cavity field.

namespace bistab {

/// Effective constants of the eliminated-cavity model:
///   gamma_c = kappa + 2i dw_c
///   gamma_q = gamma + 2i dw_q + 2 g^2 / gamma_c
///   eps     = -2i g eps_d / gamma_c
///   c       = gamma_q / (2i chi)
struct EffectiveParams {
    Complex gamma_c;
    Complex gamma_q;
    Complex eps;
    Complex c;
};

EffectiveParams effective_params(const SystemParams& p);

/// Generalized hypergeometric 0F2(a, b; z) = sum_k z^k / (k! (a)_k (b)_k),
/// summed with term-ratio adaptive truncation to ~1e-12 relative accuracy.
/// Throws std::invalid_argument when a or b is a nonpositive integer and
/// NumericalError if 1e5 terms do not converge.
Complex hyp0f2(Complex a, Complex b, Complex z);

/// Steady-state <a> of the effective model:
/// (2/gamma_c) [ eps_d - (eps g / (chi c)) 0F2(c+1, c*; 2|eps/chi|^2)
///                                         / 0F2(c,   c*; 2|eps/chi|^2) ].
Complex fpe_first_moment(const SystemParams& p);

/// |<a>| over a drive-frequency grid; per-point failures are recorded and do
/// not abort the sweep. Only amp_a is populated.
SweepResult fpe_sweep(const SystemParams& p, const std::vector<double>& omega_d_grid);

}  // namespace bistab
