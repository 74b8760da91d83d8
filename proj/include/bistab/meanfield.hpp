#pragma once

#include <vector>

#include "bistab/models.hpp"

// Maxwell-Bloch mean-field treatment of the driven two-level JC system:
// factorized equations of motion for (alpha, beta, zeta) = (<a>, <sigma_->,
// <sigma_z>), all steady-state branches from a scalar self-consistency in
// x = |alpha|^2, and stability from the 5x5 real Jacobian.

namespace bistab {

/// Semiclassical state (cavity amplitude, qubit coherence, inversion).
struct MBState {
    Complex alpha{0.0, 0.0};
    Complex beta{0.0, 0.0};
    double zeta = -1.0;
};

/// One steady-state branch at a given drive frequency.
struct BranchPoint {
    MBState state;
    bool stable = false;
    double drive_frequency = 0.0;  ///< rad/ns
};

/// Branch sets along a drive-frequency sweep. branch_id orders branches by
/// |alpha|^2 ascending within each frequency (0 = dim).
struct MBSweepPoint {
    double omega_d = 0.0;
    std::vector<BranchPoint> branches;
};

/// Time derivative of the Maxwell-Bloch variables:
///   d alpha = -(kappa + i dw_c) alpha - i g beta + eps_d
///   d beta  = -(Gamma_q + i dw_q) beta + i g alpha zeta,  Gamma_q = gamma/2 + gamma_phi
///   d zeta  = -gamma (zeta + 1) + 2 i g (alpha* beta - alpha beta*)
MBState mb_rhs(const MBState& s, const SystemParams& p);

/// All steady states at p.omega_d with stability classification.
/// Requires gamma > 0.
std::vector<BranchPoint> mb_steady_states(const SystemParams& p);

/// Steady-state branches over a monotone drive-frequency grid (rad/ns).
std::vector<MBSweepPoint> mb_sweep(const SystemParams& p,
                                   const std::vector<double>& omega_d_grid);

/// Euclidean norm of the rhs, used for residual checks.
double mb_residual(const MBState& s, const SystemParams& p);

}  // namespace bistab
