#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "bistab/hilbert.hpp"

// Driven-cavity / multilevel-qubit model builders. All Hamiltonians are
// constructed directly in the frame rotating at the drive frequency, so they
// are time independent. Internal units: time in ns, angular frequencies and
// rates in rad/ns (1 GHz of ordinary frequency = 2*pi rad/ns).

namespace bistab {

/// 2*pi* f for f in GHz.
inline double ghz(double f) { return 2.0 * M_PI * f; }
/// Back to ordinary frequency in GHz.
inline double to_ghz(double omega) { return omega / (2.0 * M_PI); }

/// hbar/k_B in ns*K; converts rad/ns to kelvin via T_omega = kHbarOverKb * omega.
inline constexpr double kHbarOverKb = 7.638232577e-3;

/// Physical rates and frequencies of the driven cavity-transmon system.
/// Angular frequencies and rates in rad/ns; kappa is half the cavity energy
/// decay rate (the cavity energy decays at 2*kappa).
struct SystemParams {
    double omega_c = 0.0;      ///< bare cavity frequency
    double omega_q = 0.0;      ///< lowest transmon transition frequency
    double g = 0.0;            ///< dipole coupling strength
    double chi = 0.0;          ///< transmon anharmonicity (negative for a transmon)
    double eps_d = 0.0;        ///< drive amplitude
    double omega_d = 0.0;      ///< drive frequency
    double kappa = 0.0;        ///< half cavity energy decay rate
    double gamma = 0.0;        ///< qubit relaxation rate
    double gamma_phi = 0.0;    ///< pure dephasing rate
    double temperature = 0.0;  ///< bath temperature in kelvin

    double delta() const { return std::abs(omega_c - omega_q); }
    double delta_omega_c() const { return omega_c - omega_d; }
    double delta_omega_q() const { return omega_q - omega_d; }

    /// Throws std::invalid_argument on negative rates or temperature.
    void validate() const;
};

/// Table of measured device constants; EJ/EC is metadata only.
struct DeviceParams {
    std::string name;
    double f_c_ghz = 0.0;
    double delta_over_2pi_ghz = 0.0;
    double g_over_2pi_ghz = 0.0;
    double ej_over_ec = 0.0;
    double t1_us = 0.0;
    double t2_us = 0.0;
    double chi_over_2pi_ghz = 0.0;
};

enum class ChannelKind { CavityLoss, CavityThermal, TransmonRelax, TransmonDephase };

/// One Lindblad dissipation channel; the jump operator is sqrt(rate)*op.
struct LindbladChannel {
    SparseOp op;
    double rate = 0.0;
    ChannelKind kind = ChannelKind::CavityLoss;
};

/// Duffing-ladder transmon level frequency omega_n = omega_q n - chi n(1-n)/2.
double transmon_frequency(int n, double omega_q, double chi);

/// Thermal photon number of a mode at omega (rad/ns) and temperature (K).
double thermal_occupation(double omega, double temperature);

/// Critical photon number delta^2 / (4 g^2) of the dispersive expansion.
double critical_photon_number(double g, double delta);

/// Two-level Jaynes-Cummings Hamiltonian in the drive frame:
/// dw_c a^t a + (dw_q/2) sigma_z + g(a^t sigma_- + a sigma_+) + i eps_d (a^t - a).
SparseOp build_jc(const SystemParams& p, const HilbertSpec& spec);

/// Multilevel (generalized) Jaynes-Cummings Hamiltonian in the drive frame with
/// RWA couplings g sqrt(m+1) between |m+1, n_c> and |m, n_c+1>. The qudit
/// diagonal is recentered to be traceless so the two-level case coincides
/// entrywise with build_jc (the shift is a global energy offset).
SparseOp build_gjc(const SystemParams& p, const HilbertSpec& spec);

/// Dressed-cavity Duffing reduction at sigma_z = -1 (cavity-only space):
/// (dw_c + g^2/delta - g^4/delta^3) a^t a - (g^4/delta^3) a^t a^t a a
/// + i eps_d (a^t - a).
SparseOp build_duffing(const SystemParams& p, int cavity_cutoff);

/// Dissipation channels for the composite cavity-transmon space. Default
/// ladder coefficients are alpha_j = sqrt(j+1) (relaxation) and beta_j = j
/// (dephasing); pass explicit arrays to override. At T = 0 the thermal a^t
/// channel is omitted.
std::vector<LindbladChannel> collapse_channels(
    const SystemParams& p, const HilbertSpec& spec,
    const std::vector<double>& relax_coeffs = {},
    const std::vector<double>& dephase_coeffs = {});

/// Cavity-only channels for the Duffing model.
std::vector<LindbladChannel> collapse_channels_cavity(const SystemParams& p,
                                                      int cavity_cutoff);

/// Measured constants of the two experimental devices.
DeviceParams device_table(const std::string& name);

/// SystemParams for a named device ("D1" or "D2"). gamma = 1/T1 and
/// gamma_phi = 1/T2 - 1/(2 T1). kappa is not part of the published table and
/// defaults to 6*gamma (so 2*kappa/gamma = 12); override via config. D2 runs
/// carry the 200 mK bath temperature used for its master-equation curves.
SystemParams device_preset(const std::string& name);

}  // namespace bistab
