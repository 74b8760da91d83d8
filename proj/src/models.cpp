#include "bistab/models.hpp"

#include <cmath>
#include <stdexcept>

namespace bistab {

void SystemParams::validate() const {
    if (kappa < 0 || gamma < 0 || gamma_phi < 0) {
        throw std::invalid_argument("SystemParams: rates must be nonnegative");
    }
    if (temperature < 0) {
        throw std::invalid_argument("SystemParams: temperature must be nonnegative");
    }
}

double transmon_frequency(int n, double omega_q, double chi) {
    if (n < 0) throw std::invalid_argument("transmon_frequency: n must be >= 0");
    return omega_q * n - 0.5 * chi * n * (1.0 - n);
}

double thermal_occupation(double omega, double temperature) {
    if (temperature <= 0.0) return 0.0;
    return 1.0 / std::expm1(kHbarOverKb * omega / temperature);
}

double critical_photon_number(double g, double delta) {
    if (g <= 0.0) throw std::invalid_argument("critical_photon_number: g must be positive");
    return delta * delta / (4.0 * g * g);
}

SparseOp build_jc(const SystemParams& p, const HilbertSpec& spec) {
    if (spec.transmon_levels != 2) {
        throw std::invalid_argument("build_jc: requires transmon_levels == 2");
    }
    const SparseOp a = annihilation(spec.cavity_cutoff);
    const SparseOp ad = adjoint(a);
    const SparseOp ic = identity_op(spec.cavity_cutoff);
    const SparseOp iq = identity_op(2);
    const SparseOp sm = lowering_ladder(2);
    const SparseOp sp = adjoint(sm);

    SparseOp h = SparseOp(p.delta_omega_c() * tensor(SparseOp(ad * a), iq))
               + SparseOp(0.5 * p.delta_omega_q() * tensor(ic, sigma_z()))
               + SparseOp(p.g * (tensor(ad, sm) + tensor(a, sp)))
               + SparseOp(kI * p.eps_d * tensor(SparseOp(ad - a), iq));
    return pruned(h);
}

SparseOp build_gjc(const SystemParams& p, const HilbertSpec& spec) {
    const int levels = spec.transmon_levels;
    const SparseOp a = annihilation(spec.cavity_cutoff);
    const SparseOp ad = adjoint(a);
    const SparseOp ic = identity_op(spec.cavity_cutoff);
    const SparseOp iq = identity_op(levels);

    // Drive-frame qudit diagonal, recentered to traceless.
    std::vector<double> diag(levels);
    double mean = 0.0;
    for (int n = 0; n < levels; ++n) {
        diag[n] = transmon_frequency(n, p.omega_q, p.chi) - n * p.omega_d;
        mean += diag[n];
    }
    mean /= levels;
    SparseOp qudit(levels, levels);
    for (int n = 0; n < levels; ++n) {
        qudit.insert(n, n) = diag[n] - mean;
    }
    qudit.makeCompressed();

    SparseOp ladder(levels, levels);
    for (int m = 0; m + 1 < levels; ++m) {
        ladder.insert(m, m + 1) = std::sqrt(static_cast<double>(m + 1));
    }
    ladder.makeCompressed();

    SparseOp h = SparseOp(p.delta_omega_c() * tensor(SparseOp(ad * a), iq))
               + tensor(ic, qudit)
               + SparseOp(p.g * (tensor(ad, ladder) + tensor(a, adjoint(ladder))))
               + SparseOp(kI * p.eps_d * tensor(SparseOp(ad - a), iq));
    return pruned(h);
}

SparseOp build_duffing(const SystemParams& p, int cavity_cutoff) {
    const double delta = p.delta();
    if (delta <= 0.0) {
        throw std::invalid_argument("build_duffing: singular detuning (delta must be > 0)");
    }
    const double kerr = std::pow(p.g, 4) / std::pow(delta, 3);
    const double linear = p.delta_omega_c() + p.g * p.g / delta - kerr;

    const SparseOp a = annihilation(cavity_cutoff);
    const SparseOp ad = adjoint(a);
    const SparseOp n = SparseOp(ad * a);

    SparseOp h = SparseOp(linear * n)
               - SparseOp(kerr * SparseOp(ad * SparseOp(ad * SparseOp(a * a))))
               + SparseOp(kI * p.eps_d * SparseOp(ad - a));
    return pruned(h);
}

std::vector<LindbladChannel> collapse_channels(
    const SystemParams& p, const HilbertSpec& spec,
    const std::vector<double>& relax_coeffs,
    const std::vector<double>& dephase_coeffs) {
    p.validate();
    const int levels = spec.transmon_levels;
    const SparseOp a = annihilation(spec.cavity_cutoff);
    const SparseOp ic = identity_op(spec.cavity_cutoff);
    const SparseOp iq = identity_op(levels);
    const double nbar = thermal_occupation(p.omega_c, p.temperature);

    std::vector<LindbladChannel> channels;
    channels.push_back({tensor(a, iq), 2.0 * p.kappa * (nbar + 1.0), ChannelKind::CavityLoss});
    if (nbar > 0.0) {
        channels.push_back({tensor(adjoint(a), iq), 2.0 * p.kappa * nbar, ChannelKind::CavityThermal});
    }

    SparseOp relax(levels, levels);
    for (int j = 0; j + 1 < levels; ++j) {
        const double alpha_j = (j < static_cast<int>(relax_coeffs.size()))
                                   ? relax_coeffs[j]
                                   : std::sqrt(static_cast<double>(j + 1));
        relax.insert(j, j + 1) = alpha_j;
    }
    relax.makeCompressed();
    channels.push_back({tensor(ic, relax), p.gamma, ChannelKind::TransmonRelax});

    SparseOp dephase(levels, levels);
    for (int j = 1; j < levels; ++j) {
        const double beta_j = (j < static_cast<int>(dephase_coeffs.size()))
                                  ? dephase_coeffs[j]
                                  : static_cast<double>(j);
        if (beta_j != 0.0) dephase.insert(j, j) = beta_j;
    }
    dephase.makeCompressed();
    channels.push_back({tensor(ic, dephase), p.gamma_phi, ChannelKind::TransmonDephase});
    return channels;
}

std::vector<LindbladChannel> collapse_channels_cavity(const SystemParams& p,
                                                      int cavity_cutoff) {
    p.validate();
    const SparseOp a = annihilation(cavity_cutoff);
    const double nbar = thermal_occupation(p.omega_c, p.temperature);
    std::vector<LindbladChannel> channels;
    channels.push_back({a, 2.0 * p.kappa * (nbar + 1.0), ChannelKind::CavityLoss});
    if (nbar > 0.0) {
        channels.push_back({adjoint(a), 2.0 * p.kappa * nbar, ChannelKind::CavityThermal});
    }
    return channels;
}

DeviceParams device_table(const std::string& name) {
    if (name == "D1") {
        return {"D1", 10.426, 0.984, 0.313, 314.0, 2.64, 4.00, -0.150};
    }
    if (name == "D2") {
        return {"D2", 10.567, 2.383, 0.335, 165.0, 2.20, 2.10, -0.242};
    }
    throw std::invalid_argument("device_table: unknown device '" + name + "'");
}

SystemParams device_preset(const std::string& name) {
    const DeviceParams d = device_table(name);
    if (d.t2_us > 2.0 * d.t1_us) {
        throw std::invalid_argument("device_preset: T2 exceeds 2*T1");
    }
    SystemParams p;
    p.omega_c = ghz(d.f_c_ghz);
    p.omega_q = ghz(d.f_c_ghz - d.delta_over_2pi_ghz);
    p.g = ghz(d.g_over_2pi_ghz);
    p.chi = ghz(d.chi_over_2pi_ghz);
    p.gamma = 1e-3 / d.t1_us;
    p.gamma_phi = 1e-3 / d.t2_us - 0.5e-3 / d.t1_us;
    p.kappa = 6.0 * p.gamma;
    p.omega_d = p.omega_c;
    p.temperature = (name == "D2") ? 0.2 : 0.0;
    return p;
}

}  // namespace bistab
