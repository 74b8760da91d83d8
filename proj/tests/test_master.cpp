#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include <Eigen/Eigenvalues>

#include "bistab/master.hpp"
#include "bistab/run.hpp"

using namespace bistab;

namespace {

DenseOp dense(const SparseOp& s) { return DenseOp(s); }

DensityMatrix random_density(int dim, std::mt19937& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    DenseOp m(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) m(i, j) = Complex(u(rng), u(rng));
    DensityMatrix rho = m * m.adjoint();
    rho /= rho.trace();
    return rho;
}

SystemParams cavity_only(double kappa, double detuning, double eps) {
    SystemParams p;
    p.omega_c = ghz(5.0);
    p.omega_q = ghz(4.0);
    p.g = 0.0;
    p.kappa = kappa;
    p.eps_d = eps;
    p.omega_d = p.omega_c - detuning;
    return p;
}

}  // namespace

TEST_CASE("dissipator action on a two-level Fock space") {
    // H = 0, single channel sqrt(2 kappa) a: |1><1| -> 2 kappa (|0><0| - |1><1|)
    const double kappa = 0.37;
    SparseOp h(2, 2);
    const Liouvillian liou =
        build_liouvillian(h, {{annihilation(2), 2.0 * kappa, ChannelKind::CavityLoss}});
    DensityMatrix rho = DensityMatrix::Zero(2, 2);
    rho(1, 1) = 1.0;
    const DensityMatrix out = liou.apply(rho);
    CHECK(std::abs(out(0, 0) - Complex(2.0 * kappa)) < 1e-14);
    CHECK(std::abs(out(1, 1) + Complex(2.0 * kappa)) < 1e-14);
    CHECK(std::abs(out(0, 1)) + std::abs(out(1, 0)) < 1e-14);
}

TEST_CASE("Liouvillian annihilates the trace") {
    SystemParams p = figure_ratio_params();
    const int cutoff = 4;
    const Liouvillian liou =
        build_liouvillian(build_jc(p, HilbertSpec(cutoff, 2)),
                          collapse_channels(p, HilbertSpec(cutoff, 2)));
    std::mt19937 rng(23);
    for (int k = 0; k < 20; ++k) {
        const DensityMatrix rho = random_density(liou.hilbert_dim, rng);
        const double scale = liou.apply(rho).cwiseAbs().maxCoeff();
        CHECK(std::abs(liou.apply(rho).trace()) < 1e-10 * std::max(1.0, scale));
    }
}

TEST_CASE("Liouvillian spectrum touches zero") {
    SystemParams p = cavity_only(0.11, 0.05, 0.02);
    const Liouvillian liou = build_liouvillian(build_duffing(p, 3),
                                               collapse_channels_cavity(p, 3));
    const Eigen::ComplexEigenSolver<DenseOp> es(DenseOp(liou.action));
    double min_mag = 1e300;
    for (int i = 0; i < es.eigenvalues().size(); ++i) {
        min_mag = std::min(min_mag, std::abs(es.eigenvalues()(i)));
    }
    CHECK(min_mag < 1e-9);
}

TEST_CASE("driven empty cavity reaches the coherent steady state") {
    std::mt19937 rng(31);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        const double kappa = 0.002 + 0.02 * u(rng);
        const double detuning = (u(rng) - 0.5) * 4.0 * kappa;
        // keep |alpha| <= 2 so cutoff 30 is exact to rounding
        const double eps = kappa * 2.0 * u(rng);
        SystemParams p = cavity_only(kappa, detuning, eps);
        const Complex expected = p.eps_d / Complex(p.kappa, p.delta_omega_c());

        const int cutoff = 30;
        const Liouvillian liou = build_liouvillian(build_duffing(
            SystemParams{p.omega_c, p.omega_q, 0.0, 0.0, p.eps_d, p.omega_d,
                         p.kappa, 0.0, 0.0, 0.0}, cutoff),
            collapse_channels_cavity(p, cutoff));
        const DensityMatrix rho = steady_state(liou);
        const Complex a = expectation(rho, annihilation(cutoff));
        CHECK(std::abs(a - expected) < 1e-8 * std::max(1.0, std::abs(expected)));
        const double n = expectation(rho, number_op(cutoff)).real();
        CHECK(n == doctest::Approx(std::norm(expected)).epsilon(1e-7));
    }
}

TEST_CASE("undriven thermal cavity equilibrates to the Bose-Einstein state") {
    SystemParams p = cavity_only(0.01, 0.0, 0.0);
    p.temperature = 0.3;
    const int cutoff = 40;
    const double nbar = thermal_occupation(p.omega_c, p.temperature);
    REQUIRE(nbar > 0.05);

    const Liouvillian liou = build_liouvillian(build_duffing(p, cutoff),
                                               collapse_channels_cavity(p, cutoff));
    const DensityMatrix rho = steady_state(liou);
    CHECK(expectation(rho, number_op(cutoff)).real() ==
          doctest::Approx(nbar).epsilon(1e-6));
    // geometric distribution P_n = nbar^n / (1+nbar)^(n+1)
    for (int n = 0; n < 6; ++n) {
        const double pn = std::pow(nbar, n) / std::pow(1.0 + nbar, n + 1);
        CHECK(rho(n, n).real() == doctest::Approx(pn).epsilon(1e-5));
    }
    // off-diagonals vanish
    CHECK(std::abs(rho(0, 1)) < 1e-12);
}

TEST_CASE("evolve reproduces exponential cavity decay") {
    SystemParams p = cavity_only(0.08, 0.0, 0.0);
    const int cutoff = 8;
    const Liouvillian liou = build_liouvillian(SparseOp(cutoff, cutoff),
                                               collapse_channels_cavity(p, cutoff));
    DensityMatrix rho0 = DensityMatrix::Zero(cutoff, cutoff);
    rho0(3, 3) = 1.0;

    std::vector<double> t_out;
    for (int i = 1; i <= 8; ++i) t_out.push_back(i * 2.0);
    EvolveOptions eo;
    eo.rtol = 1e-10;
    eo.atol = 1e-13;
    const auto states = evolve(rho0, liou, t_out, eo);
    for (const auto& [t, rho] : states) {
        const double expected = 3.0 * std::exp(-2.0 * p.kappa * t);
        CHECK(std::abs(expectation(rho, number_op(cutoff)).real() - expected) < 1e-6);
        CHECK(std::abs(rho.trace().real() - 1.0) < 1e-8);
    }
}

TEST_CASE("zero Liouvillian evolves as the identity") {
    const int dim = 4;
    Liouvillian liou{dim, SparseOp(dim * dim, dim * dim)};
    std::mt19937 rng(5);
    const DensityMatrix rho0 = random_density(dim, rng);
    const auto states = evolve(rho0, liou, {1.0, 5.0});
    for (const auto& [t, rho] : states) CHECK((rho - rho0).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("long-time evolution agrees with the steady-state solve") {
    // fast-rate test point so t >> 1/gamma is cheap
    SystemParams p;
    p.omega_c = ghz(5.0);
    p.omega_q = ghz(4.9);
    p.g = 0.14 * p.delta();
    p.kappa = 0.012;
    p.gamma = 2.0 * p.kappa / 12.0;
    p.eps_d = 2.5 * 2.0 * p.kappa;
    p.omega_d = p.omega_c + p.g * p.g / p.delta();  // near the dressed resonance

    const int cutoff = 12;
    const HilbertSpec spec(cutoff, 2);
    const Liouvillian liou = build_liouvillian(build_jc(p, spec),
                                               collapse_channels(p, spec));
    const DensityMatrix rho_ss = steady_state(liou);

    DensityMatrix rho0 = DensityMatrix::Zero(spec.dim(), spec.dim());
    rho0(0, 0) = 1.0;  // |0> (x) |ground>
    const double t_end = 12.0 / p.gamma;
    const auto states = evolve(rho0, liou, {t_end});
    const DensityMatrix rho_t = states.back().second;

    // trace distance = sum of singular values / 2
    const Eigen::JacobiSVD<DenseOp> svd(rho_t - rho_ss);
    CHECK(svd.singularValues().sum() * 0.5 < 1e-6);

    // and from a second, very different initial condition
    std::mt19937 rng(77);
    const auto states2 = evolve(random_density(spec.dim(), rng), liou, {t_end});
    const Eigen::JacobiSVD<DenseOp> svd2(states2.back().second - rho_ss);
    CHECK(svd2.singularValues().sum() * 0.5 < 1e-6);
}

TEST_CASE("steady state is Hermitian, positive, unit trace") {
    SystemParams p = figure_ratio_params();
    const int cutoff = 20;
    const HilbertSpec spec(cutoff, 2);
    const Liouvillian liou = build_liouvillian(build_jc(p, spec),
                                               collapse_channels(p, spec));
    const DensityMatrix rho = steady_state(liou);
    CHECK(std::abs(rho.trace().real() - 1.0) < 1e-12);
    CHECK((rho - rho.adjoint()).cwiseAbs().maxCoeff() < 1e-10);
    Eigen::SelfAdjointEigenSolver<DenseOp> es(rho);
    CHECK(es.eigenvalues().minCoeff() > -1e-8);
}

TEST_CASE("low-drive transmission is a Lorentzian at the dressed frequency") {
    SystemParams p = figure_ratio_params();
    p.eps_d = 0.05 * p.kappa;
    // exact one-photon dressed frequency of the ground JC ladder,
    // w_c + (sqrt(delta^2 + 4 g^2) - delta)/2 = w_c + g^2/delta - g^4/delta^3 + ...
    const double delta = p.delta();
    const double w_dressed =
        p.omega_c + 0.5 * (std::sqrt(delta * delta + 4.0 * p.g * p.g) - delta);
    const double f_dressed = to_ghz(w_dressed);

    const int n = 21;
    std::vector<double> grid(n);
    const double half_span = 6.0 * to_ghz(p.kappa);
    for (int i = 0; i < n; ++i) {
        grid[i] = ghz(f_dressed - half_span + 2.0 * half_span * i / (n - 1.0));
    }
    SweepOptions so;
    so.cutoff = 6;
    const SweepResult r = transmission_sweep(p, {ModelKind::Jc, 2}, grid, so);

    // linear-response oracle: |eps / (kappa + i (w_dressed - w_d))|
    for (int i = 0; i < n; ++i) {
        const double expected = std::abs(p.eps_d / Complex(p.kappa, w_dressed - grid[i]));
        CHECK(r.amp_a[i] == doctest::Approx(expected).epsilon(0.03));
    }
    // peak centered at the dressed frequency bin
    int imax = 0;
    for (int i = 1; i < n; ++i)
        if (r.amp_a[i] > r.amp_a[imax]) imax = i;
    CHECK(std::abs(to_ghz(grid[imax]) - f_dressed) < 1.2 * 2.0 * half_span / (n - 1));
}

TEST_CASE("GJC with two levels sweeps identically to JC") {
    SystemParams p = figure_ratio_params();
    p.eps_d = 2.0 * 2.0 * p.kappa;
    const int n = 7;
    std::vector<double> grid(n);
    for (int i = 0; i < n; ++i) grid[i] = ghz(10.606 + 0.008 * i / (n - 1.0));
    SweepOptions so;
    so.cutoff = 20;
    const SweepResult jc = transmission_sweep(p, {ModelKind::Jc, 2}, grid, so);
    const SweepResult gjc = transmission_sweep(p, {ModelKind::Gjc, 2}, grid, so);
    for (int i = 0; i < n; ++i) {
        CHECK(std::abs(jc.amp_a[i] - gjc.amp_a[i]) < 1e-9);
        CHECK(std::abs(jc.n_photon[i] - gjc.n_photon[i]) < 1e-9);
        CHECK(std::abs(jc.sigma_z[i] - gjc.sigma_z[i]) < 1e-9);
        CHECK(std::abs(jc.amp_sm[i] - gjc.amp_sm[i]) < 1e-9);
    }
    // sweep invariants
    for (int i = 0; i < n; ++i) {
        CHECK(jc.n_photon[i] >= 0.0);
        CHECK(jc.sigma_z[i] >= -1.0);
        CHECK(jc.sigma_z[i] <= 1.0);
        double psum = 0.0;
        for (double pj : jc.populations[i]) psum += pj;
        CHECK(psum == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("steady state is cutoff converged") {
    SystemParams p = figure_ratio_params();
    p.eps_d = 1.5 * 2.0 * p.kappa;
    p.omega_d = ghz(10.6138);
    SweepOptions so;  // auto cutoff
    so.min_cutoff = 8;
    const SteadyPoint pt = solve_steady_point(p, {ModelKind::Jc, 2}, so);

    SweepOptions fixed;
    fixed.cutoff = 2 * pt.cutoff;
    const SteadyPoint doubled = solve_steady_point(p, {ModelKind::Jc, 2}, fixed);
    CHECK(std::abs(pt.n_photon - doubled.n_photon) <
          0.01 * std::max(1.0, doubled.n_photon));
    CHECK(std::abs(std::abs(pt.a) - std::abs(doubled.a)) < 0.01 * std::abs(doubled.a));
}

TEST_CASE("degenerate null space is reported") {
    // two disconnected blocks: no Hamiltonian, no channels connecting them
    SparseOp h(4, 4);
    SparseOp proj(4, 4);
    proj.insert(0, 1) = 1.0;  // decay only inside the first block
    proj.makeCompressed();
    const Liouvillian liou = build_liouvillian(h, {{proj, 1.0, ChannelKind::CavityLoss}});
    CHECK_THROWS_AS(steady_state(liou), NumericalError);
}
