#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "bistab/models.hpp"

using namespace bistab;

namespace {

DenseOp dense(const SparseOp& s) { return DenseOp(s); }

SystemParams d2_like() {
    SystemParams p;
    p.omega_c = ghz(10.567);
    p.omega_q = ghz(10.567 - 2.383);
    p.g = 0.14 * p.delta();
    p.chi = ghz(-0.242);
    p.kappa = 2.7e-3;
    p.gamma = 4.5e-4;
    p.eps_d = 0.045;
    p.omega_d = ghz(10.6005);
    return p;
}

}  // namespace

TEST_CASE("transmon ladder frequencies") {
    const double wq = ghz(8.184), chi = ghz(-0.242);
    CHECK(transmon_frequency(0, wq, chi) == 0.0);
    CHECK(transmon_frequency(1, wq, chi) == wq);
    // anharmonicity of the 1->2 transition equals chi
    const double w2 = transmon_frequency(2, wq, chi);
    CHECK(std::abs((w2 - 2.0 * wq) - chi) < 1e-12 * std::abs(chi));
    CHECK_THROWS_AS(transmon_frequency(-1, wq, chi), std::invalid_argument);
}

TEST_CASE("JC Hamiltonian structure") {
    SystemParams p = d2_like();

    SUBCASE("undriven uncoupled is diagonal with ground entry -dw_q/2") {
        p.g = 0.0;
        p.eps_d = 0.0;
        const DenseOp h = dense(build_jc(p, HilbertSpec(5, 2)));
        CHECK((h - DenseOp(h.diagonal().asDiagonal())).cwiseAbs().maxCoeff() < 1e-14);
        CHECK(std::abs(h(0, 0) - Complex(-0.5 * p.delta_omega_q())) < 1e-12);
    }

    SUBCASE("Hermitian with drive on") {
        CHECK(is_hermitian(build_jc(p, HilbertSpec(8, 2)), 1e-12));
    }

    SUBCASE("undriven JC commutes with the total excitation number") {
        p.eps_d = 0.0;
        const int cutoff = 6;
        const HilbertSpec spec(cutoff, 2);
        const DenseOp h = dense(build_jc(p, spec));
        const DenseOp n_tot =
            dense(tensor(number_op(cutoff), identity_op(2))) +
            dense(tensor(identity_op(cutoff),
                         SparseOp(adjoint(lowering_ladder(2)) * lowering_ladder(2))));
        const DenseOp comm = h * n_tot - n_tot * h;
        CHECK(comm.cwiseAbs().maxCoeff() < 1e-10);
    }

    CHECK_THROWS_AS(build_jc(d2_like(), HilbertSpec(5, 3)), std::invalid_argument);
}

TEST_CASE("GJC reduces to JC at two levels") {
    SystemParams p = d2_like();
    const HilbertSpec spec(7, 2);
    const DenseOp gjc = dense(build_gjc(p, spec));
    const DenseOp jc = dense(build_jc(p, spec));
    CHECK((gjc - jc).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("GJC coupling elements carry sqrt(m+1)") {
    SystemParams p = d2_like();
    const int cutoff = 5, levels = 4;
    const HilbertSpec spec(cutoff, levels);
    const DenseOp h = dense(build_gjc(p, spec));
    for (int n = 0; n + 1 < cutoff; ++n) {
        // |cavity n, transmon 1> <-> |cavity n+1, transmon 0>
        const Complex elem = h(spec.index(n, 1), spec.index(n + 1, 0));
        CHECK(std::abs(elem - Complex(p.g * std::sqrt(n + 1.0))) < 1e-10);
    }
    CHECK(is_hermitian(build_gjc(p, spec), 1e-12));
    CHECK(h.rows() == cutoff * levels);
}

TEST_CASE("Duffing reduction coefficients") {
    SystemParams p = d2_like();
    const double delta = p.delta();
    const double kerr = std::pow(p.g, 4) / std::pow(delta, 3);
    CHECK(kerr > 0.0);

    // g/delta = 0.14, delta/2pi = 2.383 GHz -> Kerr/2pi ~ 0.915 MHz
    CHECK(to_ghz(kerr) * 1e3 == doctest::Approx(0.915).epsilon(1e-3));

    const int cutoff = 6;
    const DenseOp h = dense(build_duffing(p, cutoff));
    // single-photon entry carries the full linear shift including +g^2/delta
    const double linear = h(1, 1).real() - p.delta_omega_c();
    CHECK(linear == doctest::Approx(p.g * p.g / delta - kerr).epsilon(1e-12));
    // Kerr ladder: <n|H|n> = linear n - kerr n(n-1)
    const double h3 = h(3, 3).real();
    CHECK(h3 == doctest::Approx(3 * (p.delta_omega_c() + p.g * p.g / delta - kerr) -
                                kerr * 6.0).epsilon(1e-12));

    SystemParams degenerate = p;
    degenerate.omega_q = degenerate.omega_c;
    CHECK_THROWS_AS(build_duffing(degenerate, 4), std::invalid_argument);
}

TEST_CASE("collapse channels") {
    SystemParams p = d2_like();

    SUBCASE("zero temperature has no thermal channel") {
        const auto ch = collapse_channels(p, HilbertSpec(4, 2));
        CHECK(ch.size() == 3);
        for (const auto& c : ch) CHECK(c.kind != ChannelKind::CavityThermal);
    }

    SUBCASE("thermal occupation at 200 mK") {
        // hbar omega_c / k_B ~ 0.507 K at 10.567 GHz
        CHECK(kHbarOverKb * p.omega_c == doctest::Approx(0.507).epsilon(1e-3));
        const double nbar = thermal_occupation(p.omega_c, 0.2);
        CHECK(nbar == doctest::Approx(0.086).epsilon(0.02));
        p.temperature = 0.2;
        const auto ch = collapse_channels(p, HilbertSpec(4, 2));
        CHECK(ch.size() == 4);
    }

    SUBCASE("two-level relaxation channel is sqrt(gamma) sigma-") {
        const auto ch = collapse_channels(p, HilbertSpec(3, 2));
        const auto& relax = ch[1];
        CHECK(relax.kind == ChannelKind::TransmonRelax);
        CHECK(relax.rate == p.gamma);
        const DenseOp op = dense(relax.op);
        const DenseOp expected = dense(tensor(identity_op(3), lowering_ladder(2)));
        CHECK((op - expected).cwiseAbs().maxCoeff() < 1e-14);
    }

    SUBCASE("rates are nonnegative by construction") {
        p.gamma = -1.0;
        CHECK_THROWS_AS(collapse_channels(p, HilbertSpec(3, 2)), std::invalid_argument);
    }
}

TEST_CASE("critical photon number") {
    const double delta = ghz(2.383);
    const double g = 0.14 * delta;
    CHECK(critical_photon_number(g, delta) == doctest::Approx(12.755).epsilon(1e-3));
    CHECK(critical_photon_number(g, delta) >= 12.5);
    CHECK(critical_photon_number(g, delta) <= 13.0);
    CHECK(critical_photon_number(1.0, 2.0) == doctest::Approx(1.0));
    // doubling g quarters N_crit
    CHECK(critical_photon_number(2.0 * g, delta) ==
          doctest::Approx(0.25 * critical_photon_number(g, delta)));
    CHECK_THROWS_AS(critical_photon_number(0.0, delta), std::invalid_argument);
}

TEST_CASE("device presets") {
    const SystemParams d1 = device_preset("D1");
    CHECK(to_ghz(d1.omega_c) == doctest::Approx(10.426));
    // dispersive shift g^2/delta ~ 99.6 MHz
    CHECK(to_ghz(d1.g * d1.g / d1.delta()) * 1e3 == doctest::Approx(99.6).epsilon(1e-3));
    CHECK(d1.gamma == doctest::Approx(1e-3 / 2.64));
    CHECK(d1.gamma_phi == doctest::Approx(1e-3 / 4.0 - 0.5e-3 / 2.64));
    CHECK(d1.gamma_phi >= 0.0);

    const SystemParams d2 = device_preset("D2");
    CHECK(to_ghz(d2.g) == doctest::Approx(0.335));
    CHECK(to_ghz(d2.chi) == doctest::Approx(-0.242));
    CHECK(d2.temperature == doctest::Approx(0.2));
    // dressed ground-state cavity frequency within 3 MHz of the observed 10.612
    const double dressed = to_ghz(d2.omega_c + d2.g * d2.g / d2.delta());
    CHECK(std::abs(dressed - 10.612) < 0.003);

    CHECK(device_table("D1").ej_over_ec == doctest::Approx(314.0));
    CHECK_THROWS_AS(device_preset("D3"), std::invalid_argument);
}
