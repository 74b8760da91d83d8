#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "bistab/hilbert.hpp"

using namespace bistab;

namespace {

DenseOp dense(const SparseOp& s) { return DenseOp(s); }

// Test-local dense Kronecker product, independent of tensor().
DenseOp kron_dense(const DenseOp& a, const DenseOp& b) {
    DenseOp out(a.rows() * b.rows(), a.cols() * b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

DenseOp random_dense(int rows, int cols, std::mt19937& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    DenseOp m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = Complex(u(rng), u(rng));
    return m;
}

SparseOp to_sparse(const DenseOp& d) {
    SparseOp s(static_cast<int>(d.rows()), static_cast<int>(d.cols()));
    for (int i = 0; i < d.rows(); ++i)
        for (int j = 0; j < d.cols(); ++j)
            if (std::abs(d(i, j)) > 0) s.insert(i, j) = d(i, j);
    s.makeCompressed();
    return s;
}

}  // namespace

TEST_CASE("annihilation operator entries") {
    CHECK(dense(annihilation(4))(0, 1) == Complex(1.0));
    CHECK(dense(annihilation(5))(3, 4) == Complex(2.0));
    CHECK_THROWS_AS(annihilation(1), std::invalid_argument);
}

TEST_CASE("canonical commutator on the truncated space") {
    const int n = 6;
    const DenseOp a = dense(annihilation(n));
    const DenseOp ad = a.adjoint();
    const DenseOp comm = a * ad - ad * a;
    // identity except the top Fock state, whose diagonal entry is -(n-1)
    for (int i = 0; i < n - 1; ++i) CHECK(std::abs(comm(i, i) - 1.0) < 1e-14);
    CHECK(std::abs(comm(n - 1, n - 1) - Complex(-(n - 1.0))) < 1e-14);
}

TEST_CASE("ketbra basics") {
    const SparseOp sm = ketbra(2, 0, 1);
    CHECK(dense(sm)(0, 1) == Complex(1.0));
    CHECK(dense(sm).cwiseAbs().sum() == 1.0);
    CHECK_THROWS_AS(ketbra(2, 2, 0), std::invalid_argument);

    // adjoint symmetry and completeness
    const int levels = 4;
    for (int m = 0; m < levels; ++m) {
        for (int n = 0; n < levels; ++n) {
            CHECK(dense(adjoint(ketbra(levels, m, n))).isApprox(dense(ketbra(levels, n, m))));
        }
    }
    DenseOp sum = DenseOp::Zero(levels, levels);
    for (int m = 0; m < levels; ++m) sum += dense(ketbra(levels, m, m));
    CHECK(sum.isApprox(DenseOp::Identity(levels, levels)));
}

TEST_CASE("tensor matches the dense Kronecker oracle") {
    CHECK(dense(tensor(identity_op(2), identity_op(3)))
              .isApprox(DenseOp::Identity(6, 6)));

    std::mt19937 rng(42);
    for (int trial = 0; trial < 5; ++trial) {
        const DenseOp a = random_dense(3, 3, rng);
        const DenseOp b = random_dense(4, 4, rng);
        CHECK(dense(tensor(to_sparse(a), to_sparse(b))).isApprox(kron_dense(a, b), 1e-12));

        // (A (x) B)(x (x) y) = (A x) (x) (B y)
        const DenseOp x = random_dense(3, 1, rng);
        const DenseOp y = random_dense(4, 1, rng);
        const DenseOp lhs = dense(tensor(to_sparse(a), to_sparse(b))) * kron_dense(x, y);
        CHECK(lhs.isApprox(kron_dense(a * x, b * y), 1e-12));

        // mixed product: (A (x) B)(C (x) D) = (AC) (x) (BD)
        const DenseOp c = random_dense(3, 3, rng);
        const DenseOp d = random_dense(4, 4, rng);
        const DenseOp prod = dense(SparseOp(tensor(to_sparse(a), to_sparse(b)) *
                                            tensor(to_sparse(c), to_sparse(d))));
        CHECK(prod.isApprox(kron_dense(a * c, b * d), 1e-12));
    }
}

TEST_CASE("tensor is associative") {
    std::mt19937 rng(7);
    const DenseOp a = random_dense(2, 2, rng);
    const DenseOp b = random_dense(3, 3, rng);
    const DenseOp c = random_dense(2, 2, rng);
    const SparseOp lhs = tensor(tensor(to_sparse(a), to_sparse(b)), to_sparse(c));
    const SparseOp rhs = tensor(to_sparse(a), tensor(to_sparse(b), to_sparse(c)));
    CHECK(dense(lhs).isApprox(dense(rhs)));
}

TEST_CASE("adjoint is an involution") {
    std::mt19937 rng(3);
    const DenseOp a = random_dense(5, 5, rng);
    CHECK(dense(adjoint(adjoint(to_sparse(a)))).isApprox(a));
}

TEST_CASE("expectation values") {
    const int n = 8;
    const SparseOp num = number_op(n);
    CHECK(std::abs(expectation(fock_state(n, 0), num)) == 0.0);

    // coherent state photon number from the Poisson-sum oracle
    const int cutoff = 40;
    const Complex alpha0(1.5, 0.0);
    const DensityMatrix rho = pure_density(coherent_state(cutoff, alpha0));
    double poisson_mean = 0.0;
    double log_pn = -std::norm(alpha0);  // log P_0
    for (int k = 0; k < cutoff; ++k) {
        if (k > 0) log_pn += std::log(std::norm(alpha0)) - std::log(static_cast<double>(k));
        poisson_mean += k * std::exp(log_pn);
    }
    CHECK(std::abs(expectation(rho, number_op(cutoff)).real() - poisson_mean) < 1e-9);
    CHECK(std::abs(expectation(rho, number_op(cutoff)).real() - 2.25) < 1e-6);

    // Hermitian operator -> real expectation
    CHECK(std::abs(expectation(rho, number_op(cutoff)).imag()) < 1e-12);

    CHECK_THROWS_AS(expectation(fock_state(4, 0), num), std::invalid_argument);
}

TEST_CASE("partial trace recovers product factors") {
    std::mt19937 rng(11);
    const HilbertSpec spec(3, 2);
    DenseOp rho_c = random_dense(3, 3, rng);
    rho_c = (rho_c * rho_c.adjoint()).eval();
    rho_c /= rho_c.trace();
    DenseOp rho_q = random_dense(2, 2, rng);
    rho_q = (rho_q * rho_q.adjoint()).eval();
    rho_q /= rho_q.trace();

    const DenseOp rho = kron_dense(rho_c, rho_q);
    CHECK(partial_trace(rho, spec, Subsystem::Cavity).isApprox(rho_c, 1e-12));
    CHECK(partial_trace(rho, spec, Subsystem::Transmon).isApprox(rho_q, 1e-12));
    CHECK(std::abs(partial_trace(rho, spec, Subsystem::Cavity).trace() - rho.trace()) < 1e-12);
}

TEST_CASE("partial trace of a maximally entangled pair") {
    const HilbertSpec spec(2, 2);
    StateVector bell = StateVector::Zero(4);
    bell(spec.index(0, 0)) = 1.0 / std::sqrt(2.0);
    bell(spec.index(1, 1)) = 1.0 / std::sqrt(2.0);
    const DensityMatrix rho = pure_density(bell);
    CHECK(partial_trace(rho, spec, Subsystem::Cavity)
              .isApprox(0.5 * DenseOp::Identity(2, 2), 1e-12));
    CHECK(partial_trace(rho, spec, Subsystem::Transmon)
              .isApprox(0.5 * DenseOp::Identity(2, 2), 1e-12));
}

TEST_CASE("operator constructors are deterministic") {
    CHECK(dense(annihilation(9)).isApprox(dense(annihilation(9))));
    CHECK(dense(lowering_ladder(4)).isApprox(dense(lowering_ladder(4))));
    CHECK(is_hermitian(number_op(5)));
    CHECK(!is_hermitian(annihilation(5)));
}

TEST_CASE("coherent state is normalized and displaced") {
    const StateVector psi = coherent_state(30, Complex(0.7, -0.4));
    CHECK(std::abs(psi.norm() - 1.0) < 1e-12);
    const Complex a_exp = expectation(psi, annihilation(30));
    CHECK(std::abs(a_exp - Complex(0.7, -0.4)) < 1e-9);
}
