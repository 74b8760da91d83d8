#pragma once

#include <complex>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

// Truncated Fock/qudit spaces and the sparse operator algebra on them.
// Composite indices always follow the fixed ordering cavity (x) transmon:
// basis state |n_c, n_t> maps to index n_c * transmon_levels + n_t.

namespace bistab {

using Complex = std::complex<double>;
using SparseOp = Eigen::SparseMatrix<Complex>;
using DenseOp = Eigen::MatrixXcd;
using StateVector = Eigen::VectorXcd;
using DensityMatrix = Eigen::MatrixXcd;

inline constexpr Complex kI{0.0, 1.0};

/// Magnitude below which structural zeros are dropped from sparse operators.
inline constexpr double kSparseDropTol = 1e-15;

/// Which tensor factor to keep in a partial trace.
enum class Subsystem { Cavity, Transmon };

/// Truncated composite Hilbert space: cavity Fock states |0..n_max-1> times
/// transmon levels |0..L-1>. Immutable after construction.
struct HilbertSpec {
    int cavity_cutoff = 2;
    int transmon_levels = 2;

    HilbertSpec() = default;
    HilbertSpec(int cutoff, int levels);

    int dim() const { return cavity_cutoff * transmon_levels; }
    int index(int n_cavity, int n_transmon) const {
        return n_cavity * transmon_levels + n_transmon;
    }
};

// --- operator constructors -------------------------------------------------

/// Fock-space annihilation operator a, entries (n-1, n) = sqrt(n).
SparseOp annihilation(int n_max);

/// |m><n| on an `levels`-dimensional qudit.
SparseOp ketbra(int levels, int m, int n);

SparseOp identity_op(int dim);

/// a^dagger a on an n_max-dimensional Fock space.
SparseOp number_op(int n_max);

/// Pauli sigma_z = |1><1| - |0><0| for a two-level system.
SparseOp sigma_z();

/// Generalized lowering ladder sum_j sqrt(j+1) |j><j+1|; equals sigma_- for
/// two levels.
SparseOp lowering_ladder(int levels);

// --- algebra ----------------------------------------------------------------

/// Kronecker product A (x) B in the fixed cavity (x) transmon ordering.
SparseOp tensor(const SparseOp& a, const SparseOp& b);

SparseOp adjoint(const SparseOp& a);

/// Drop entries with magnitude below tol (default kSparseDropTol).
SparseOp pruned(const SparseOp& a, double tol = kSparseDropTol);

bool is_hermitian(const SparseOp& a, double tol = 1e-12);

// --- states ----------------------------------------------------------------

StateVector fock_state(int dim, int n);

/// Truncated coherent state via the displacement series
/// <n|alpha> = exp(-|alpha|^2/2) alpha^n / sqrt(n!), evaluated in log space.
StateVector coherent_state(int dim, Complex alpha);

DensityMatrix pure_density(const StateVector& psi);

// --- reductions -------------------------------------------------------------

/// tr(rho op) or <psi|op|psi>.
Complex expectation(const DensityMatrix& rho, const SparseOp& op);
Complex expectation(const StateVector& psi, const SparseOp& op);

/// Trace out one factor of a composite density matrix.
DensityMatrix partial_trace(const DensityMatrix& rho, const HilbertSpec& spec,
                            Subsystem keep);

// --- vectorization (column-major), used by the superoperator machinery ------

Eigen::VectorXcd vectorize(const DensityMatrix& rho);
DensityMatrix unvectorize(const Eigen::VectorXcd& v, int dim);

}  // namespace bistab
