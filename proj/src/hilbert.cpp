#include "bistab/hilbert.hpp"

#include <cmath>
#include <string>

namespace bistab {

HilbertSpec::HilbertSpec(int cutoff, int levels)
    : cavity_cutoff(cutoff), transmon_levels(levels) {
    if (cutoff < 2 || levels < 2) {
        throw std::invalid_argument("HilbertSpec: cavity_cutoff and transmon_levels must be >= 2");
    }
}

SparseOp annihilation(int n_max) {
    if (n_max < 2) {
        throw std::invalid_argument("annihilation: invalid dimension " + std::to_string(n_max));
    }
    SparseOp a(n_max, n_max);
    a.reserve(Eigen::VectorXi::Constant(n_max, 1));
    for (int n = 1; n < n_max; ++n) {
        a.insert(n - 1, n) = std::sqrt(static_cast<double>(n));
    }
    a.makeCompressed();
    return a;
}

SparseOp ketbra(int levels, int m, int n) {
    if (m < 0 || n < 0 || m >= levels || n >= levels) {
        throw std::invalid_argument("ketbra: index out of range");
    }
    SparseOp op(levels, levels);
    op.insert(m, n) = 1.0;
    op.makeCompressed();
    return op;
}

SparseOp identity_op(int dim) {
    SparseOp id(dim, dim);
    id.setIdentity();
    return id;
}

SparseOp number_op(int n_max) {
    SparseOp n(n_max, n_max);
    n.reserve(Eigen::VectorXi::Constant(n_max, 1));
    for (int k = 1; k < n_max; ++k) {
        n.insert(k, k) = static_cast<double>(k);
    }
    n.makeCompressed();
    return n;
}

SparseOp sigma_z() {
    SparseOp sz(2, 2);
    sz.insert(0, 0) = -1.0;
    sz.insert(1, 1) = 1.0;
    sz.makeCompressed();
    return sz;
}

SparseOp lowering_ladder(int levels) {
    SparseOp sm(levels, levels);
    sm.reserve(Eigen::VectorXi::Constant(levels, 1));
    for (int j = 0; j + 1 < levels; ++j) {
        sm.insert(j, j + 1) = std::sqrt(static_cast<double>(j + 1));
    }
    sm.makeCompressed();
    return sm;
}

SparseOp tensor(const SparseOp& a, const SparseOp& b) {
    const int rows = static_cast<int>(a.rows() * b.rows());
    const int cols = static_cast<int>(a.cols() * b.cols());
    std::vector<Eigen::Triplet<Complex>> triplets;
    triplets.reserve(static_cast<size_t>(a.nonZeros()) * static_cast<size_t>(b.nonZeros()));
    for (int ka = 0; ka < a.outerSize(); ++ka) {
        for (SparseOp::InnerIterator ita(a, ka); ita; ++ita) {
            for (int kb = 0; kb < b.outerSize(); ++kb) {
                for (SparseOp::InnerIterator itb(b, kb); itb; ++itb) {
                    triplets.emplace_back(
                        static_cast<int>(ita.row() * b.rows() + itb.row()),
                        static_cast<int>(ita.col() * b.cols() + itb.col()),
                        ita.value() * itb.value());
                }
            }
        }
    }
    SparseOp out(rows, cols);
    out.setFromTriplets(triplets.begin(), triplets.end());
    return pruned(out);
}

SparseOp adjoint(const SparseOp& a) {
    return SparseOp(a.adjoint());
}

SparseOp pruned(const SparseOp& a, double tol) {
    SparseOp out = a;
    out.prune([tol](int, int, const Complex& v) { return std::abs(v) > tol; });
    out.makeCompressed();
    return out;
}

bool is_hermitian(const SparseOp& a, double tol) {
    if (a.rows() != a.cols()) return false;
    SparseOp diff = SparseOp(a - SparseOp(a.adjoint()));
    for (int k = 0; k < diff.outerSize(); ++k) {
        for (SparseOp::InnerIterator it(diff, k); it; ++it) {
            if (std::abs(it.value()) > tol) return false;
        }
    }
    return true;
}

StateVector fock_state(int dim, int n) {
    if (n < 0 || n >= dim) {
        throw std::invalid_argument("fock_state: index out of range");
    }
    StateVector psi = StateVector::Zero(dim);
    psi(n) = 1.0;
    return psi;
}

StateVector coherent_state(int dim, Complex alpha) {
    StateVector psi(dim);
    const double abs2 = std::norm(alpha);
    if (abs2 == 0.0) return fock_state(dim, 0);
    const double log_abs = std::log(std::abs(alpha));
    const double phase = std::arg(alpha);
    double log_fact = 0.0;  // log(n!)
    for (int n = 0; n < dim; ++n) {
        if (n > 0) log_fact += std::log(static_cast<double>(n));
        const double log_mag = -0.5 * abs2 + n * log_abs - 0.5 * log_fact;
        psi(n) = std::exp(Complex(log_mag, n * phase));
    }
    // renormalize the truncation tail
    psi /= psi.norm();
    return psi;
}

DensityMatrix pure_density(const StateVector& psi) {
    return psi * psi.adjoint();
}

Complex expectation(const DensityMatrix& rho, const SparseOp& op) {
    if (rho.rows() != op.rows() || rho.cols() != op.cols()) {
        throw std::invalid_argument("expectation: dimension mismatch");
    }
    // tr(rho op) = sum_ij rho_ij op_ji
    Complex acc = 0.0;
    for (int k = 0; k < op.outerSize(); ++k) {
        for (SparseOp::InnerIterator it(op, k); it; ++it) {
            acc += rho(it.col(), it.row()) * it.value();
        }
    }
    return acc;
}

Complex expectation(const StateVector& psi, const SparseOp& op) {
    if (psi.size() != op.rows()) {
        throw std::invalid_argument("expectation: dimension mismatch");
    }
    return psi.dot(op * psi);
}

DensityMatrix partial_trace(const DensityMatrix& rho, const HilbertSpec& spec,
                            Subsystem keep) {
    if (rho.rows() != spec.dim() || rho.cols() != spec.dim()) {
        throw std::invalid_argument("partial_trace: state does not match HilbertSpec");
    }
    const int nc = spec.cavity_cutoff;
    const int nt = spec.transmon_levels;
    if (keep == Subsystem::Cavity) {
        DensityMatrix out = DensityMatrix::Zero(nc, nc);
        for (int i = 0; i < nc; ++i)
            for (int j = 0; j < nc; ++j)
                for (int k = 0; k < nt; ++k)
                    out(i, j) += rho(spec.index(i, k), spec.index(j, k));
        return out;
    }
    DensityMatrix out = DensityMatrix::Zero(nt, nt);
    for (int i = 0; i < nt; ++i)
        for (int j = 0; j < nt; ++j)
            for (int k = 0; k < nc; ++k)
                out(i, j) += rho(spec.index(k, i), spec.index(k, j));
    return out;
}

Eigen::VectorXcd vectorize(const DensityMatrix& rho) {
    return Eigen::Map<const Eigen::VectorXcd>(rho.data(), rho.size());
}

DensityMatrix unvectorize(const Eigen::VectorXcd& v, int dim) {
    if (v.size() != static_cast<Eigen::Index>(dim) * dim) {
        throw std::invalid_argument("unvectorize: size mismatch");
    }
    return Eigen::Map<const DensityMatrix>(v.data(), dim, dim);
}

}  // namespace bistab
