#pragma once

#include <vector>

#include "bistab/hilbert.hpp"

// Phase-space diagnostics: Husimi Q on a rectangular grid, photon-number
// distribution, Bloch-vector reduction, and peak detection with the
// equal-height criterion.

namespace bistab {

struct QGridSpec {
    double x_min = -5.0, x_max = 5.0;
    double y_min = -5.0, y_max = 5.0;
    int resolution = 101;  ///< points per axis

    /// Symmetric square grid spanning +-halfwidth.
    static QGridSpec centered(double halfwidth, int resolution = 101) {
        return {-halfwidth, halfwidth, -halfwidth, halfwidth, resolution};
    }
};

/// Q(x + iy) sampled on a grid; values(iy, ix) with x varying along columns.
struct QGrid {
    QGridSpec spec;
    Eigen::MatrixXd values;
    bool truncation_warning = false;  ///< grid reaches beyond |alpha|^2 > 0.8 cutoff

    double x_at(int ix) const {
        return spec.x_min + (spec.x_max - spec.x_min) * ix / (spec.resolution - 1);
    }
    double y_at(int iy) const {
        return spec.y_min + (spec.y_max - spec.y_min) * iy / (spec.resolution - 1);
    }
    double cell_area() const {
        const double dx = (spec.x_max - spec.x_min) / (spec.resolution - 1);
        const double dy = (spec.y_max - spec.y_min) / (spec.resolution - 1);
        return dx * dy;
    }
    /// Riemann integral of Q over the grid.
    double total_mass() const { return values.sum() * cell_area(); }
};

struct QMode {
    double x = 0.0, y = 0.0;
    double height = 0.0;
    double mean_photons = 0.0;  ///< |x + iy|^2
};

/// Peaks of a Q grid, sorted by height descending.
struct ModeSet {
    std::vector<QMode> peaks;
    bool equal_height = false;  ///< two dominant peaks within the relative tolerance
};

struct ModeOptions {
    double min_height_frac = 0.01;  ///< discard peaks below this fraction of the max
    double equal_height_tol = 0.05;
};

/// Husimi Q(alpha) = <alpha|rho|alpha>/pi for a cavity-only density matrix,
/// evaluated through the truncated coherent-state expansion in log space.
QGrid q_function(const DensityMatrix& rho_cavity, const QGridSpec& spec);

/// P_n = <n|rho|n>.
Eigen::VectorXd photon_distribution(const DensityMatrix& rho_cavity);

/// (sx, sy, sz) of a 2x2 density matrix.
std::array<double, 3> bloch_vector(const DensityMatrix& rho_qubit);

/// Local maxima above min_height_frac of the global maximum, merged within one
/// grid cell. Requires resolution >= 32.
ModeSet find_modes(const QGrid& grid, const ModeOptions& opts = {});

}  // namespace bistab
