#include "bistab/phasespace.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace bistab {

QGrid q_function(const DensityMatrix& rho_cavity, const QGridSpec& spec) {
    const int d = static_cast<int>(rho_cavity.rows());
    if (rho_cavity.rows() != rho_cavity.cols() || d < 1) {
        throw std::invalid_argument("q_function: invalid density matrix");
    }
    if (spec.resolution < 2) {
        throw std::invalid_argument("q_function: resolution must be >= 2");
    }
    QGrid grid;
    grid.spec = spec;
    grid.values.resize(spec.resolution, spec.resolution);

    const double corner2 =
        std::max({spec.x_min * spec.x_min, spec.x_max * spec.x_max}) +
        std::max({spec.y_min * spec.y_min, spec.y_max * spec.y_max});
    grid.truncation_warning = corner2 > 0.8 * d;

    // log(n!) table
    std::vector<double> log_fact(d, 0.0);
    for (int n = 1; n < d; ++n) log_fact[n] = log_fact[n - 1] + std::log(static_cast<double>(n));

    StateVector coeff(d);
    for (int iy = 0; iy < spec.resolution; ++iy) {
        const double y = grid.y_at(iy);
        for (int ix = 0; ix < spec.resolution; ++ix) {
            const double x = grid.x_at(ix);
            const double abs2 = x * x + y * y;
            const double phase = std::atan2(y, x);
            const double log_abs = (abs2 > 0) ? 0.5 * std::log(abs2) : -745.0;
            for (int n = 0; n < d; ++n) {
                const double lm = -0.5 * abs2 + n * log_abs - 0.5 * log_fact[n];
                coeff(n) = std::exp(Complex(lm, n * phase));
            }
            const double q = (coeff.dot(rho_cavity * coeff)).real() / M_PI;
            grid.values(iy, ix) = std::max(q, 0.0);
        }
    }
    return grid;
}

Eigen::VectorXd photon_distribution(const DensityMatrix& rho_cavity) {
    if (rho_cavity.rows() != rho_cavity.cols()) {
        throw std::invalid_argument("photon_distribution: invalid density matrix");
    }
    return rho_cavity.diagonal().real();
}

std::array<double, 3> bloch_vector(const DensityMatrix& rho_qubit) {
    if (rho_qubit.rows() != 2 || rho_qubit.cols() != 2) {
        throw std::invalid_argument("bloch_vector: requires a 2x2 density matrix");
    }
    const Complex r01 = rho_qubit(0, 1);
    return {2.0 * r01.real(), 2.0 * rho_qubit(1, 0).imag(),
            (rho_qubit(1, 1) - rho_qubit(0, 0)).real()};
}

ModeSet find_modes(const QGrid& grid, const ModeOptions& opts) {
    const int res = grid.spec.resolution;
    if (res < 32) {
        throw std::invalid_argument("find_modes: resolution must be >= 32");
    }
    if (grid.values.rows() != res || grid.values.cols() != res) {
        throw std::invalid_argument("find_modes: grid shape mismatch");
    }
    const double vmax = grid.values.maxCoeff();
    ModeSet modes;
    if (vmax <= 0.0) return modes;

    const double floor = opts.min_height_frac * vmax;
    for (int iy = 0; iy < res; ++iy) {
        for (int ix = 0; ix < res; ++ix) {
            const double v = grid.values(iy, ix);
            if (v < floor) continue;
            bool peak = true;
            for (int dy = -1; dy <= 1 && peak; ++dy) {
                for (int dx = -1; dx <= 1 && peak; ++dx) {
                    if (dx == 0 && dy == 0) continue;
                    const int jx = ix + dx, jy = iy + dy;
                    if (jx < 0 || jy < 0 || jx >= res || jy >= res) continue;
                    if (grid.values(jy, jx) > v) peak = false;
                }
            }
            if (peak) {
                modes.peaks.push_back({grid.x_at(ix), grid.y_at(iy), v,
                                       grid.x_at(ix) * grid.x_at(ix) +
                                           grid.y_at(iy) * grid.y_at(iy)});
            }
        }
    }

    // Merge plateau duplicates within one grid cell, keeping the higher peak.
    const double dx = (grid.spec.x_max - grid.spec.x_min) / (res - 1);
    const double dy = (grid.spec.y_max - grid.spec.y_min) / (res - 1);
    std::sort(modes.peaks.begin(), modes.peaks.end(),
              [](const QMode& a, const QMode& b) { return a.height > b.height; });
    std::vector<QMode> merged;
    for (const auto& p : modes.peaks) {
        bool near = false;
        for (const auto& q : merged) {
            if (std::abs(p.x - q.x) <= dx * 1.5 && std::abs(p.y - q.y) <= dy * 1.5) {
                near = true;
                break;
            }
        }
        if (!near) merged.push_back(p);
    }
    modes.peaks = std::move(merged);

    if (modes.peaks.size() >= 2) {
        const double h0 = modes.peaks[0].height, h1 = modes.peaks[1].height;
        modes.equal_height = (h0 - h1) <= opts.equal_height_tol * h0;
    }
    return modes;
}

}  // namespace bistab
