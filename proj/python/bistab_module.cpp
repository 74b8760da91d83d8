#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bistab/fpe.hpp"
#include "bistab/meanfield.hpp"
#include "bistab/phasespace.hpp"
#include "bistab/run.hpp"
#include "bistab/trajectory.hpp"
#include "bistab/version.hpp"

namespace py = pybind11;
using namespace bistab;

namespace {

ModelSpec model_from_string(const std::string& name, int levels) {
    if (name == "jc") return {ModelKind::Jc, 2};
    if (name == "gjc") return {ModelKind::Gjc, levels};
    if (name == "duffing") return {ModelKind::Duffing, 2};
    throw std::invalid_argument("model must be 'jc', 'gjc' or 'duffing'");
}

std::vector<double> grid_from_ghz(const std::vector<double>& freqs_ghz) {
    std::vector<double> grid(freqs_ghz.size());
    for (size_t i = 0; i < freqs_ghz.size(); ++i) grid[i] = ghz(freqs_ghz[i]);
    return grid;
}

py::dict sweep_to_dict(const SweepResult& r) {
    py::dict d;
    std::vector<double> freq(r.omega_d.size());
    for (size_t i = 0; i < r.omega_d.size(); ++i) freq[i] = to_ghz(r.omega_d[i]);
    d["freq_ghz"] = freq;
    d["abs_a"] = r.amp_a;
    if (!r.n_photon.empty()) d["n_photon"] = r.n_photon;
    if (!r.sigma_z.empty()) d["sigma_z"] = r.sigma_z;
    if (!r.amp_sm.empty()) d["abs_sm"] = r.amp_sm;
    if (!r.populations.empty()) d["populations"] = r.populations;
    d["cutoff_used"] = r.cutoff_used;
    d["errors"] = r.errors;
    return d;
}

py::dict point_to_dict(const SteadyPoint& pt) {
    py::dict d;
    d["cutoff"] = pt.cutoff;
    d["a"] = pt.a;
    d["abs_a"] = std::abs(pt.a);
    d["n_photon"] = pt.n_photon;
    if (pt.sigma_z) d["sigma_z"] = *pt.sigma_z;
    if (pt.sigma_minus) d["sigma_minus"] = *pt.sigma_minus;
    d["populations"] = pt.populations;
    d["rho_cavity"] = pt.rho_cavity;
    return d;
}

}  // namespace

PYBIND11_MODULE(_bistab, m) {
    m.doc() = "driven dispersive cavity-transmon bistability simulator";
    m.attr("__version__") = kVersion;

    py::class_<SystemParams>(m, "SystemParams")
        .def(py::init<>())
        .def_readwrite("omega_c", &SystemParams::omega_c)
        .def_readwrite("omega_q", &SystemParams::omega_q)
        .def_readwrite("g", &SystemParams::g)
        .def_readwrite("chi", &SystemParams::chi)
        .def_readwrite("eps_d", &SystemParams::eps_d)
        .def_readwrite("omega_d", &SystemParams::omega_d)
        .def_readwrite("kappa", &SystemParams::kappa)
        .def_readwrite("gamma", &SystemParams::gamma)
        .def_readwrite("gamma_phi", &SystemParams::gamma_phi)
        .def_readwrite("temperature", &SystemParams::temperature)
        .def_property_readonly("delta", &SystemParams::delta)
        .def("__repr__", [](const SystemParams& p) {
            return "SystemParams(f_c=" + std::to_string(to_ghz(p.omega_c)) +
                   " GHz, f_q=" + std::to_string(to_ghz(p.omega_q)) + " GHz)";
        });

    m.def("ghz", &ghz, py::arg("f_ghz"), "2*pi*f for f in GHz (rad/ns)");
    m.def("to_ghz", &to_ghz, py::arg("omega"));
    m.def("device_preset", &device_preset, py::arg("name"));
    m.def("figure_ratio_params", &figure_ratio_params,
          py::arg("kappa") = kFigureKappa, py::arg("drive_scale") = 25.0 / 3.0);
    m.def("critical_photon_number", &critical_photon_number, py::arg("g"), py::arg("delta"));
    m.def("transmon_frequency", &transmon_frequency, py::arg("n"), py::arg("omega_q"),
          py::arg("chi"));
    m.def("thermal_occupation", &thermal_occupation, py::arg("omega"), py::arg("temperature"));

    m.def("build_jc", [](const SystemParams& p, int cutoff) {
        return DenseOp(build_jc(p, HilbertSpec(cutoff, 2)));
    }, py::arg("params"), py::arg("cutoff"));
    m.def("build_gjc", [](const SystemParams& p, int cutoff, int levels) {
        return DenseOp(build_gjc(p, HilbertSpec(cutoff, levels)));
    }, py::arg("params"), py::arg("cutoff"), py::arg("levels"));
    m.def("build_duffing", [](const SystemParams& p, int cutoff) {
        return DenseOp(build_duffing(p, cutoff));
    }, py::arg("params"), py::arg("cutoff"));

    m.def("mb_steady_states", [](const SystemParams& p) {
        py::list out;
        for (const auto& b : mb_steady_states(p)) {
            py::dict d;
            d["alpha"] = b.state.alpha;
            d["beta"] = b.state.beta;
            d["zeta"] = b.state.zeta;
            d["stable"] = b.stable;
            d["abs_alpha2"] = std::norm(b.state.alpha);
            out.append(d);
        }
        return out;
    }, py::arg("params"));

    m.def("steady_point", [](const SystemParams& p, const std::string& model, int levels,
                             int cutoff, int workers) {
        SweepOptions so;
        so.cutoff = cutoff;
        so.workers = workers;
        SteadyPoint pt;
        {
            py::gil_scoped_release release;
            pt = solve_steady_point(p, model_from_string(model, levels), so);
        }
        return point_to_dict(pt);
    }, py::arg("params"), py::arg("model") = "jc", py::arg("levels") = 2,
       py::arg("cutoff") = 0, py::arg("workers") = 0);

    m.def("transmission_sweep", [](const SystemParams& p, const std::string& model,
                                   int levels, const std::vector<double>& freqs_ghz,
                                   int cutoff, int workers) {
        SweepOptions so;
        so.cutoff = cutoff;
        so.workers = workers;
        SweepResult r;
        {
            py::gil_scoped_release release;
            r = transmission_sweep(p, model_from_string(model, levels),
                                   grid_from_ghz(freqs_ghz), so);
        }
        return sweep_to_dict(r);
    }, py::arg("params"), py::arg("model"), py::arg("levels"), py::arg("freqs_ghz"),
       py::arg("cutoff") = 0, py::arg("workers") = 0);

    m.def("hyp0f2", &hyp0f2, py::arg("a"), py::arg("b"), py::arg("z"));
    m.def("fpe_first_moment", &fpe_first_moment, py::arg("params"));
    m.def("fpe_sweep", [](const SystemParams& p, const std::vector<double>& freqs_ghz) {
        return sweep_to_dict(fpe_sweep(p, grid_from_ghz(freqs_ghz)));
    }, py::arg("params"), py::arg("freqs_ghz"));

    m.def("q_function", [](const DensityMatrix& rho_cavity, double halfwidth, int resolution) {
        const QGrid q = q_function(rho_cavity, QGridSpec::centered(halfwidth, resolution));
        const ModeSet modes = find_modes(q);
        py::dict d;
        d["values"] = q.values;
        d["x_min"] = q.spec.x_min;
        d["x_max"] = q.spec.x_max;
        d["truncation_warning"] = q.truncation_warning;
        d["total_mass"] = q.total_mass();
        d["equal_height"] = modes.equal_height;
        py::list peaks;
        for (const auto& pk : modes.peaks) {
            py::dict e;
            e["x"] = pk.x;
            e["y"] = pk.y;
            e["height"] = pk.height;
            e["mean_photons"] = pk.mean_photons;
            peaks.append(e);
        }
        d["peaks"] = peaks;
        return d;
    }, py::arg("rho_cavity"), py::arg("halfwidth"), py::arg("resolution") = 101);

    m.def("photon_distribution", &photon_distribution, py::arg("rho_cavity"));

    m.def("sse_simulate", [](const SystemParams& p, const std::string& model, int levels,
                             int cutoff, std::uint64_t seed, double t_max, double dt,
                             int n_samples, const std::string& scheme) {
        TrajectoryOptions o;
        o.seed = seed;
        o.t_max = t_max;
        o.dt = dt;
        o.n_samples = n_samples;
        o.scheme = scheme == "euler" ? SseScheme::Euler : SseScheme::Weak2;
        TrajectoryRecord rec;
        {
            py::gil_scoped_release release;
            rec = sse_simulate(p, model_from_string(model, levels), cutoff, o);
        }
        py::dict d;
        d["times"] = rec.times;
        d["n_photon"] = rec.n_photon;
        if (!rec.sigma_z.empty()) d["sigma_z"] = rec.sigma_z;
        if (!rec.sigma_minus.empty()) d["sigma_minus"] = rec.sigma_minus;
        d["a"] = rec.a_amp;
        d["dt"] = rec.dt;
        return d;
    }, py::arg("params"), py::arg("model") = "jc", py::arg("levels") = 2,
       py::arg("cutoff") = 20, py::arg("seed") = 1, py::arg("t_max") = 100.0,
       py::arg("dt") = 0.0, py::arg("n_samples") = 1000, py::arg("scheme") = "weak2");

    m.def("ensemble_run", [](const SystemParams& p, const std::string& model, int levels,
                             int cutoff, std::uint64_t seed, double t_max, int n_samples,
                             int m_count, int workers) {
        TrajectoryOptions o;
        o.seed = seed;
        o.t_max = t_max;
        o.n_samples = n_samples;
        EnsembleSummary ens;
        {
            py::gil_scoped_release release;
            ens = ensemble_run(p, model_from_string(model, levels), cutoff, o, m_count,
                               workers);
        }
        py::dict d;
        d["times"] = ens.times;
        d["n_mean"] = ens.n_mean;
        d["n_se"] = ens.n_se;
        if (!ens.sz_mean.empty()) d["sz_mean"] = ens.sz_mean;
        d["amp_mean_a"] = ens.amp_mean_a;
        d["mean_abs_a"] = ens.mean_abs_a;
        d["steady_n_mean"] = ens.steady_n_mean;
        d["steady_n_se"] = ens.steady_n_se;
        return d;
    }, py::arg("params"), py::arg("model") = "jc", py::arg("levels") = 2,
       py::arg("cutoff") = 20, py::arg("seed") = 1, py::arg("t_max") = 100.0,
       py::arg("n_samples") = 1000, py::arg("m") = 10, py::arg("workers") = 0);
}
