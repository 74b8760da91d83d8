#include "bistab/run.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>

#include "bistab/fpe.hpp"
#include "bistab/io.hpp"
#include "bistab/meanfield.hpp"
#include "bistab/phasespace.hpp"
#include "bistab/version.hpp"

namespace bistab {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string out_path(const RunOptions& opt, const std::string& name) {
    fs::create_directories(opt.out_dir);
    return (fs::path(opt.out_dir) / name).string();
}

json base_manifest(const std::string& sub, const RunConfig& cfg, const RunOptions& opt) {
    json m;
    m["version"] = kVersion;
    m["subcommand"] = sub;
    m["config"] = cfg.source_text;
    m["model"] = model_name(cfg.model);
    m["seed"] = opt.seed.value_or(cfg.traj_seed);
    m["workers"] = opt.workers.value_or(cfg.workers);
    return m;
}

void finish_manifest(json& m, const RunOptions& opt,
                     std::chrono::steady_clock::time_point t0) {
    const auto dt = std::chrono::steady_clock::now() - t0;
    m["wall_time_s"] = std::chrono::duration<double>(dt).count();
    write_text_file(out_path(opt, "manifest.json"), m.dump(2) + "\n");
}

SweepOptions sweep_options(const RunConfig& cfg, const RunOptions& opt) {
    SweepOptions so;
    so.cutoff = cfg.cavity_cutoff;
    so.workers = opt.workers.value_or(cfg.workers);
    return so;
}

CsvTable sweep_table(const SweepResult& r) {
    CsvTable t;
    t.header = {"freq_ghz", "abs_a", "n_photon", "sigma_z", "abs_sm"};
    const int levels = r.populations.empty() ? 0
                       : static_cast<int>(r.populations.front().size());
    for (int j = 0; j < levels; ++j) t.header.push_back("p" + std::to_string(j));
    for (size_t i = 0; i < r.omega_d.size(); ++i) {
        std::vector<std::string> row;
        row.push_back(fmt_g17(to_ghz(r.omega_d[i])));
        row.push_back(r.amp_a.empty() ? "" : fmt_g17(r.amp_a[i]));
        row.push_back(r.n_photon.empty() ? "" : fmt_g17(r.n_photon[i]));
        row.push_back(r.sigma_z.empty() ? "" : fmt_g17(r.sigma_z[i]));
        row.push_back(r.amp_sm.empty() ? "" : fmt_g17(r.amp_sm[i]));
        for (int j = 0; j < levels; ++j) row.push_back(fmt_g17(r.populations[i][j]));
        t.add_row(std::move(row));
    }
    return t;
}

json sweep_errors_json(const SweepResult& r) {
    json errs = json::array();
    for (size_t i = 0; i < r.errors.size(); ++i) {
        if (!r.errors[i].empty()) {
            errs.push_back({{"freq_ghz", to_ghz(r.omega_d[i])}, {"error", r.errors[i]}});
        }
    }
    return errs;
}

void require(bool cond, const std::string& what) {
    if (!cond) throw ConfigError(what);
}

double require_drive_freq(const RunConfig& cfg) {
    require(cfg.drive_freq_ghz.has_value(),
            "this subcommand requires key 'drive_freq_ghz'");
    return ghz(*cfg.drive_freq_ghz);
}

json run_meanfield(const RunConfig& cfg, const RunOptions& opt, json& manifest) {
    require(cfg.model == RunModel::Meanfield,
            "subcommand 'meanfield' requires model = meanfield");
    const auto grid = cfg.sweep_grid();
    const auto sweep = mb_sweep(cfg.params, grid);

    CsvTable t;
    t.header = {"freq_ghz", "branch_id", "abs_alpha2", "re_alpha", "im_alpha",
                "re_beta", "im_beta", "zeta", "stable"};
    int n_multi = 0;
    for (const auto& pt : sweep) {
        if (pt.branches.size() > 1) ++n_multi;
        for (size_t b = 0; b < pt.branches.size(); ++b) {
            const auto& br = pt.branches[b];
            t.add_row({fmt_g17(to_ghz(pt.omega_d)), std::to_string(b),
                       fmt_g17(std::norm(br.state.alpha)),
                       fmt_g17(br.state.alpha.real()), fmt_g17(br.state.alpha.imag()),
                       fmt_g17(br.state.beta.real()), fmt_g17(br.state.beta.imag()),
                       fmt_g17(br.state.zeta), br.stable ? "1" : "0"});
        }
    }
    write_text_file(out_path(opt, "branches.csv"), t.to_string());
    manifest["outputs"] = {"branches.csv"};
    return json{{"points", sweep.size()}, {"multistable_points", n_multi}};
}

json run_steady(const RunConfig& cfg, const RunOptions& opt, json& manifest) {
    SystemParams p = cfg.params;
    p.omega_d = require_drive_freq(cfg);
    const SteadyPoint pt = solve_steady_point(p, cfg.model_spec(), sweep_options(cfg, opt));

    CsvTable t;
    t.header = {"freq_ghz", "abs_a", "n_photon", "sigma_z", "abs_sm"};
    for (int j = 0; j < pt.transmon_levels; ++j) t.header.push_back("p" + std::to_string(j));
    std::vector<std::string> row = {fmt_g17(*cfg.drive_freq_ghz), fmt_g17(std::abs(pt.a)),
                                    fmt_g17(pt.n_photon),
                                    pt.sigma_z ? fmt_g17(*pt.sigma_z) : "",
                                    pt.sigma_minus ? fmt_g17(std::abs(*pt.sigma_minus)) : ""};
    for (double pj : pt.populations) row.push_back(fmt_g17(pj));
    t.add_row(std::move(row));
    write_text_file(out_path(opt, "steady.csv"), t.to_string());

    manifest["outputs"] = {"steady.csv"};
    manifest["cutoff_used"] = pt.cutoff;
    return json{{"n_photon", pt.n_photon}, {"abs_a", std::abs(pt.a)},
                {"cutoff", pt.cutoff}};
}

json run_sweep(const RunConfig& cfg, const RunOptions& opt, json& manifest) {
    const auto grid = cfg.sweep_grid();
    const SweepResult r = transmission_sweep(cfg.params, cfg.model_spec(), grid,
                                             sweep_options(cfg, opt));
    write_text_file(out_path(opt, "sweep.csv"), sweep_table(r).to_string());
    manifest["outputs"] = {"sweep.csv"};
    manifest["cutoff_used"] = r.cutoff_used;
    manifest["errors"] = sweep_errors_json(r);
    size_t failed = 0;
    for (const auto& e : r.errors) {
        if (!e.empty()) ++failed;
    }
    if (failed == r.errors.size() && !r.errors.empty()) {
        throw NumericalError("sweep: every grid point failed; first error: " + r.errors.front());
    }
    return json{{"points", grid.size()}, {"failed_points", failed}};
}

int effective_cutoff(const RunConfig& cfg, const SystemParams& p, const ModelSpec& m,
                     const RunOptions& opt) {
    if (cfg.cavity_cutoff > 0) return cfg.cavity_cutoff;
    // auto: reuse the steady-state convergence criterion at this drive point
    return solve_steady_point(p, m, sweep_options(cfg, opt)).cutoff;
}

LabelThresholds trajectory_thresholds(const RunConfig& cfg, const SystemParams& p,
                                      const ModelSpec& m, int cutoff,
                                      const RunOptions& opt, json& notes) {
    LabelThresholds th;
    if (cfg.dim_bright_threshold) {
        th.dim_bright = *cfg.dim_bright_threshold;
        notes["threshold_source"] = "config";
    } else {
        // Boundary from the system's own steady state: geometric mean of the
        // two Q-function peak photon numbers when bimodal.
        SweepOptions so = sweep_options(cfg, opt);
        so.cutoff = cutoff;
        const SteadyPoint pt = solve_steady_point(p, m, so);
        const double ncrit = critical_photon_number(p.g, p.delta());
        const QGrid q = q_function(pt.rho_cavity,
                                   QGridSpec::centered(1.5 * std::sqrt(ncrit), 101));
        const ModeSet modes = find_modes(q);
        if (modes.peaks.size() >= 2) {
            const double n1 = modes.peaks[0].mean_photons;
            const double n2 = modes.peaks[1].mean_photons;
            th = thresholds_from_peaks(std::min(n1, n2), std::max(n1, n2));
            notes["threshold_source"] = "q_function_peaks";
            notes["q_peak_photons"] = {std::min(n1, n2), std::max(n1, n2)};
        } else {
            th.dim_bright = std::max(1.0, 2.0 * pt.n_photon);
            notes["threshold_source"] = "unimodal_fallback";
        }
    }
    th.dark = cfg.dark_threshold;
    return th;
}

json run_traj(const RunConfig& cfg, const RunOptions& opt, json& manifest) {
    SystemParams p = cfg.params;
    p.omega_d = require_drive_freq(cfg);
    const ModelSpec m = cfg.model_spec();
    const int cutoff = effective_cutoff(cfg, p, m, opt);

    TrajectoryOptions topt;
    topt.seed = opt.seed.value_or(cfg.traj_seed);
    topt.t_max = cfg.traj_t_max;
    topt.dt = cfg.traj_dt;
    topt.n_samples = cfg.traj_samples;
    topt.scheme = cfg.traj_scheme;

    manifest["cutoff_used"] = cutoff;
    json stats;
    stats["seed"] = topt.seed;
    stats["cutoff"] = cutoff;
    stats["scheme"] = cfg.traj_scheme == SseScheme::Weak2 ? "weak2" : "euler";

    if (cfg.traj_m == 1) {
        const TrajectoryRecord rec = sse_simulate(p, m, cutoff, topt);
        CsvTable t;
        t.header = {"t_2kappa", "n_photon", "sigma_z", "re_sm", "im_sm", "re_a", "im_a"};
        for (size_t i = 0; i < rec.times.size(); ++i) {
            t.add_row({fmt_g17(rec.times[i]), fmt_g17(rec.n_photon[i]),
                       rec.sigma_z.empty() ? "" : fmt_g17(rec.sigma_z[i]),
                       rec.sigma_minus.empty() ? "" : fmt_g17(rec.sigma_minus[i].real()),
                       rec.sigma_minus.empty() ? "" : fmt_g17(rec.sigma_minus[i].imag()),
                       fmt_g17(rec.a_amp[i].real()), fmt_g17(rec.a_amp[i].imag())});
        }
        write_text_file(out_path(opt, "traj.csv"), t.to_string());
        manifest["outputs"] = {"traj.csv", "traj_stats.json"};

        stats["dt_2kappa"] = rec.dt;
        if (!rec.sigma_z.empty()) {
            const LabelThresholds th = trajectory_thresholds(cfg, p, m, cutoff, opt, stats);
            const auto labels = label_states(rec, th);
            const SwitchingStats sw = switching_stats(rec, labels, th);
            stats["thresholds"] = {{"dark", th.dark}, {"dim_bright", th.dim_bright},
                                   {"hysteresis", th.hysteresis},
                                   {"smooth_window_2kappa", th.smooth_window}};
            stats["n_switches"] = sw.n_switches;
            stats["simultaneity"] = sw.simultaneity;
            stats["insufficient_statistics"] = sw.insufficient_statistics;
            stats["dwell_bright"] = sw.dwell_bright;
            stats["dwell_dim"] = sw.dwell_dim;
            stats["dwell_dark"] = sw.dwell_dark;
        }
        write_text_file(out_path(opt, "traj_stats.json"), stats.dump(2) + "\n");
        return json{{"samples", rec.times.size()}};
    }

    const EnsembleSummary ens = ensemble_run(p, m, cutoff, topt, cfg.traj_m,
                                             opt.workers.value_or(cfg.workers));
    CsvTable t;
    t.header = {"t_2kappa", "n_mean", "n_se", "sz_mean", "sz_se", "abs_mean_a"};
    for (size_t i = 0; i < ens.times.size(); ++i) {
        t.add_row({fmt_g17(ens.times[i]), fmt_g17(ens.n_mean[i]), fmt_g17(ens.n_se[i]),
                   ens.sz_mean.empty() ? "" : fmt_g17(ens.sz_mean[i]),
                   ens.sz_se.empty() ? "" : fmt_g17(ens.sz_se[i]),
                   fmt_g17(ens.amp_mean_a[i])});
    }
    write_text_file(out_path(opt, "ensemble.csv"), t.to_string());
    stats["m"] = ens.m;
    stats["steady_n_mean"] = ens.steady_n_mean;
    stats["steady_n_se"] = ens.steady_n_se;
    write_text_file(out_path(opt, "traj_stats.json"), stats.dump(2) + "\n");
    manifest["outputs"] = {"ensemble.csv", "traj_stats.json"};
    return json{{"m", ens.m}, {"steady_n_mean", ens.steady_n_mean}};
}

json run_qfunc(const RunConfig& cfg, const RunOptions& opt, json& manifest) {
    SystemParams p = cfg.params;
    p.omega_d = require_drive_freq(cfg);
    const ModelSpec m = cfg.model_spec();
    SweepOptions so = sweep_options(cfg, opt);
    const SteadyPoint pt = solve_steady_point(p, m, so);

    const double ncrit = critical_photon_number(p.g, p.delta());
    const double halfwidth =
        cfg.qfunc_halfwidth > 0 ? cfg.qfunc_halfwidth : 1.5 * std::sqrt(ncrit);
    const QGrid q = q_function(pt.rho_cavity,
                               QGridSpec::centered(halfwidth, cfg.qfunc_resolution));
    const ModeSet modes = find_modes(q);

    std::string csv;
    for (int iy = 0; iy < q.spec.resolution; ++iy) {
        for (int ix = 0; ix < q.spec.resolution; ++ix) {
            if (ix) csv += ',';
            csv += fmt_g17(q.values(iy, ix));
        }
        csv += '\n';
    }
    write_text_file(out_path(opt, "qgrid.csv"), csv);

    json meta;
    meta["x_min"] = q.spec.x_min;
    meta["x_max"] = q.spec.x_max;
    meta["y_min"] = q.spec.y_min;
    meta["y_max"] = q.spec.y_max;
    meta["resolution"] = q.spec.resolution;
    meta["truncation_warning"] = q.truncation_warning;
    meta["cutoff"] = pt.cutoff;
    meta["total_mass"] = q.total_mass();
    meta["equal_height"] = modes.equal_height;
    json peaks = json::array();
    for (const auto& pk : modes.peaks) {
        peaks.push_back({{"x", pk.x}, {"y", pk.y}, {"height", pk.height},
                         {"mean_photons", pk.mean_photons}});
    }
    meta["peaks"] = peaks;
    write_text_file(out_path(opt, "qfunc_meta.json"), meta.dump(2) + "\n");

    manifest["outputs"] = {"qgrid.csv", "qfunc_meta.json"};
    manifest["cutoff_used"] = pt.cutoff;
    return json{{"peaks", modes.peaks.size()}, {"equal_height", modes.equal_height}};
}

json run_fpe(const RunConfig& cfg, const RunOptions& opt, json& manifest) {
    require(cfg.model == RunModel::Fpe, "subcommand 'fpe' requires model = fpe");
    const auto grid = cfg.sweep_grid();
    const SweepResult r = fpe_sweep(cfg.params, grid);
    write_text_file(out_path(opt, "fpe.csv"), sweep_table(r).to_string());
    manifest["outputs"] = {"fpe.csv"};
    manifest["errors"] = sweep_errors_json(r);
    return json{{"points", grid.size()}};
}

}  // namespace

json run_subcommand(const std::string& subcommand, const RunConfig& cfg,
                    const RunOptions& opt) {
    const auto t0 = std::chrono::steady_clock::now();
    json manifest = base_manifest(subcommand, cfg, opt);
    json summary;
    try {
        if (subcommand == "meanfield") summary = run_meanfield(cfg, opt, manifest);
        else if (subcommand == "steady") summary = run_steady(cfg, opt, manifest);
        else if (subcommand == "sweep") summary = run_sweep(cfg, opt, manifest);
        else if (subcommand == "traj") summary = run_traj(cfg, opt, manifest);
        else if (subcommand == "qfunc") summary = run_qfunc(cfg, opt, manifest);
        else if (subcommand == "fpe") summary = run_fpe(cfg, opt, manifest);
        else throw ConfigError("unknown subcommand '" + subcommand + "'");
    } catch (const std::exception& e) {
        manifest["error"] = e.what();
        finish_manifest(manifest, opt, t0);
        throw;
    }
    manifest["summary"] = summary;
    finish_manifest(manifest, opt, t0);
    return manifest;
}

SystemParams figure_ratio_params(double kappa, double drive_scale) {
    SystemParams p;
    p.omega_c = ghz(10.567);
    p.omega_q = ghz(10.567 - 2.383);
    p.g = 0.14 * p.delta();
    p.kappa = kappa;
    p.gamma = 2.0 * kappa / 12.0;
    p.gamma_phi = 0.5 * p.gamma;
    p.temperature = 0.0;
    p.eps_d = drive_scale * 2.0 * kappa;
    p.omega_d = ghz(10.6005);
    p.chi = ghz(-0.242);  // used by GJC variants of the figure runs
    return p;
}

}  // namespace bistab
