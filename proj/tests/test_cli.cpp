#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <sstream>

#include <json.hpp>

#include "bistab/io.hpp"
#include "bistab/run.hpp"

using namespace bistab;
namespace fs = std::filesystem;

namespace {

std::string tmp_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "bistab_test" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir.string();
}

// cheap two-level system for CLI-level smoke runs
const char* kTinyConfig = R"cfg(
model = jc
transmon_levels = 2
cavity_cutoff = 8
f_c_ghz = 5.0
f_q_ghz = 4.9
g_ghz = 0.014
kappa_mhz = 0.64
gamma_mhz = 0.106
drive_scale = 1.2
drive_freq_ghz = 5.002
sweep_start_ghz = 5.0
sweep_stop_ghz = 5.004
sweep_points = 5
traj_seed = 7
traj_t_max = 5
traj_samples = 50
workers = 2
)cfg";

}  // namespace

TEST_CASE("parse_config resolves presets and overrides") {
    const RunConfig cfg = parse_config("model = gjc\npreset = D2\ntransmon_levels = 4\n"
                                       "drive_scale = 2.0\n");
    CHECK(cfg.model == RunModel::Gjc);
    CHECK(cfg.transmon_levels == 4);
    CHECK(to_ghz(cfg.params.omega_c) == doctest::Approx(10.567));
    CHECK(to_ghz(cfg.params.g) == doctest::Approx(0.335));
    CHECK(cfg.params.eps_d == doctest::Approx(2.0 * 2.0 * cfg.params.kappa));
    CHECK(cfg.params.temperature == doctest::Approx(0.2));
}

TEST_CASE("parse_config diagnostics") {
    // empty document lists the required key
    try {
        parse_config("");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("model") != std::string::npos);
    }

    // unknown key with line number
    try {
        parse_config("model = jc\nbogus_key = 3\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("line 2") != std::string::npos);
        CHECK(msg.find("bogus_key") != std::string::npos);
    }

    // negative rate names the key
    try {
        parse_config("model = jc\npreset = D1\ngamma_mhz = -1\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("gamma_mhz") != std::string::npos);
    }

    CHECK_THROWS_AS(parse_config("model = warp\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("model = jc\nmodel = jc\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("model = jc\nsweep_points = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("model = jc\ntransmon_levels = nope\n"), ConfigError);
}

TEST_CASE("config echo round-trips through the manifest") {
    const RunConfig cfg = parse_config(kTinyConfig);
    const RunConfig again = parse_config(cfg.source_text);
    CHECK(cfg == again);
}

TEST_CASE("steady subcommand writes table and manifest") {
    const RunConfig cfg = parse_config(kTinyConfig);
    RunOptions opt;
    opt.out_dir = tmp_dir("steady");
    const auto manifest = run_subcommand("steady", cfg, opt);
    CHECK(fs::exists(fs::path(opt.out_dir) / "steady.csv"));
    CHECK(fs::exists(fs::path(opt.out_dir) / "manifest.json"));

    const auto parsed = nlohmann::json::parse(read_text_file(
        (fs::path(opt.out_dir) / "manifest.json").string()));
    CHECK(parsed["subcommand"] == "steady");
    // manifest config suffices to re-run the job
    const RunConfig again = parse_config(parsed["config"].get<std::string>());
    CHECK(again == cfg);

    const std::string csv = read_text_file((fs::path(opt.out_dir) / "steady.csv").string());
    CHECK(csv.find("freq_ghz,abs_a,n_photon,sigma_z,abs_sm") == 0);
}

TEST_CASE("sweep subcommand emits the documented schema") {
    const RunConfig cfg = parse_config(kTinyConfig);
    RunOptions opt;
    opt.out_dir = tmp_dir("sweep");
    run_subcommand("sweep", cfg, opt);
    const std::string csv = read_text_file((fs::path(opt.out_dir) / "sweep.csv").string());
    std::istringstream lines(csv);
    std::string header;
    std::getline(lines, header);
    CHECK(header == "freq_ghz,abs_a,n_photon,sigma_z,abs_sm,p0,p1");
    int rows = 0;
    for (std::string row; std::getline(lines, row);) ++rows;
    CHECK(rows == 5);
}

TEST_CASE("traj subcommand is byte-deterministic for a fixed seed") {
    const RunConfig cfg = parse_config(kTinyConfig);
    RunOptions opt;
    opt.out_dir = tmp_dir("traj1");
    run_subcommand("traj", cfg, opt);
    const std::string a = read_text_file((fs::path(opt.out_dir) / "traj.csv").string());

    RunOptions opt2;
    opt2.out_dir = tmp_dir("traj2");
    run_subcommand("traj", cfg, opt2);
    const std::string b = read_text_file((fs::path(opt2.out_dir) / "traj.csv").string());
    CHECK(a == b);

    RunOptions opt3;
    opt3.out_dir = tmp_dir("traj3");
    opt3.seed = 8;
    run_subcommand("traj", cfg, opt3);
    const std::string c = read_text_file((fs::path(opt3.out_dir) / "traj.csv").string());
    CHECK(a != c);
}

TEST_CASE("qfunc subcommand writes grid and metadata") {
    const RunConfig cfg = parse_config(kTinyConfig);
    RunOptions opt;
    opt.out_dir = tmp_dir("qfunc");
    const auto manifest = run_subcommand("qfunc", cfg, opt);
    CHECK(fs::exists(fs::path(opt.out_dir) / "qgrid.csv"));
    const auto meta = nlohmann::json::parse(read_text_file(
        (fs::path(opt.out_dir) / "qfunc_meta.json").string()));
    CHECK(meta["resolution"] == 101);
    CHECK(meta["peaks"].size() >= 1);
}

TEST_CASE("fpe subcommand requires the fpe model") {
    RunConfig cfg = parse_config(kTinyConfig);
    RunOptions opt;
    opt.out_dir = tmp_dir("fpe_bad");
    CHECK_THROWS_AS(run_subcommand("fpe", cfg, opt), ConfigError);

    const RunConfig ok = parse_config(
        "model = fpe\npreset = D1\ndrive_scale = 2\n"
        "sweep_start_ghz = 10.50\nsweep_stop_ghz = 10.53\nsweep_points = 7\n");
    RunOptions opt2;
    opt2.out_dir = tmp_dir("fpe_ok");
    run_subcommand("fpe", ok, opt2);
    const std::string csv = read_text_file((fs::path(opt2.out_dir) / "fpe.csv").string());
    std::istringstream lines(csv);
    std::string header, first;
    std::getline(lines, header);
    std::getline(lines, first);
    CHECK(header.rfind("freq_ghz,abs_a", 0) == 0);
    // absent observable columns stay empty
    CHECK(first.find(",,") != std::string::npos);
}

TEST_CASE("meanfield subcommand") {
    const RunConfig cfg = parse_config(
        "model = meanfield\nf_c_ghz = 10.567\ndelta_ghz = 2.383\ng_ghz = 0.33362\n"
        "kappa_mhz = 0.63215\ngamma_mhz = 0.1054\ndrive_scale = 8.3333333\n"
        "sweep_start_ghz = 10.594\nsweep_stop_ghz = 10.604\nsweep_points = 21\n");
    RunOptions opt;
    opt.out_dir = tmp_dir("meanfield");
    const auto manifest = run_subcommand("meanfield", cfg, opt);
    CHECK(manifest["summary"]["multistable_points"].get<int>() > 0);
    CHECK(fs::exists(fs::path(opt.out_dir) / "branches.csv"));
}

TEST_CASE("unknown subcommand and figure tag are config errors") {
    const RunConfig cfg = parse_config(kTinyConfig);
    RunOptions opt;
    opt.out_dir = tmp_dir("unknown");
    CHECK_THROWS_AS(run_subcommand("warp", cfg, opt), ConfigError);
    CHECK_THROWS_AS(reproduce("fig9", opt), ConfigError);
}

TEST_CASE("csv numbers carry 17 significant digits") {
    const double v = M_PI * 1e-3;
    const std::string s = fmt_g17(v);
    CHECK(std::stod(s) == v);
    CHECK(fmt_g17(1.0) == "1");
    CsvTable t;
    t.header = {"a", "b"};
    t.add_row({fmt_g17(v), ""});
    const std::string out = t.to_string();
    CHECK(out == "a,b\n" + s + ",\n");
}
