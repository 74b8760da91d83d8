#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "bistab/io.hpp"
#include "bistab/run.hpp"
#include "bistab/version.hpp"

// bistab <subcommand> --config <path> [--out <dir>] [--seed <n>] [--workers <n>]
// Exit codes: 0 success, 2 config error, 3 numerical failure.

namespace {

struct Cli {
    std::string config_path;
    std::string out_dir = ".";
    std::int64_t seed = -1;
    int workers = 0;
    std::string figure_tag;
};

int dispatch(const std::string& sub, const Cli& cli) {
    bistab::RunOptions opt;
    opt.out_dir = cli.out_dir;
    if (cli.seed >= 0) opt.seed = static_cast<std::uint64_t>(cli.seed);
    if (cli.workers > 0) opt.workers = cli.workers;

    if (sub == "reproduce") {
        const auto manifest = bistab::reproduce(cli.figure_tag, opt);
        std::cout << manifest["checks"].dump(2) << "\n"
                  << (manifest["all_pass"].get<bool>() ? "all checks passed" : "some checks FAILED")
                  << "\n";
        return 0;
    }

    const std::string text = bistab::read_text_file(cli.config_path);
    const bistab::RunConfig cfg = bistab::parse_config(text);
    const auto manifest = bistab::run_subcommand(sub, cfg, opt);
    std::cout << "wrote " << manifest["outputs"].dump() << " to " << cli.out_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"driven dispersive cavity-transmon bistability simulator"};
    app.set_version_flag("--version", bistab::kVersion);
    app.require_subcommand(1);

    Cli cli;
    const std::vector<std::string> subs = {"meanfield", "steady", "sweep",
                                           "traj", "qfunc", "fpe"};
    for (const auto& name : subs) {
        auto* sc = app.add_subcommand(name);
        sc->add_option("--config", cli.config_path, "config file (key = value)")->required();
        sc->add_option("--out", cli.out_dir, "output directory");
        sc->add_option("--seed", cli.seed, "override trajectory seed");
        sc->add_option("--workers", cli.workers, "parallel worker count");
    }
    auto* rep = app.add_subcommand("reproduce", "run a published-figure recipe");
    rep->add_option("tag", cli.figure_tag, "fig1|fig2|fig3b|si2|si4|si5|si6")->required();
    rep->add_option("--out", cli.out_dir, "output directory");
    rep->add_option("--seed", cli.seed, "override trajectory seed");
    rep->add_option("--workers", cli.workers, "parallel worker count");

    CLI11_PARSE(app, argc, argv);

    const std::string sub = app.get_subcommands().front()->get_name();
    try {
        return dispatch(sub, cli);
    } catch (const bistab::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
