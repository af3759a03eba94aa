#include "tubeflow/error.hpp"
#include "tubeflow/harness.hpp"

#include "CLI11.hpp"

#include <fmt/format.h>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace tubeflow;

namespace {

int report_config_error(const ConfigError& e)
{
    std::cerr << "config error";
    if (e.line() > 0) std::cerr << " (line " << e.line() << ")";
    if (!e.key().empty()) std::cerr << " [" << e.key() << "]";
    std::cerr << ": " << e.what() << '\n';
    return 1;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Volume-preserving mean curvature flow of radial tubes"};
    app.require_subcommand(1);

    std::string cfg_path;
    std::string out_dir;
    std::string grid_spec;
    double hstar = 0.0;

    auto* run_cmd = app.add_subcommand("run", "run one flow, write timeseries.csv and summary.json");
    run_cmd->add_option("config", cfg_path, "config file")->required()->check(CLI::ExistingFile);
    run_cmd->add_option("--out", out_dir, "output directory (overrides output.dir)");

    auto* sweep_cmd = app.add_subcommand("sweep", "run a parameter grid, one directory per cell");
    sweep_cmd->add_option("config", cfg_path, "config file")->required()->check(CLI::ExistingFile);
    sweep_cmd->add_option("--grid", grid_spec, "axes such as \"r0=0.3,0.5;amplitude=0.01,0.05\"")->required();
    sweep_cmd->add_option("--out", out_dir, "output directory (overrides output.dir)");

    auto* bounds_cmd = app.add_subcommand("bounds", "print the a priori bounds as JSON");
    bounds_cmd->add_option("config", cfg_path, "config file")->required()->check(CLI::ExistingFile);

    auto* cmc_cmd = app.add_subcommand("cmc-search", "shoot for a constant mean curvature profile");
    cmc_cmd->add_option("config", cfg_path, "config file")->required()->check(CLI::ExistingFile);
    cmc_cmd->add_option("--hstar", hstar, "target mean curvature")->required();

    auto* refine_cmd = app.add_subcommand("refine", "residual audits under grid refinement");
    refine_cmd->add_option("config", cfg_path, "config file")->required()->check(CLI::ExistingFile);
    refine_cmd->add_option("--out", out_dir, "also write refine.csv into this directory");

    app.add_subcommand("catalog", "print the space catalog as CSV");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("catalog")) {
            std::cout << cmd_catalog();
            return 0;
        }
        const RunConfig cfg = load_config(cfg_path);

        if (run_cmd->parsed()) {
            const fs::path dir = out_dir.empty() ? fs::path(cfg.out_dir) : fs::path(out_dir);
            const auto art = cmd_run(cfg, dir);
            std::cout << fmt::format("{} t={} steps={} exit={} -> {}\n", art.summary["outcome"].get<std::string>(),
                                     art.result.final_state.t, art.result.steps, art.exit_code, dir.string());
            return art.exit_code;
        }
        if (sweep_cmd->parsed()) {
            const auto grid = parse_grid(grid_spec);
            const fs::path dir = out_dir.empty() ? fs::path(cfg.out_dir) : fs::path(out_dir);
            const auto res = cmd_sweep(cfg, grid, dir);
            for (const auto& c : res.cells)
                std::cout << fmt::format("{} {} exit={}{}\n", c.name, c.outcome, c.exit_code,
                                         c.outcome == "error" ? " (" + c.message + ")" : std::string{});
            return res.exit_code;
        }
        if (bounds_cmd->parsed()) {
            std::cout << cmd_bounds(cfg).dump(2) << '\n';
            return 0;
        }
        if (cmc_cmd->parsed()) {
            std::cout << cmd_cmc_search(cfg, hstar).dump(2) << '\n';
            return 0;
        }
        if (refine_cmd->parsed()) {
            const auto res = cmd_refine(cfg);
            std::cout << res.table;
            if (!out_dir.empty()) {
                fs::create_directories(out_dir);
                std::ofstream(fs::path(out_dir) / "refine.csv", std::ios::binary) << res.table;
            }
            return 0;
        }
    } catch (const ConfigError& e) {
        return report_config_error(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
