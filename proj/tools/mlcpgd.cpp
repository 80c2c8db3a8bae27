#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mlcpgd/diagnostics.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Exact cluster dynamics for constrained multi-lane traffic flow"};
    app.require_subcommand(1);

    std::string scenario;
    std::string out_dir;
    int bumps = 16;
    double tol = 1e-6;
    std::uint64_t seed_value = 0;
    std::vector<int> ks = {10, 20, 40, 80, 160, 320, 640};

    CLI::App* sim = app.add_subcommand(
        "simulate", "Run a scenario; write event log, snapshots, field grid, and bounds");
    sim->add_option("scenario", scenario, "Scenario JSON file")->required();
    sim->add_option("--out", out_dir, "Output directory")->required();

    CLI::App* ver = app.add_subcommand(
        "verify", "Run a scenario and check conservation residuals against test bumps");
    ver->add_option("scenario", scenario, "Scenario JSON file")->required();
    ver->add_option("--out", out_dir, "Output directory")->required();
    ver->add_option("--bumps", bumps, "Number of test bumps (default 16)");
    ver->add_option("--tol", tol, "Residual tolerance (default 1e-6)");
    CLI::Option* seed_opt =
        ver->add_option("--seed", seed_value,
                        "Bump family seed; MLCPGD_SEED in the environment overrides, and "
                        "without either the seed is hashed from the scenario text");

    CLI::App* approx = app.add_subcommand(
        "approximate",
        "Approximate general data by blocks at several refinements and fit the rate");
    approx->add_option("scenario", scenario, "Scenario JSON file")->required();
    approx->add_option("--out", out_dir, "Output directory")->required();
    approx->add_option("--k", ks, "Comma-separated refinement counts")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (sim->parsed()) return mlcpgd::cli_simulate(scenario, out_dir);
    if (ver->parsed()) {
        std::optional<std::uint64_t> seed_flag;
        if (seed_opt->count() > 0) seed_flag = seed_value;
        return mlcpgd::cli_verify(scenario, out_dir, bumps, tol, seed_flag);
    }
    return mlcpgd::cli_approximate(scenario, out_dir, ks);
}
