// SPDX-License-Identifier: Apache-2.0

// Command-line front end for the day-ahead scheduling pipeline.
//
//   mgsched --input instance.json --scenarios 10 --seed 7 --out results/
//
// Exit codes: 0 solved to the requested gap, 1 input error, 2 infeasible,
// 3 node/time budget hit, 4 internal failure.

#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "mgsched/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Day-ahead microgrid scheduler tracking an hourly market transfer schedule"};

    mgsched::RunConfig cfg;
    int reduce_to = 0;

    app.add_option("--input", cfg.input_path, "Instance document (JSON)")
        ->required();
    app.add_option("--scenarios", cfg.scenario.n_scenarios, "Number of scenarios to sample")
        ->capture_default_str();
    app.add_option("--band-renewable", cfg.scenario.renewable_band,
                   "Relative half-width of the renewable forecast band")
        ->capture_default_str();
    app.add_option("--band-load", cfg.scenario.load_band,
                   "Relative half-width of the fixed-load forecast band")
        ->capture_default_str();
    app.add_option("--islanding-prob", cfg.scenario.islanding_prob_per_hour,
                   "Per-hour probability that an islanding window starts")
        ->capture_default_str();
    app.add_option("--max-island-hours", cfg.scenario.max_island_hours,
                   "Longest islanding window, in hours")
        ->capture_default_str();
    app.add_option("--reduce-to", reduce_to,
                   "Reduce the sampled set to this many scenarios (0 keeps all)")
        ->capture_default_str();
    app.add_option("--seed", cfg.scenario.seed, "Scenario sampling seed")
        ->capture_default_str();
    app.add_option("--gap", cfg.solver.gap_tol, "Relative optimality gap tolerance")
        ->capture_default_str();
    app.add_option("--time-limit", cfg.solver.time_limit, "Solver wall budget in seconds (0 = none)")
        ->capture_default_str();
    app.add_option("--node-limit", cfg.solver.node_limit, "Search node budget (0 = none)")
        ->capture_default_str();
    app.add_option("--plugin", cfg.plugin,
                   "Solve through a registered plugin (embedded-subprocess, highs)");
    app.add_option("--out", cfg.out_dir, "Output directory")->capture_default_str();
    app.add_flag("--emit-plot-data", cfg.emit_plot_data, "Also write the plot-series CSV files");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : mgsched::kExitInputError;
    }
    cfg.reduce_to = reduce_to;

    std::error_code ec;
    std::filesystem::path exe = std::filesystem::weakly_canonical(argv[0], ec);
    mgsched::register_builtin_plugins(ec ? "." : exe.parent_path().string());

    mgsched::RunResult result = mgsched::run(cfg);
    if (!result.error.empty()) std::cerr << result.error << "\n";
    if (result.solution.has_incumbent() && result.exit_code != mgsched::kExitInternal)
        std::cout << "objective " << result.solution.objective << " (gap "
                  << result.solution.gap << ", " << result.solution.nodes << " nodes, "
                  << result.wall_seconds << " s)\n";
    return result.exit_code;
}
