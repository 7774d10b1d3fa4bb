// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mgsched/io.hpp"
#include "mgsched/runner.hpp"

using namespace mgsched;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
    static const fs::path dir = [] {
        fs::path p = fs::temp_directory_path() / "mgsched_runner_tests";
        fs::remove_all(p);
        fs::create_directories(p);
        return p;
    }();
    return dir;
}

// A small mixed-asset system: one thermal unit, one battery, wind, a fixed
// load, and one shiftable load over 3 hours at half-hour resolution.
Instance pilot_instance() {
    Instance inst;
    inst.spec.time_grid = {3, 2};

    DispatchableUnit g;
    g.id = "g0";
    g.p_min = 10;
    g.p_max = 100;
    g.ramp_up = 100;
    g.ramp_down = 100;
    g.min_up = 1;
    g.min_down = 1;
    g.cost_segments = {{60, 0.08}, {100, 0.15}};
    g.no_load_cost = 4;
    g.startup_cost = 25;
    g.shutdown_cost = 10;
    g.init_committed = true;
    g.init_on_hours = 2;
    g.init_power = 50;
    inst.spec.dispatchable_units.push_back(g);

    StorageUnit b;
    b.id = "b0";
    b.p_ch_max = 20;
    b.p_dch_max = 20;
    b.c_max = 40;
    b.c_init = 20;
    inst.spec.storage_units.push_back(b);

    inst.spec.nondispatchable_units.push_back({"w0", {15, 15, 12, 12, 10, 10}});
    inst.spec.fixed_loads.push_back({"l0", {70, 70, 80, 80, 65, 65}});

    AdjustableLoad d;
    d.id = "d0";
    d.d_max = 10;
    d.energy_required = 5;
    d.window_start = 0;
    d.window_end = 2;
    d.min_operating_time = 1;
    inst.spec.adjustable_loads.push_back(d);

    inst.spec.voll = 50;
    inst.dmo.p_sched = {10, -5, 0};
    inst.dmo.p_m_max = 60;
    inst.dmo.penalty = 1.2;
    return inst;
}

std::string write_pilot(const std::string& name) {
    const Instance inst = pilot_instance();
    const fs::path path = scratch_dir() / name;
    save_instance(inst.spec, inst.dmo, path.string());
    return path.string();
}

RunConfig pilot_config(const std::string& input, const std::string& out_name) {
    RunConfig cfg;
    cfg.input_path = input;
    cfg.out_dir = (scratch_dir() / out_name).string();
    cfg.scenario.n_scenarios = 2;
    cfg.scenario.renewable_band = 0.2;
    cfg.scenario.load_band = 0.1;
    cfg.scenario.islanding_prob_per_hour = 0.3;
    cfg.scenario.seed = 42;
    return cfg;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

struct CsvRow {
    std::string scenario;
    int hour = 0, subperiod = 0;
    std::string entity, quantity;
    double value = 0.0;
};

std::vector<CsvRow> read_dispatch(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in);
    std::string line;
    REQUIRE(std::getline(in, line));
    REQUIRE(line == "scenario,hour,subperiod,entity,quantity,value");
    std::vector<CsvRow> rows;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        CsvRow r;
        std::string field;
        std::getline(ls, r.scenario, ',');
        std::getline(ls, field, ',');
        r.hour = std::stoi(field);
        std::getline(ls, field, ',');
        r.subperiod = std::stoi(field);
        std::getline(ls, r.entity, ',');
        std::getline(ls, r.quantity, ',');
        std::getline(ls, field, ',');
        r.value = std::stod(field);
        rows.push_back(r);
    }
    return rows;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(MGSCHED_BUILD_DIR) + "/mgsched " + args + " 2>/dev/null";
    int rc = std::system(cmd.c_str());
    REQUIRE(rc != -1);
    return WEXITSTATUS(rc);
}

}  // namespace

TEST_CASE("a solvable run writes the full report set and exits 0") {
    const std::string input = write_pilot("pilot.json");
    RunConfig cfg = pilot_config(input, "out_happy");
    cfg.emit_plot_data = true;

    const RunResult result = run(cfg);
    REQUIRE(result.error.empty());
    REQUIRE(result.exit_code == kExitOk);
    CHECK(result.solution.status == MilpStatus::Optimal);
    CHECK(result.report.feasible());
    CHECK(result.wall_seconds > 0.0);

    const fs::path out(cfg.out_dir);
    for (const char* name : {"solution.json", "cost_report.json", "dispatch.csv",
                             "manifest.json", "scenarios.json", "plot_cost_by_hour.csv",
                             "plot_grid_transfer.csv", "plot_unit_dispatch.csv"})
        CHECK(fs::exists(out / name));

    const nlohmann::json manifest = read_json(out / "manifest.json");
    CHECK(manifest["seed"].get<std::uint64_t>() == 42);
    CHECK(manifest["config_hash"].get<std::string>().size() == 16);
    CHECK(manifest["solver_status"] == "optimal");
    CHECK(manifest["gap"].get<double>() <= 1e-6);
    CHECK(manifest["wall_time_seconds"].get<double>() > 0.0);
    CHECK(manifest["nodes"].get<std::int64_t>() == result.solution.nodes);

    const nlohmann::json solution = read_json(out / "solution.json");
    CHECK(solution["status"] == "optimal");
    CHECK(solution["objective"].get<double>() ==
          Catch::Approx(result.solution.objective).epsilon(1e-12));
    CHECK(solution["first_stage"]["commit"].contains("g0"));
    CHECK(solution["first_stage"]["commit"]["g0"].size() == 3);

    const nlohmann::json report = read_json(out / "cost_report.json");
    CHECK(report["expected_total"].get<double>() ==
          Catch::Approx(result.solution.objective).epsilon(1e-9));
    CHECK(report["per_scenario"].size() == 2);
    CHECK(report["violations"].empty());
}

TEST_CASE("plot files are withheld unless requested") {
    const std::string input = write_pilot("pilot_noplot.json");
    const RunConfig cfg = pilot_config(input, "out_noplot");
    REQUIRE(run(cfg).exit_code == kExitOk);
    CHECK(fs::exists(fs::path(cfg.out_dir) / "dispatch.csv"));
    CHECK_FALSE(fs::exists(fs::path(cfg.out_dir) / "plot_cost_by_hour.csv"));
    CHECK_FALSE(fs::exists(fs::path(cfg.out_dir) / "plot_grid_transfer.csv"));
    CHECK_FALSE(fs::exists(fs::path(cfg.out_dir) / "plot_unit_dispatch.csv"));
}

TEST_CASE("identical configs reproduce identical outputs") {
    const std::string input = write_pilot("pilot_det.json");
    RunConfig a = pilot_config(input, "out_det_a");
    RunConfig b = pilot_config(input, "out_det_b");

    const RunResult ra = run(a);
    const RunResult rb = run(b);
    REQUIRE(ra.exit_code == kExitOk);
    REQUIRE(rb.exit_code == kExitOk);
    CHECK(ra.solution.objective == rb.solution.objective);
    CHECK(ra.solution.nodes == rb.solution.nodes);
    CHECK(ra.config_hash == rb.config_hash);

    for (const char* name : {"solution.json", "cost_report.json", "dispatch.csv",
                             "scenarios.json"})
        CHECK(slurp(fs::path(a.out_dir) / name) == slurp(fs::path(b.out_dir) / name));

    // The manifest differs only in measured wall time.
    nlohmann::json ma = read_json(fs::path(a.out_dir) / "manifest.json");
    nlohmann::json mb = read_json(fs::path(b.out_dir) / "manifest.json");
    ma.erase("wall_time_seconds");
    mb.erase("wall_time_seconds");
    CHECK(ma == mb);
}

TEST_CASE("dispatch rows are nonzero and consistent with the cost report") {
    const std::string input = write_pilot("pilot_csv.json");
    const RunConfig cfg = pilot_config(input, "out_csv");
    const RunResult result = run(cfg);
    REQUIRE(result.exit_code == kExitOk);

    const auto rows = read_dispatch(fs::path(cfg.out_dir) / "dispatch.csv");
    REQUIRE_FALSE(rows.empty());
    bool saw_gen = false;
    for (const CsvRow& r : rows) {
        CHECK(r.value != 0.0);
        CHECK(r.hour >= 0);
        CHECK(r.hour < 3);
        CHECK(r.subperiod >= 0);
        CHECK(r.subperiod < 2);
        CHECK((r.scenario == "s0" || r.scenario == "s1"));
        if (r.quantity == "gen_power") {
            saw_gen = true;
            CHECK(r.entity == "g0");
            CHECK(r.value >= 10.0);   // committed unit respects p_min
            CHECK(r.value <= 100.0);  // and p_max
        }
    }
    CHECK(saw_gen);

    // Fuel cost recomputed from the table matches the report's generation
    // component, so the CSV is a faithful projection of the solution.
    const Instance inst = pilot_instance();
    std::vector<double> fuel(2, 0.0);
    for (const CsvRow& r : rows)
        if (r.quantity == "gen_power")
            fuel[r.scenario == "s0" ? 0 : 1] +=
                0.5 * unit_energy_rate(inst.spec.dispatchable_units[0], r.value);
    const nlohmann::json report = read_json(fs::path(cfg.out_dir) / "cost_report.json");
    for (std::size_t s = 0; s < 2; ++s)
        CHECK(report["per_scenario"][s]["generation"].get<double>() ==
              Catch::Approx(fuel[s]).margin(1e-9));
}

TEST_CASE("scenario reduction carries through the pipeline") {
    const std::string input = write_pilot("pilot_reduce.json");
    RunConfig cfg = pilot_config(input, "out_reduce");
    cfg.scenario.n_scenarios = 4;
    cfg.reduce_to = 2;
    const RunResult result = run(cfg);
    REQUIRE(result.exit_code == kExitOk);

    const nlohmann::json scenarios = read_json(fs::path(cfg.out_dir) / "scenarios.json");
    REQUIRE(scenarios["scenarios"].size() == 2);
    double total = 0.0;
    for (const auto& s : scenarios["scenarios"]) total += s["probability"].get<double>();
    CHECK(total == Catch::Approx(1.0).epsilon(1e-12));

    const nlohmann::json report = read_json(fs::path(cfg.out_dir) / "cost_report.json");
    CHECK(report["per_scenario"].size() == 2);
}

TEST_CASE("input failures exit 1 and name the offending field") {
    RunConfig cfg = pilot_config("/nonexistent/input.json", "out_missing");
    RunResult result = run(cfg);
    CHECK(result.exit_code == kExitInputError);
    CHECK(result.error.find("/nonexistent/input.json") != std::string::npos);

    // Structurally valid JSON whose numbers break a domain invariant.
    Instance bad = pilot_instance();
    bad.spec.dispatchable_units[0].p_min = 120;  // above p_max
    const fs::path path = scratch_dir() / "pilot_bad.json";
    save_instance(bad.spec, bad.dmo, path.string());
    cfg = pilot_config(path.string(), "out_bad");
    result = run(cfg);
    CHECK(result.exit_code == kExitInputError);
    CHECK(result.error.find("g0") != std::string::npos);
    CHECK(result.error.find("p_min") != std::string::npos);

    // A malformed document names the file.
    const fs::path truncated = scratch_dir() / "pilot_trunc.json";
    std::ofstream(truncated) << "{\"time_grid\": {";
    cfg = pilot_config(truncated.string(), "out_trunc");
    result = run(cfg);
    CHECK(result.exit_code == kExitInputError);
    CHECK(result.error.find("pilot_trunc.json") != std::string::npos);

    // reduce_to beyond the sampled count is a config error.
    cfg = pilot_config(write_pilot("pilot_reduce_bad.json"), "out_reduce_bad");
    cfg.reduce_to = 9;
    result = run(cfg);
    CHECK(result.exit_code == kExitInputError);

    // An unregistered plugin name is rejected before solving.
    cfg = pilot_config(write_pilot("pilot_plugin_bad.json"), "out_plugin_bad");
    cfg.plugin = "no-such-solver";
    result = run(cfg);
    CHECK(result.exit_code == kExitInputError);
    CHECK(result.error.find("no-such-solver") != std::string::npos);
}

TEST_CASE("an infeasible instance exits 2 with a status-only report") {
    // Fully islanded, demand above capacity, shedding priced out: no feasible
    // schedule exists.
    Instance inst;
    inst.spec.time_grid = {2, 1};
    DispatchableUnit g;
    g.id = "g0";
    g.p_min = 0;
    g.p_max = 50;
    g.ramp_up = 100;
    g.ramp_down = 100;
    g.cost_segments = {{50, 0.1}};
    inst.spec.dispatchable_units.push_back(g);
    inst.spec.fixed_loads.push_back({"l0", {100, 100}});
    inst.spec.voll = std::numeric_limits<double>::infinity();
    inst.dmo.p_sched = {0, 0};
    inst.dmo.p_m_max = 30;
    inst.dmo.penalty = 1.0;

    const fs::path path = scratch_dir() / "infeasible.json";
    save_instance(inst.spec, inst.dmo, path.string());
    RunConfig cfg = pilot_config(path.string(), "out_infeasible");
    cfg.scenario.n_scenarios = 1;
    cfg.scenario.renewable_band = 0.0;
    cfg.scenario.load_band = 0.0;
    cfg.scenario.islanding_prob_per_hour = 1.0;

    const RunResult result = run(cfg);
    CHECK(result.exit_code == kExitInfeasible);

    const fs::path out(cfg.out_dir);
    CHECK(read_json(out / "solution.json")["status"] == "infeasible");
    CHECK(read_json(out / "solution.json")["objective"].is_null());
    CHECK(read_json(out / "cost_report.json")["expected_total"].is_null());
    CHECK(read_dispatch(out / "dispatch.csv").empty());
    CHECK(read_json(out / "manifest.json")["solver_status"] == "infeasible");
}

TEST_CASE("hitting the node budget exits 3") {
    const std::string input = write_pilot("pilot_limit.json");
    RunConfig cfg = pilot_config(input, "out_limit");
    cfg.solver.node_limit = 1;
    const RunResult result = run(cfg);
    CHECK(result.exit_code == kExitLimit);
    CHECK(read_json(fs::path(cfg.out_dir) / "manifest.json")["solver_status"] == "node_limit");
}

TEST_CASE("registered plugins reproduce the embedded objective") {
    register_builtin_plugins(MGSCHED_BUILD_DIR);
    const std::string input = write_pilot("pilot_plugins.json");

    const RunResult embedded = run(pilot_config(input, "out_plug_embedded"));
    REQUIRE(embedded.exit_code == kExitOk);

    for (const char* name : {"embedded-subprocess", "highs"}) {
        RunConfig cfg = pilot_config(input, std::string("out_plug_") + name);
        cfg.plugin = name;
        const RunResult via = run(cfg);
        INFO("plugin " << name);
        REQUIRE(via.exit_code == kExitOk);
        CHECK(via.solution.objective ==
              Catch::Approx(embedded.solution.objective).epsilon(1e-6));
        CHECK(via.report.feasible());
        CHECK(via.report.expected_total ==
              Catch::Approx(via.solution.objective).epsilon(1e-6));
    }
}

TEST_CASE("the command-line front end forwards pipeline exit codes") {
    const std::string input = write_pilot("pilot_cli.json");
    const std::string out = (scratch_dir() / "out_cli").string();

    CHECK(run_cli("--input " + input + " --scenarios 2 --seed 42 --out " + out) == 0);
    CHECK(fs::exists(fs::path(out) / "manifest.json"));
    CHECK_FALSE(fs::exists(fs::path(out) / "plot_cost_by_hour.csv"));

    CHECK(run_cli("--input " + input + " --scenarios 2 --seed 42 --emit-plot-data --out " +
                  out) == 0);
    CHECK(fs::exists(fs::path(out) / "plot_cost_by_hour.csv"));

    CHECK(run_cli("--out " + out) == 1);                      // missing required --input
    CHECK(run_cli("--input /nonexistent.json --out " + out) == 1);
    CHECK(run_cli("--input " + input + " --frobnicate --out " + out) == 1);  // unknown flag
}
