// SPDX-License-Identifier: Apache-2.0
#pragma once

// End-to-end batch pipeline: load an instance document, sample (and
// optionally reduce) scenarios, build the two-stage model, solve it with the
// embedded branch-and-bound or a registered plugin, audit the answer, and
// write the report files into the output directory:
//   solution.json     solver status plus the first-stage schedules
//   cost_report.json  per-scenario cost breakdown and expected total
//   dispatch.csv      one row per nonzero quantity: scenario,hour,subperiod,...
//   manifest.json     seed, config hash, solver status, gap, wall time
//   scenarios.json    the sampled (post-reduction) scenario set
// plus three plot series (cost by hour, grid transfer vs schedule, per-unit
// dispatch) when emit_plot_data is set.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "mgsched/domain.hpp"
#include "mgsched/evaluation.hpp"
#include "mgsched/formulation.hpp"
#include "mgsched/io.hpp"
#include "mgsched/log.hpp"
#include "mgsched/scenario.hpp"
#include "mgsched/solver.hpp"

namespace mgsched {

// Process exit codes; the CLI forwards these verbatim.
inline constexpr int kExitOk = 0;          // solved to the requested gap
inline constexpr int kExitInputError = 1;  // unreadable, malformed, or invalid input
inline constexpr int kExitInfeasible = 2;
inline constexpr int kExitLimit = 3;  // node or time budget hit first
inline constexpr int kExitInternal = 4;

struct RunConfig {
    std::string input_path;
    std::string out_dir = "out";
    ScenarioConfig scenario;
    int reduce_to = 0;  // 0 keeps the full set
    SolverConfig solver;
    std::string plugin;  // empty runs the embedded solver in-process
    bool emit_plot_data = false;
};

struct RunResult {
    int exit_code = kExitInternal;
    MilpSolution solution;
    CostReport report;  // meaningful only when an incumbent exists
    double wall_seconds = 0.0;
    std::string config_hash;
    std::string error;  // set when exit_code is kExitInputError/kExitInternal
};

namespace run_detail {

inline const char* status_text(MilpStatus s) {
    switch (s) {
        case MilpStatus::Optimal: return "optimal";
        case MilpStatus::Infeasible: return "infeasible";
        case MilpStatus::GapLimit: return "gap_limit";
        case MilpStatus::NodeLimit: return "node_limit";
        default: return "time_limit";
    }
}

// %.12g keeps report files byte-stable across runs without dumping noise
// digits; values land well inside the 1e-6 audit tolerance.
inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline nlohmann::json json_number(double v) {
    if (std::isfinite(v)) return nlohmann::json(v);
    return nlohmann::json(v > 0 ? "inf" : "-inf");
}

inline std::string config_digest(const MicrogridSpec& spec, const DmoSchedule& dmo,
                                 const RunConfig& cfg) {
    std::string blob = instance_to_json(spec, dmo).dump();
    blob += "|n=" + std::to_string(cfg.scenario.n_scenarios);
    blob += "|br=" + fmt(cfg.scenario.renewable_band);
    blob += "|bl=" + fmt(cfg.scenario.load_band);
    blob += "|ip=" + fmt(cfg.scenario.islanding_prob_per_hour);
    blob += "|ih=" + std::to_string(cfg.scenario.max_island_hours);
    blob += "|seed=" + std::to_string(cfg.scenario.seed);
    blob += "|reduce=" + std::to_string(cfg.reduce_to);
    blob += "|gap=" + fmt(cfg.solver.gap_tol);
    blob += "|nodes=" + std::to_string(cfg.solver.node_limit);
    blob += "|time=" + fmt(cfg.solver.time_limit);
    blob += "|plugin=" + cfg.plugin;
    return hex64(fnv1a64(blob));
}

inline std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream os(p);
    if (!os) throw std::runtime_error("cannot open " + p.string() + " for writing");
    return os;
}

inline void write_solution_json(const std::filesystem::path& path, const MicrogridSpec& spec,
                                const MilpSolution& sol, const ScheduleSolution* sched) {
    nlohmann::json doc;
    doc["status"] = status_text(sol.status);
    doc["nodes"] = sol.nodes;
    if (sol.has_incumbent()) {
        doc["objective"] = sol.objective;
        doc["bound"] = json_number(sol.bound);
        doc["gap"] = json_number(sol.gap);
    } else {
        doc["objective"] = nullptr;
        doc["bound"] = nullptr;
        doc["gap"] = nullptr;
    }
    if (sched != nullptr) {
        nlohmann::json fs;
        for (std::size_t i = 0; i < spec.dispatchable_units.size(); ++i)
            fs["commit"][spec.dispatchable_units[i].id] = sched->commit[i];
        for (std::size_t b = 0; b < spec.storage_units.size(); ++b) {
            fs["discharge_mode"][spec.storage_units[b].id] = sched->discharge_mode[b];
            fs["charge_mode"][spec.storage_units[b].id] = sched->charge_mode[b];
        }
        for (std::size_t d = 0; d < spec.adjustable_loads.size(); ++d)
            fs["load_on"][spec.adjustable_loads[d].id] = sched->load_on[d];
        doc["first_stage"] = std::move(fs);
        doc["max_integrality_error"] = sched->max_integrality_error;
    }
    open_out(path) << doc.dump(2) << "\n";
}

inline void write_cost_report_json(const std::filesystem::path& path, const ScenarioSet& set,
                                   const CostReport* report) {
    nlohmann::json doc;
    doc["per_scenario"] = nlohmann::json::array();
    if (report == nullptr) {
        doc["expected_total"] = nullptr;
        doc["violations"] = nlohmann::json::array();
    } else {
        doc["expected_total"] = report->expected_total;
        for (std::size_t s = 0; s < report->per_scenario.size(); ++s) {
            const ScenarioCost& c = report->per_scenario[s];
            nlohmann::json js;
            js["scenario"] = set.scenarios[s].id;
            js["probability"] = set.scenarios[s].probability;
            js["generation"] = c.generation;
            js["no_load"] = c.no_load;
            js["startup"] = c.startup;
            js["shutdown"] = c.shutdown;
            js["curtailment"] = c.curtailment;
            js["penalty"] = c.penalty;
            js["total"] = c.total();
            doc["per_scenario"].push_back(std::move(js));
        }
        doc["violations"] = nlohmann::json::array();
        for (const Violation& v : report->violations)
            doc["violations"].push_back(
                {{"asset_id", v.asset_id}, {"field", v.field}, {"message", v.message}});
    }
    open_out(path) << doc.dump(2) << "\n";
}

inline void write_dispatch_csv(const std::filesystem::path& path, const MicrogridSpec& spec,
                               const ScenarioSet& set, const ScheduleSolution* sched) {
    std::ofstream os = open_out(path);
    os << "scenario,hour,subperiod,entity,quantity,value\n";
    if (sched == nullptr) return;
    const int T = sched->n_hours, K = sched->n_subperiods, S = sched->n_scenarios;
    auto row = [&](int s, int t, int tau, const std::string& entity, const char* quantity,
                   double value) {
        if (value == 0.0) return;
        os << set.scenarios[static_cast<std::size_t>(s)].id << "," << t << "," << tau << ","
           << entity << "," << quantity << "," << fmt(value) << "\n";
    };
    for (int s = 0; s < S; ++s)
        for (int t = 0; t < T; ++t)
            for (int tau = 0; tau < K; ++tau) {
                const std::size_t p = static_cast<std::size_t>(t * K + tau);
                const std::size_t us = static_cast<std::size_t>(s);
                for (std::size_t i = 0; i < spec.dispatchable_units.size(); ++i)
                    row(s, t, tau, spec.dispatchable_units[i].id, "gen_power",
                        sched->gen_power[us][i][p]);
                for (std::size_t b = 0; b < spec.storage_units.size(); ++b) {
                    const std::string& id = spec.storage_units[b].id;
                    row(s, t, tau, id, "storage_power", sched->storage_power[us][b][p]);
                    if (!sched->storage_dch[us][b].empty()) {
                        row(s, t, tau, id, "storage_discharge", sched->storage_dch[us][b][p]);
                        row(s, t, tau, id, "storage_charge", sched->storage_ch[us][b][p]);
                    }
                    row(s, t, tau, id, "storage_energy", sched->storage_energy[us][b][p]);
                }
                for (std::size_t d = 0; d < spec.adjustable_loads.size(); ++d)
                    row(s, t, tau, spec.adjustable_loads[d].id, "load_power",
                        sched->load_power[us][d][p]);
                row(s, t, tau, "grid", "grid_power", sched->grid_power[us][p]);
                row(s, t, tau, "grid", "deviation", sched->deviation[us][p]);
                row(s, t, tau, "grid", "deviation_positive", sched->deviation_positive[us][p]);
                row(s, t, tau, "system", "curtailment", sched->curtailment[us][p]);
            }
}

inline void write_manifest_json(const std::filesystem::path& path, const RunConfig& cfg,
                                const std::string& config_hash, const MilpSolution& sol,
                                double wall_seconds) {
    nlohmann::json doc;
    doc["seed"] = cfg.scenario.seed;
    doc["config_hash"] = config_hash;
    doc["solver_status"] = status_text(sol.status);
    doc["gap"] = json_number(sol.gap);
    doc["objective"] = sol.has_incumbent() ? nlohmann::json(sol.objective) : nullptr;
    doc["nodes"] = sol.nodes;
    doc["wall_time_seconds"] = wall_seconds;
    open_out(path) << doc.dump(2) << "\n";
}

// Expected cost attributed to each hour: commitment and event costs land on
// their hour, energy-priced terms are summed over the hour's sub-periods.
inline void write_cost_by_hour_csv(const std::filesystem::path& path, const MicrogridSpec& spec,
                                   const DmoSchedule& dmo, const ScenarioSet& set,
                                   const ScheduleSolution& sched) {
    const TimeGrid& g = spec.time_grid;
    const double dt = g.delta_tau();
    std::ofstream os = open_out(path);
    os << "hour,expected_cost\n";
    for (int t = 0; t < g.n_hours; ++t) {
        double cost = 0.0;
        for (std::size_t i = 0; i < spec.dispatchable_units.size(); ++i) {
            const DispatchableUnit& u = spec.dispatchable_units[i];
            const int on = sched.commit[i][static_cast<std::size_t>(t)];
            const int prev = t > 0 ? sched.commit[i][static_cast<std::size_t>(t - 1)]
                                   : (u.init_committed ? 1 : 0);
            if (on == 1) cost += u.no_load_cost;
            if (on == 1 && prev == 0) cost += u.startup_cost;
            if (on == 0 && prev == 1) cost += u.shutdown_cost;
        }
        for (std::size_t s = 0; s < set.scenarios.size(); ++s) {
            const double pr = set.scenarios[s].probability;
            for (int tau = 0; tau < g.subperiods_per_hour; ++tau) {
                const std::size_t p = static_cast<std::size_t>(g.point(t, tau));
                for (std::size_t i = 0; i < spec.dispatchable_units.size(); ++i)
                    cost += pr * dt *
                            unit_energy_rate(spec.dispatchable_units[i], sched.gen_power[s][i][p]);
                if (std::isfinite(spec.voll))
                    cost += pr * dt * spec.voll * std::max(0.0, sched.curtailment[s][p]);
                cost += pr * dt * dmo.penalty * std::max(0.0, sched.deviation_positive[s][p]);
            }
        }
        os << t << "," << fmt(cost) << "\n";
    }
}

inline void write_grid_transfer_csv(const std::filesystem::path& path, const DmoSchedule& dmo,
                                    const ScenarioSet& set, const ScheduleSolution& sched) {
    std::ofstream os = open_out(path);
    os << "scenario,hour,subperiod,grid_power,scheduled\n";
    for (int s = 0; s < sched.n_scenarios; ++s)
        for (int t = 0; t < sched.n_hours; ++t)
            for (int tau = 0; tau < sched.n_subperiods; ++tau) {
                const std::size_t p = static_cast<std::size_t>(t * sched.n_subperiods + tau);
                os << set.scenarios[static_cast<std::size_t>(s)].id << "," << t << "," << tau
                   << "," << fmt(sched.grid_power[static_cast<std::size_t>(s)][p]) << ","
                   << fmt(dmo.p_sched[static_cast<std::size_t>(t)]) << "\n";
            }
}

inline void write_unit_dispatch_csv(const std::filesystem::path& path, const MicrogridSpec& spec,
                                    const ScenarioSet& set, const ScheduleSolution& sched) {
    std::ofstream os = open_out(path);
    os << "scenario,hour,subperiod,unit,power\n";
    for (int s = 0; s < sched.n_scenarios; ++s)
        for (int t = 0; t < sched.n_hours; ++t)
            for (int tau = 0; tau < sched.n_subperiods; ++tau) {
                const std::size_t p = static_cast<std::size_t>(t * sched.n_subperiods + tau);
                const std::size_t us = static_cast<std::size_t>(s);
                for (std::size_t i = 0; i < spec.dispatchable_units.size(); ++i)
                    os << set.scenarios[us].id << "," << t << "," << tau << ","
                       << spec.dispatchable_units[i].id << "," << fmt(sched.gen_power[us][i][p])
                       << "\n";
                for (std::size_t b = 0; b < spec.storage_units.size(); ++b)
                    os << set.scenarios[us].id << "," << t << "," << tau << ","
                       << spec.storage_units[b].id << "," << fmt(sched.storage_power[us][b][p])
                       << "\n";
            }
}

}  // namespace run_detail

// Registers the stock subprocess plugins. `exe_dir` is where the adapter
// binaries were installed (the build tree in tests, the CLI's own directory
// otherwise); MGSCHED_ADAPTER_DIR overrides it.
inline void register_builtin_plugins(std::string exe_dir) {
    if (const char* env = std::getenv("MGSCHED_ADAPTER_DIR")) exe_dir = env;
    register_plugin("embedded-subprocess",
                    make_subprocess_plugin(exe_dir + "/lp_solve_adapter"));
    register_plugin("highs", make_subprocess_plugin("python3 " + exe_dir + "/highs_adapter.py"));
}

inline RunResult run(const RunConfig& cfg) {
    using namespace run_detail;
    namespace fs = std::filesystem;
    const auto t0 = std::chrono::steady_clock::now();
    auto elapsed = [&t0] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };

    RunResult result;
    Instance inst;
    try {
        inst = load_instance(cfg.input_path);
    } catch (const ParseError& e) {
        result.exit_code = kExitInputError;
        result.error = e.what();
        log_error(result.error);
        return result;
    }

    ValidationReport vr = validate_spec(inst.spec, inst.dmo);
    if (!vr.ok()) {
        result.exit_code = kExitInputError;
        result.error = vr.to_string();
        log_error(result.error);
        return result;
    }

    if (cfg.reduce_to < 0 || cfg.reduce_to > cfg.scenario.n_scenarios) {
        result.exit_code = kExitInputError;
        result.error = "reduce_to must lie in [1, n_scenarios]";
        log_error(result.error);
        return result;
    }

    try {
        result.config_hash = config_digest(inst.spec, inst.dmo, cfg);

        ScenarioSet set = generate_scenarios(inst.spec, cfg.scenario);
        if (cfg.reduce_to > 0 && cfg.reduce_to < cfg.scenario.n_scenarios) {
            // Islanding distance is scaled by the interconnection limit so a
            // severed hour counts like a full-limit transfer swing.
            set = reduce_scenarios(set, cfg.reduce_to, inst.dmo.p_m_max);
            log_info("reduced scenario set to " + std::to_string(cfg.reduce_to));
        }

        BuiltModel built = build_model(inst.spec, inst.dmo, set);
        const ModelStats stats = model_stats(built.model);
        log_info("model: " + std::to_string(stats.n_vars) + " columns (" +
                 std::to_string(stats.n_binaries) + " binary), " +
                 std::to_string(stats.n_constraints) + " rows");

        MilpSolution sol = cfg.plugin.empty() ? solve_milp(built.model, cfg.solver)
                                              : solve_via_plugin(built.model, cfg.plugin,
                                                                 cfg.solver);
        log_info(std::string("solver status: ") + status_text(sol.status));

        std::optional<ScheduleSolution> sched;
        if (sol.has_incumbent()) {
            sched = extract_solution(built.index, sol.x);
            result.report = evaluate(inst.spec, inst.dmo, set, *sched);
            if (!result.report.feasible())
                for (const Violation& v : result.report.violations)
                    log_warn("audit: " + v.asset_id + "/" + v.field + ": " + v.message);
        }

        fs::create_directories(cfg.out_dir);
        const fs::path out(cfg.out_dir);
        write_solution_json(out / "solution.json", inst.spec, sol,
                            sched ? &*sched : nullptr);
        write_cost_report_json(out / "cost_report.json", set,
                               sol.has_incumbent() ? &result.report : nullptr);
        write_dispatch_csv(out / "dispatch.csv", inst.spec, set, sched ? &*sched : nullptr);
        {
            std::ofstream os = open_out(out / "scenarios.json");
            os << scenario_set_to_json(set).dump(2) << "\n";
        }
        if (cfg.emit_plot_data && sched) {
            write_cost_by_hour_csv(out / "plot_cost_by_hour.csv", inst.spec, inst.dmo, set,
                                   *sched);
            write_grid_transfer_csv(out / "plot_grid_transfer.csv", inst.dmo, set, *sched);
            write_unit_dispatch_csv(out / "plot_unit_dispatch.csv", inst.spec, set, *sched);
        }
        result.wall_seconds = elapsed();
        write_manifest_json(out / "manifest.json", cfg, result.config_hash, sol,
                            result.wall_seconds);

        result.solution = std::move(sol);
        switch (result.solution.status) {
            case MilpStatus::Optimal:
            case MilpStatus::GapLimit: result.exit_code = kExitOk; break;
            case MilpStatus::Infeasible: result.exit_code = kExitInfeasible; break;
            default: result.exit_code = kExitLimit; break;
        }
        return result;
    } catch (const std::invalid_argument& e) {
        result.exit_code = kExitInputError;
        result.error = e.what();
    } catch (const UnknownPluginError& e) {
        result.exit_code = kExitInputError;
        result.error = e.what();
    } catch (const std::exception& e) {
        result.exit_code = kExitInternal;
        result.error = e.what();
    }
    log_error(result.error);
    return result;
}

}  // namespace mgsched
