// SPDX-License-Identifier: Apache-2.0
#pragma once

// Post-solve layer: turns a flat solution vector into named schedules,
// recomputes every cost term from the raw dispatch (never trusting the
// solver objective), and audits the full constraint set at a stated
// tolerance. Also provides an exhaustive-enumeration solver used as an
// oracle against the branch-and-bound path on small instances.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "mgsched/domain.hpp"
#include "mgsched/formulation.hpp"
#include "mgsched/milp.hpp"
#include "mgsched/scenario.hpp"
#include "mgsched/simplex.hpp"
#include "mgsched/solver.hpp"

namespace mgsched {

// Dispatch and commitment in instance terms. First-stage indicators are
// rounded to int; max_integrality_error records how far the raw values were
// from 0/1 so the audit can flag a fractional hand-back.
struct ScheduleSolution {
    int n_hours = 0, n_subperiods = 0, n_scenarios = 0;
    std::vector<std::vector<int>> commit;          // [unit][hour]
    std::vector<std::vector<int>> discharge_mode;  // [storage][hour]
    std::vector<std::vector<int>> charge_mode;     // [storage][hour]
    std::vector<std::vector<int>> load_on;         // [load][hour]
    std::vector<std::vector<int>> deviation_sign;  // [scenario][hour]

    std::vector<std::vector<std::vector<double>>> gen_power;        // [s][unit][point]
    std::vector<std::vector<std::vector<double>>> storage_power;    // [s][storage][point]
    std::vector<std::vector<std::vector<double>>> storage_energy;   // [s][storage][point]
    std::vector<std::vector<std::vector<double>>> storage_dch;      // lossy units only
    std::vector<std::vector<std::vector<double>>> storage_ch;       // lossy units only
    std::vector<std::vector<std::vector<double>>> load_power;       // [s][load][point]
    std::vector<std::vector<double>> grid_power;                    // [s][point]
    std::vector<std::vector<double>> curtailment;                   // [s][point]
    std::vector<std::vector<double>> deviation;                     // [s][point]
    std::vector<std::vector<double>> deviation_positive;            // [s][point]

    double max_integrality_error = 0.0;
};

inline ScheduleSolution extract_solution(const VariableIndex& ix, const std::vector<double>& x) {
    if (static_cast<int>(x.size()) != ix.n_columns())
        throw std::invalid_argument("extract_solution: vector length does not match the model");
    ScheduleSolution out;
    out.n_hours = ix.n_hours;
    out.n_subperiods = ix.n_subperiods;
    out.n_scenarios = ix.n_scenarios;
    const int T = ix.n_hours, K = ix.n_subperiods, S = ix.n_scenarios;
    const int P = T * K;

    auto round_bin = [&](int col) {
        int v = x[static_cast<std::size_t>(col)] >= 0.5 ? 1 : 0;
        out.max_integrality_error = std::max(
            out.max_integrality_error, std::abs(x[static_cast<std::size_t>(col)] - v));
        return v;
    };

    out.commit.resize(static_cast<std::size_t>(ix.n_units));
    for (int i = 0; i < ix.n_units; ++i)
        for (int t = 0; t < T; ++t)
            out.commit[static_cast<std::size_t>(i)].push_back(round_bin(ix.commit(i, t)));
    out.discharge_mode.resize(static_cast<std::size_t>(ix.n_storage));
    out.charge_mode.resize(static_cast<std::size_t>(ix.n_storage));
    for (int b = 0; b < ix.n_storage; ++b)
        for (int t = 0; t < T; ++t) {
            out.discharge_mode[static_cast<std::size_t>(b)].push_back(
                round_bin(ix.discharge_mode(b, t)));
            out.charge_mode[static_cast<std::size_t>(b)].push_back(round_bin(ix.charge_mode(b, t)));
        }
    out.load_on.resize(static_cast<std::size_t>(ix.n_adjustable));
    for (int d = 0; d < ix.n_adjustable; ++d)
        for (int t = 0; t < T; ++t)
            out.load_on[static_cast<std::size_t>(d)].push_back(round_bin(ix.load_on(d, t)));
    out.deviation_sign.assign(static_cast<std::size_t>(S), {});
    for (int s = 0; s < S; ++s)
        for (int t = 0; t < T; ++t)
            out.deviation_sign[static_cast<std::size_t>(s)].push_back(
                round_bin(ix.deviation_sign(t, s)));

    out.gen_power.assign(static_cast<std::size_t>(S), {});
    out.storage_power.assign(static_cast<std::size_t>(S), {});
    out.storage_energy.assign(static_cast<std::size_t>(S), {});
    out.storage_dch.assign(static_cast<std::size_t>(S), {});
    out.storage_ch.assign(static_cast<std::size_t>(S), {});
    out.load_power.assign(static_cast<std::size_t>(S), {});
    out.grid_power.assign(static_cast<std::size_t>(S), std::vector<double>());
    out.curtailment = out.grid_power;
    out.deviation = out.grid_power;
    out.deviation_positive = out.grid_power;

    for (int s = 0; s < S; ++s) {
        auto& gp = out.gen_power[static_cast<std::size_t>(s)];
        gp.resize(static_cast<std::size_t>(ix.n_units), std::vector<double>(P));
        for (int i = 0; i < ix.n_units; ++i)
            for (int t = 0; t < T; ++t)
                for (int tau = 0; tau < K; ++tau)
                    gp[static_cast<std::size_t>(i)][static_cast<std::size_t>(t * K + tau)] =
                        x[static_cast<std::size_t>(ix.gen_power(i, t, tau, s))];
        auto& sp = out.storage_power[static_cast<std::size_t>(s)];
        auto& se = out.storage_energy[static_cast<std::size_t>(s)];
        auto& sd = out.storage_dch[static_cast<std::size_t>(s)];
        auto& sc = out.storage_ch[static_cast<std::size_t>(s)];
        sp.resize(static_cast<std::size_t>(ix.n_storage), std::vector<double>(P));
        se.resize(static_cast<std::size_t>(ix.n_storage), std::vector<double>(P));
        sd.resize(static_cast<std::size_t>(ix.n_storage));
        sc.resize(static_cast<std::size_t>(ix.n_storage));
        for (int b = 0; b < ix.n_storage; ++b) {
            const bool split = ix.storage_split[static_cast<std::size_t>(b)];
            if (split) {
                sd[static_cast<std::size_t>(b)].resize(static_cast<std::size_t>(P));
                sc[static_cast<std::size_t>(b)].resize(static_cast<std::size_t>(P));
            }
            for (int t = 0; t < T; ++t)
                for (int tau = 0; tau < K; ++tau) {
                    const std::size_t pt = static_cast<std::size_t>(t * K + tau);
                    sp[static_cast<std::size_t>(b)][pt] =
                        x[static_cast<std::size_t>(ix.storage_power(b, t, tau, s))];
                    se[static_cast<std::size_t>(b)][pt] =
                        x[static_cast<std::size_t>(ix.storage_energy(b, t, tau, s))];
                    if (split) {
                        sd[static_cast<std::size_t>(b)][pt] =
                            x[static_cast<std::size_t>(ix.storage_discharge(b, t, tau, s))];
                        sc[static_cast<std::size_t>(b)][pt] =
                            x[static_cast<std::size_t>(ix.storage_charge(b, t, tau, s))];
                    }
                }
        }
        auto& lp = out.load_power[static_cast<std::size_t>(s)];
        lp.resize(static_cast<std::size_t>(ix.n_adjustable), std::vector<double>(P));
        for (int d = 0; d < ix.n_adjustable; ++d)
            for (int t = 0; t < T; ++t)
                for (int tau = 0; tau < K; ++tau)
                    lp[static_cast<std::size_t>(d)][static_cast<std::size_t>(t * K + tau)] =
                        x[static_cast<std::size_t>(ix.load_power(d, t, tau, s))];
        out.grid_power[static_cast<std::size_t>(s)].resize(static_cast<std::size_t>(P));
        out.curtailment[static_cast<std::size_t>(s)].resize(static_cast<std::size_t>(P));
        out.deviation[static_cast<std::size_t>(s)].resize(static_cast<std::size_t>(P));
        out.deviation_positive[static_cast<std::size_t>(s)].resize(static_cast<std::size_t>(P));
        for (int t = 0; t < T; ++t)
            for (int tau = 0; tau < K; ++tau) {
                const std::size_t pt = static_cast<std::size_t>(t * K + tau);
                out.grid_power[static_cast<std::size_t>(s)][pt] =
                    x[static_cast<std::size_t>(ix.grid_power(t, tau, s))];
                out.curtailment[static_cast<std::size_t>(s)][pt] =
                    x[static_cast<std::size_t>(ix.curtailment(t, tau, s))];
                out.deviation[static_cast<std::size_t>(s)][pt] =
                    x[static_cast<std::size_t>(ix.deviation(t, tau, s))];
                out.deviation_positive[static_cast<std::size_t>(s)][pt] =
                    x[static_cast<std::size_t>(ix.deviation_positive(t, tau, s))];
            }
    }
    return out;
}

// Energy cost rate ($/h) of running a unit at p kW, filling the piecewise
// segments in order. Convexity of the curve makes this the exact cost any
// optimal segment split carries.
inline double unit_energy_rate(const DispatchableUnit& u, double p) {
    double cost = 0.0, prev = 0.0;
    for (const auto& seg : u.cost_segments) {
        double take = std::min(p, seg.breakpoint_kw) - prev;
        if (take > 0.0) cost += take * seg.rate;
        prev = seg.breakpoint_kw;
        if (p <= prev) break;
    }
    return cost;
}

struct ScenarioCost {
    double generation = 0.0;   // energy cost of dispatchable output
    double no_load = 0.0;      // hourly commitment cost
    double startup = 0.0;      // event costs
    double shutdown = 0.0;
    double curtailment = 0.0;  // voll-priced shed energy
    double penalty = 0.0;      // positive schedule deviation
    double total() const {
        return generation + no_load + startup + shutdown + curtailment + penalty;
    }
};

struct CostReport {
    std::vector<ScenarioCost> per_scenario;
    double expected_total = 0.0;
    std::vector<Violation> violations;
    bool feasible() const { return violations.empty(); }
};

namespace eval_detail {

// Window check on an hourly 0/1 sequence: after a 0->1 transition at t the
// state must hold for min(limit, horizon remainder) hours; the initial run
// carries over. Returns the first violating hour or -1.
inline int check_min_run(const std::vector<int>& state, int limit, bool init_state,
                         int init_hours) {
    const int T = static_cast<int>(state.size());
    // In-horizon transitions trivially satisfy limit 1; the carried-over
    // initial run can still owe hours even then.
    if (limit >= 2)
        for (int t = 0; t < T; ++t) {
            const int prev = t > 0 ? state[static_cast<std::size_t>(t - 1)] : (init_state ? 1 : 0);
            if (state[static_cast<std::size_t>(t)] == 1 && prev == 0) {
                const int need = std::min(limit, T - t);
                for (int tt = t; tt < t + need; ++tt)
                    if (state[static_cast<std::size_t>(tt)] == 0) return tt;
            }
        }
    if (init_state && init_hours < limit) {
        const int need = std::min(limit - init_hours, T);
        for (int tt = 0; tt < need; ++tt)
            if (state[static_cast<std::size_t>(tt)] == 0) return tt;
    }
    return -1;
}

inline std::vector<int> complement(const std::vector<int>& state) {
    std::vector<int> out(state.size());
    for (std::size_t i = 0; i < state.size(); ++i) out[i] = 1 - state[i];
    return out;
}

inline std::string at_point(int t, int tau, int s) {
    return " at t=" + std::to_string(t) + " p=" + std::to_string(tau) +
           " s=" + std::to_string(s);
}

}  // namespace eval_detail

// Recomputes all cost terms from the dispatch and audits every constraint
// family at tolerance `tol`. First-stage costs repeat in every scenario row,
// so per_scenario[s].total() is the cost if scenario s realizes and
// expected_total is its probability-weighted sum.
inline CostReport evaluate(const MicrogridSpec& spec, const DmoSchedule& dmo,
                           const ScenarioSet& set, const ScheduleSolution& sol,
                           double tol = 1e-6) {
    const TimeGrid& g = spec.time_grid;
    const int T = g.n_hours, K = g.subperiods_per_hour;
    const int S = static_cast<int>(set.scenarios.size());
    const double dt = g.delta_tau();
    const int G = static_cast<int>(spec.dispatchable_units.size());
    const int B = static_cast<int>(spec.storage_units.size());
    const int Dn = static_cast<int>(spec.adjustable_loads.size());
    if (sol.n_hours != T || sol.n_subperiods != K || sol.n_scenarios != S)
        throw std::invalid_argument("evaluate: solution shape does not match spec and scenarios");

    CostReport report;
    auto flag = [&](const std::string& asset, const std::string& field, std::string msg) {
        report.violations.push_back({asset, field, std::move(msg)});
    };
    auto near = [&](double a, double b) {
        return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
    };
    using eval_detail::at_point;

    if (sol.max_integrality_error > tol)
        flag("", "integrality", "first-stage indicator off 0/1 by " +
                                    std::to_string(sol.max_integrality_error));

    // ---- first-stage costs and hourly logic --------------------------------
    double no_load = 0.0, startup = 0.0, shutdown = 0.0;
    for (int i = 0; i < G; ++i) {
        const auto& u = spec.dispatchable_units[i];
        const auto& I = sol.commit[static_cast<std::size_t>(i)];
        for (int t = 0; t < T; ++t) {
            const int prev = t > 0 ? I[static_cast<std::size_t>(t - 1)] : (u.init_committed ? 1 : 0);
            if (I[static_cast<std::size_t>(t)] == 1) no_load += u.no_load_cost;
            if (I[static_cast<std::size_t>(t)] == 1 && prev == 0) startup += u.startup_cost;
            if (I[static_cast<std::size_t>(t)] == 0 && prev == 1) shutdown += u.shutdown_cost;
        }
        int bad = eval_detail::check_min_run(I, u.min_up, u.init_committed, u.init_on_hours);
        if (bad >= 0)
            flag(u.id, "min_up", "commitment drops at hour " + std::to_string(bad) +
                                     " inside a minimum-up window");
        bad = eval_detail::check_min_run(eval_detail::complement(I), u.min_down,
                                         !u.init_committed, u.init_off_hours);
        if (bad >= 0)
            flag(u.id, "min_down", "commitment rises at hour " + std::to_string(bad) +
                                       " inside a minimum-down window");
    }
    for (int b = 0; b < B; ++b) {
        const auto& st = spec.storage_units[b];
        const auto& u = sol.discharge_mode[static_cast<std::size_t>(b)];
        const auto& v = sol.charge_mode[static_cast<std::size_t>(b)];
        for (int t = 0; t < T; ++t)
            if (u[static_cast<std::size_t>(t)] + v[static_cast<std::size_t>(t)] > 1)
                flag(st.id, "storage-mode",
                     "charging and discharging both selected in hour " + std::to_string(t));
        int bad = eval_detail::check_min_run(v, st.min_charge_time,
                                             st.init_mode == StorageMode::Charging,
                                             st.init_mode_hours);
        if (bad >= 0)
            flag(st.id, "min_charge_time",
                 "charge mode drops at hour " + std::to_string(bad) + " inside its window");
        bad = eval_detail::check_min_run(u, st.min_discharge_time,
                                         st.init_mode == StorageMode::Discharging,
                                         st.init_mode_hours);
        if (bad >= 0)
            flag(st.id, "min_discharge_time",
                 "discharge mode drops at hour " + std::to_string(bad) + " inside its window");
    }
    for (int d = 0; d < Dn; ++d) {
        const auto& load = spec.adjustable_loads[d];
        const auto& z = sol.load_on[static_cast<std::size_t>(d)];
        for (int t = 0; t < T; ++t)
            if (z[static_cast<std::size_t>(t)] == 1 &&
                (t < load.window_start || t > load.window_end))
                flag(load.id, "window", "operating outside hours [" +
                                            std::to_string(load.window_start) + ", " +
                                            std::to_string(load.window_end) + "]");
        int bad = eval_detail::check_min_run(z, load.min_operating_time, false, 0);
        // a run is allowed to be cut short only by the window end
        if (bad >= 0 && bad <= load.window_end)
            flag(load.id, "min_operating_time",
                 "operation stops at hour " + std::to_string(bad) + " inside its window");
    }

    // ---- per-scenario dispatch costs and physical audit ---------------------
    report.per_scenario.resize(static_cast<std::size_t>(S));
    for (int s = 0; s < S; ++s) {
        const Scenario& sc = set.scenarios[s];
        ScenarioCost& cost = report.per_scenario[static_cast<std::size_t>(s)];
        cost.no_load = no_load;
        cost.startup = startup;
        cost.shutdown = shutdown;

        for (int t = 0; t < T; ++t)
            for (int tau = 0; tau < K; ++tau) {
                const int pt = g.point(t, tau);
                const std::size_t p = static_cast<std::size_t>(pt);

                double balance = sol.grid_power[static_cast<std::size_t>(s)][p] +
                                 sol.curtailment[static_cast<std::size_t>(s)][p];
                for (int i = 0; i < G; ++i) {
                    const auto& u = spec.dispatchable_units[i];
                    const double pw = sol.gen_power[static_cast<std::size_t>(s)]
                                                   [static_cast<std::size_t>(i)][p];
                    const int on = sol.commit[static_cast<std::size_t>(i)]
                                             [static_cast<std::size_t>(t)];
                    balance += pw;
                    cost.generation += dt * unit_energy_rate(u, pw);
                    if (pw > on * u.p_max + tol || pw < on * u.p_min - tol)
                        flag(u.id, "power-limits",
                             "output " + std::to_string(pw) + " outside commitment band" +
                                 at_point(t, tau, s));
                    const double prev =
                        pt > 0 ? sol.gen_power[static_cast<std::size_t>(s)]
                                              [static_cast<std::size_t>(i)][p - 1]
                               : (u.init_committed ? u.init_power : 0.0);
                    if (pw - prev > u.ramp_up + tol)
                        flag(u.id, "ramp_up", "climb of " + std::to_string(pw - prev) +
                                                  " exceeds the limit" + at_point(t, tau, s));
                    if (prev - pw > u.ramp_down + tol)
                        flag(u.id, "ramp_down", "drop of " + std::to_string(prev - pw) +
                                                    " exceeds the limit" + at_point(t, tau, s));
                }
                for (int b = 0; b < B; ++b) {
                    const auto& st = spec.storage_units[b];
                    const double pb = sol.storage_power[static_cast<std::size_t>(s)]
                                                       [static_cast<std::size_t>(b)][p];
                    const double cb = sol.storage_energy[static_cast<std::size_t>(s)]
                                                        [static_cast<std::size_t>(b)][p];
                    const int uu = sol.discharge_mode[static_cast<std::size_t>(b)]
                                                     [static_cast<std::size_t>(t)];
                    const int vv = sol.charge_mode[static_cast<std::size_t>(b)]
                                                  [static_cast<std::size_t>(t)];
                    balance += pb;
                    if (pb > st.p_dch_max * uu - st.p_ch_min * vv + tol ||
                        pb < st.p_dch_min * uu - st.p_ch_max * vv - tol)
                        flag(st.id, "storage-mode",
                             "net power " + std::to_string(pb) +
                                 " outside the selected mode band" + at_point(t, tau, s));
                    const bool split =
                        !sol.storage_dch[static_cast<std::size_t>(s)]
                             [static_cast<std::size_t>(b)].empty();
                    const double prev_cb =
                        pt > 0 ? sol.storage_energy[static_cast<std::size_t>(s)]
                                                   [static_cast<std::size_t>(b)][p - 1]
                               : st.c_init;
                    double expected_cb;
                    if (split) {
                        const double pd = sol.storage_dch[static_cast<std::size_t>(s)]
                                                         [static_cast<std::size_t>(b)][p];
                        const double pc = sol.storage_ch[static_cast<std::size_t>(s)]
                                                        [static_cast<std::size_t>(b)][p];
                        expected_cb = prev_cb - dt * pd + dt * st.efficiency * pc;
                        if (!near(pb, pd - pc))
                            flag(st.id, "storage-split",
                                 "net power does not match its split" + at_point(t, tau, s));
                    } else {
                        expected_cb = prev_cb - dt * pb;
                    }
                    if (!near(cb, expected_cb))
                        flag(st.id, "energy-update",
                             "stored energy " + std::to_string(cb) + " != " +
                                 std::to_string(expected_cb) + at_point(t, tau, s));
                    if (cb < -tol || cb > st.c_max + tol)
                        flag(st.id, "energy-bounds",
                             "stored energy " + std::to_string(cb) + " outside [0, c_max]" +
                                 at_point(t, tau, s));
                }
                double demand = 0.0;
                for (const auto& lp : sc.load_profiles) demand += lp[p];
                for (const auto& rp : sc.renewable_profiles) balance += rp[p];
                for (int d = 0; d < Dn; ++d) {
                    const auto& load = spec.adjustable_loads[d];
                    const double dw = sol.load_power[static_cast<std::size_t>(s)]
                                                    [static_cast<std::size_t>(d)][p];
                    const int on = sol.load_on[static_cast<std::size_t>(d)]
                                              [static_cast<std::size_t>(t)];
                    demand += dw;
                    if (dw > on * load.d_max + tol || dw < on * load.d_min - tol)
                        flag(load.id, "power-limits",
                             "consumption " + std::to_string(dw) + " outside its band" +
                                 at_point(t, tau, s));
                }
                if (!near(balance, demand))
                    flag("", "balance", "supply " + std::to_string(balance) + " != demand " +
                                            std::to_string(demand) + at_point(t, tau, s));

                const double pm = sol.grid_power[static_cast<std::size_t>(s)][p];
                const double cap = sc.islanding[p] ? dmo.p_m_max : 0.0;
                if (std::abs(pm) > cap + tol)
                    flag("", "grid-limit", "transfer " + std::to_string(pm) +
                                               " exceeds the available line capacity" +
                                               at_point(t, tau, s));
                const double dev = sol.deviation[static_cast<std::size_t>(s)][p];
                const double dev_pos = sol.deviation_positive[static_cast<std::size_t>(s)][p];
                const double sched = dmo.p_sched[static_cast<std::size_t>(t)];
                if (!near(dev, pm - sched))
                    flag("", "deviation", "recorded deviation " + std::to_string(dev) +
                                              " != transfer error " + std::to_string(pm - sched) +
                                              at_point(t, tau, s));
                const int sign = sol.deviation_sign[static_cast<std::size_t>(s)]
                                                   [static_cast<std::size_t>(t)];
                if (dev_pos < -tol || (sign == 0 && (dev > tol || dev_pos > tol)) ||
                    (sign == 1 && !near(dev_pos, dev)))
                    flag("", "deviation-sign",
                         "positive part " + std::to_string(dev_pos) +
                             " inconsistent with its sign indicator" + at_point(t, tau, s));

                const double ls = sol.curtailment[static_cast<std::size_t>(s)][p];
                if (ls < -tol) flag("", "curtailment", "negative shed" + at_point(t, tau, s));
                if (!std::isfinite(spec.voll) && ls > tol)
                    flag("", "curtailment", "shed while lost load is priced out" +
                                                at_point(t, tau, s));

                if (std::isfinite(spec.voll))
                    cost.curtailment += dt * spec.voll * std::max(0.0, ls);
                cost.penalty += dt * dmo.penalty * std::max(0.0, pm - sched);
            }

        // window-wide energy requirement per adjustable load
        for (int d = 0; d < Dn; ++d) {
            const auto& load = spec.adjustable_loads[d];
            double served = 0.0;
            for (int t = load.window_start; t <= load.window_end; ++t)
                for (int tau = 0; tau < K; ++tau)
                    served += dt * sol.load_power[static_cast<std::size_t>(s)]
                                                 [static_cast<std::size_t>(d)]
                                                 [static_cast<std::size_t>(g.point(t, tau))];
            if (!near(served, load.energy_required))
                flag(load.id, "energy_required",
                     "served " + std::to_string(served) + " kWh, requires " +
                         std::to_string(load.energy_required) + " in scenario " +
                         std::to_string(s));
        }
        report.expected_total += sc.probability * cost.total();
    }
    return report;
}

// Exhaustive reference solver: enumerates every assignment of the free
// binaries and solves the continuous remainder, keeping the best objective
// (earliest assignment on ties). Rows touching only binary columns are
// checked before the LP to skip dead assignments cheaply.
inline MilpSolution brute_force_solve(const MilpModel& model, int max_free_binaries = 20) {
    model.validate();
    std::vector<int> free_bins;
    for (int j = 0; j < model.n_cols(); ++j) {
        const auto& v = model.variables[static_cast<std::size_t>(j)];
        if (v.kind == VarKind::Binary && v.lower < v.upper) free_bins.push_back(j);
    }
    if (static_cast<int>(free_bins.size()) > max_free_binaries)
        throw std::invalid_argument("brute_force_solve: " + std::to_string(free_bins.size()) +
                                    " free binaries exceed the enumeration cap");

    std::vector<char> is_binary(static_cast<std::size_t>(model.n_cols()), 0);
    for (int j = 0; j < model.n_cols(); ++j)
        if (model.variables[static_cast<std::size_t>(j)].kind == VarKind::Binary)
            is_binary[static_cast<std::size_t>(j)] = 1;
    std::vector<const Constraint*> binary_rows;
    for (const auto& c : model.constraints) {
        bool all_bin = !c.entries.empty();
        for (const auto& e : c.entries)
            if (!is_binary[static_cast<std::size_t>(e.column)]) all_bin = false;
        if (all_bin) binary_rows.push_back(&c);
    }

    SimplexSolver simplex(model);
    std::vector<double> lb(static_cast<std::size_t>(model.n_cols()));
    std::vector<double> ub(static_cast<std::size_t>(model.n_cols()));
    std::vector<double> base(static_cast<std::size_t>(model.n_cols()), 0.0);
    for (int j = 0; j < model.n_cols(); ++j) {
        const auto& v = model.variables[static_cast<std::size_t>(j)];
        base[static_cast<std::size_t>(j)] = v.lower;  // pinned binaries sit at lower == upper
    }

    MilpSolution best;
    best.status = MilpStatus::Infeasible;
    best.gap = kInf;
    const std::uint64_t masks = 1ULL << free_bins.size();
    for (std::uint64_t mask = 0; mask < masks; ++mask) {
        ++best.nodes;  // one node per enumerated assignment
        for (int j = 0; j < model.n_cols(); ++j) {
            lb[static_cast<std::size_t>(j)] = model.variables[static_cast<std::size_t>(j)].lower;
            ub[static_cast<std::size_t>(j)] = model.variables[static_cast<std::size_t>(j)].upper;
        }
        std::vector<double> binval = base;
        for (std::size_t k = 0; k < free_bins.size(); ++k) {
            const double v = (mask >> k) & 1ULL ? 1.0 : 0.0;
            lb[static_cast<std::size_t>(free_bins[k])] = v;
            ub[static_cast<std::size_t>(free_bins[k])] = v;
            binval[static_cast<std::size_t>(free_bins[k])] = v;
        }
        bool dead = false;
        for (const Constraint* c : binary_rows) {
            double lhs = 0.0;
            for (const auto& e : c->entries)
                lhs += e.coeff * binval[static_cast<std::size_t>(e.column)];
            if ((c->sense == RowSense::LessEqual && lhs > c->rhs + 1e-9) ||
                (c->sense == RowSense::GreaterEqual && lhs < c->rhs - 1e-9) ||
                (c->sense == RowSense::Equal && std::abs(lhs - c->rhs) > 1e-9)) {
                dead = true;
                break;
            }
        }
        if (dead) continue;

        LpSolution lp = simplex.solve_with_bounds(lb, ub);
        if (lp.status == LpStatus::Unbounded)
            throw std::runtime_error("brute_force_solve: continuous relaxation is unbounded");
        if (lp.status != LpStatus::Optimal) continue;
        if (!best.has_incumbent() || lp.objective < best.objective - 1e-12) {
            best.status = MilpStatus::Optimal;
            best.x = lp.x;
            best.objective = lp.objective;
            best.bound = lp.objective;
            best.gap = 0.0;
        }
    }
    return best;
}

// Consecutive-hours-in-state counters implied by an hourly 0/1 sequence and
// the initial run. on_hours[t] counts the run length ending at t while the
// state is 1; off_hours mirrors it.
struct CounterSeries {
    std::vector<int> on_hours;
    std::vector<int> off_hours;
};

inline CounterSeries reconstruct_counters(const std::vector<int>& state, bool init_state,
                                          int init_hours) {
    CounterSeries out;
    out.on_hours.resize(state.size());
    out.off_hours.resize(state.size());
    int run_on = init_state ? init_hours : 0;
    int run_off = init_state ? 0 : init_hours;
    for (std::size_t t = 0; t < state.size(); ++t) {
        if (state[t] == 1) {
            run_on += 1;
            run_off = 0;
        } else {
            run_off += 1;
            run_on = 0;
        }
        out.on_hours[t] = run_on;
        out.off_hours[t] = run_off;
    }
    return out;
}

}  // namespace mgsched
