// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>
#include <vector>

#include "mgsched/formulation.hpp"
#include "mgsched/lp_format.hpp"
#include "mgsched/scenario.hpp"
#include "mgsched/solver.hpp"
#include "support/tiny_instances.hpp"

using namespace mgsched;

namespace {

ScenarioSet forecast_only(const MicrogridSpec& spec, int n = 1) {
    ScenarioConfig cfg;
    cfg.n_scenarios = n;
    return generate_scenarios(spec, cfg);
}

const Constraint* find_row(const MilpModel& m, const std::string& name) {
    for (const auto& c : m.constraints)
        if (c.name == name) return &c;
    return nullptr;
}

double entry_coeff(const Constraint& c, int column) {
    for (const auto& e : c.entries)
        if (e.column == column) return e.coeff;
    return 0.0;
}

// Richer fixture: 2 units (one with a 2-segment cost curve), storage, an
// adjustable load and a renewable, over 3 hours x 2 sub-periods.
MicrogridSpec mixed_spec() {
    MicrogridSpec spec;
    spec.time_grid = {3, 2};
    DispatchableUnit g0 = mgsched::testing::basic_unit("g0");
    DispatchableUnit g1 = mgsched::testing::basic_unit("g1");
    g1.cost_segments = {{60.0, 0.1}, {100.0, 0.2}};
    g1.init_committed = true;
    g1.init_on_hours = 1;
    g1.init_power = 30.0;
    g1.min_up = 3;
    g1.min_down = 2;
    spec.dispatchable_units = {g0, g1};
    spec.storage_units = {mgsched::testing::basic_storage("b0")};
    AdjustableLoad d0 = mgsched::testing::basic_adjustable("d0", 3);
    d0.window_start = 1;
    d0.window_end = 2;
    d0.energy_required = 8.0;
    d0.min_operating_time = 2;
    spec.adjustable_loads = {d0};
    NondispatchableUnit w;
    w.id = "w0";
    w.forecast.assign(6, 15.0);
    spec.nondispatchable_units = {w};
    spec.fixed_loads = {{"l0", std::vector<double>(6, 70.0)}};
    spec.voll = 100.0;
    return spec;
}

DmoSchedule mixed_dmo() {
    DmoSchedule dmo;
    dmo.p_sched = {10.0, -5.0, 0.0};
    dmo.p_m_max = 50.0;
    dmo.penalty = 2.0;
    return dmo;
}

}  // namespace

TEST_CASE("single unit two hour model has the frozen shape") {
    MicrogridSpec spec = mgsched::testing::single_unit_spec();
    DmoSchedule dmo = mgsched::testing::single_unit_dmo();
    BuiltModel built = build_model(spec, dmo, forecast_only(spec));

    // hand count: per hour 1 I + 1 SU + 1 SD + 1 DELTA + 1 P + 1 PM + 1 LS
    // + 1 DP + 1 DPP = 9 columns, so 18 over two hours; binaries are I and
    // DELTA. Rows: 2 balance + 2 pmax + 2 pmin + 4 ramps + 2 events + 10
    // deviation rows = 22, with 51 nonzeros.
    ModelStats st = model_stats(built.model);
    CHECK(st.n_vars == 18);
    CHECK(st.n_binaries == 4);
    CHECK(st.n_vars - st.n_binaries == 14);
    CHECK(st.n_constraints == 22);
    CHECK(st.n_nonzeros == 51);
    CHECK(built.index.n_columns() == 18);
}

TEST_CASE("typed getters and key_of are inverses") {
    MicrogridSpec spec = mixed_spec();
    spec.storage_units[0].efficiency = 0.9;  // exercise the split columns too
    BuiltModel built = build_model(spec, mixed_dmo(), forecast_only(spec, 2));
    const VariableIndex& ix = built.index;

    for (int c = 0; c < ix.n_columns(); ++c) {
        const VarKey& k = ix.key_of(c);
        int back = -1;
        switch (k.family) {
            case VarFamily::Commit: back = ix.commit(k.entity, k.hour); break;
            case VarFamily::Startup: back = ix.startup(k.entity, k.hour); break;
            case VarFamily::Shutdown: back = ix.shutdown(k.entity, k.hour); break;
            case VarFamily::DischargeMode: back = ix.discharge_mode(k.entity, k.hour); break;
            case VarFamily::ChargeMode: back = ix.charge_mode(k.entity, k.hour); break;
            case VarFamily::LoadOn: back = ix.load_on(k.entity, k.hour); break;
            case VarFamily::DeviationSign: back = ix.deviation_sign(k.hour, k.scenario); break;
            case VarFamily::GenPower:
                back = ix.gen_power(k.entity, k.hour, k.subperiod, k.scenario);
                break;
            case VarFamily::GenSegment:
                back = ix.gen_segment(k.entity, k.segment, k.hour, k.subperiod, k.scenario);
                break;
            case VarFamily::StoragePower:
                back = ix.storage_power(k.entity, k.hour, k.subperiod, k.scenario);
                break;
            case VarFamily::StorageEnergy:
                back = ix.storage_energy(k.entity, k.hour, k.subperiod, k.scenario);
                break;
            case VarFamily::StorageDischarge:
                back = ix.storage_discharge(k.entity, k.hour, k.subperiod, k.scenario);
                break;
            case VarFamily::StorageCharge:
                back = ix.storage_charge(k.entity, k.hour, k.subperiod, k.scenario);
                break;
            case VarFamily::GridPower: back = ix.grid_power(k.hour, k.subperiod, k.scenario); break;
            case VarFamily::Curtailment:
                back = ix.curtailment(k.hour, k.subperiod, k.scenario);
                break;
            case VarFamily::Deviation: back = ix.deviation(k.hour, k.subperiod, k.scenario); break;
            case VarFamily::DeviationPositive:
                back = ix.deviation_positive(k.hour, k.subperiod, k.scenario);
                break;
            case VarFamily::LoadPower:
                back = ix.load_power(k.entity, k.hour, k.subperiod, k.scenario);
                break;
        }
        REQUIRE(back == c);
    }
}

TEST_CASE("islanded points pin the grid transfer to zero through bounds") {
    MicrogridSpec spec = mgsched::testing::single_unit_spec();
    DmoSchedule dmo = mgsched::testing::single_unit_dmo();
    ScenarioSet set = forecast_only(spec);
    set.scenarios[0].islanding = {1, 0};  // hour 1 disconnected

    BuiltModel built = build_model(spec, dmo, set);
    const Variable& connected = built.model.variables[built.index.grid_power(0, 0, 0)];
    CHECK(connected.lower == -100.0);
    CHECK(connected.upper == 100.0);
    const Variable& islanded = built.model.variables[built.index.grid_power(1, 0, 0)];
    CHECK(islanded.lower == 0.0);
    CHECK(islanded.upper == 0.0);
}

TEST_CASE("objective coefficients follow probability times duration times price") {
    MicrogridSpec spec = mgsched::testing::single_unit_spec();
    spec.time_grid = {2, 6};
    spec.fixed_loads[0].forecast.assign(12, 50.0);
    spec.voll = 1000.0;
    spec.dispatchable_units[0].no_load_cost = 7.0;
    spec.dispatchable_units[0].startup_cost = 120.0;
    spec.dispatchable_units[0].shutdown_cost = 30.0;
    DmoSchedule dmo = mgsched::testing::single_unit_dmo();
    dmo.penalty = 0.5;
    BuiltModel built = build_model(spec, dmo, forecast_only(spec, 2));
    const MilpModel& m = built.model;
    const VariableIndex& ix = built.index;

    // curtailment: pr * delta_tau * voll = 0.5 * (1/6) * 1000
    CHECK(m.variables[ix.curtailment(0, 3, 1)].objective ==
          Catch::Approx(500.0 / 6.0).epsilon(1e-12));
    // energy: pr * delta_tau * rate = 0.5 * (1/6) * 0.1
    CHECK(m.variables[ix.gen_power(0, 1, 2, 0)].objective ==
          Catch::Approx(0.05 / 6.0).epsilon(1e-12));
    // deviation penalty: 0.5 * (1/6) * 0.5
    CHECK(m.variables[ix.deviation_positive(1, 5, 1)].objective ==
          Catch::Approx(0.25 / 6.0).epsilon(1e-12));
    // hourly commitment carries the no-load cost unweighted; events likewise
    CHECK(m.variables[ix.commit(0, 1)].objective == 7.0);
    CHECK(m.variables[ix.startup(0, 0)].objective == 120.0);
    CHECK(m.variables[ix.shutdown(0, 1)].objective == 30.0);
}

TEST_CASE("commitment columns are shared across scenarios") {
    MicrogridSpec spec = mixed_spec();
    DmoSchedule dmo = mixed_dmo();
    ModelStats one = model_stats(build_model(spec, dmo, forecast_only(spec, 1)).model);
    ModelStats three = model_stats(build_model(spec, dmo, forecast_only(spec, 3)).model);

    // binaries: G*T commitments, 2*B*T storage modes, D*T load switches are
    // first-stage; only the T*S deviation signs scale with scenarios
    const int T = 3, G = 2, B = 1, D = 1;
    CHECK(one.n_binaries == G * T + 2 * B * T + D * T + T * 1);
    CHECK(three.n_binaries == G * T + 2 * B * T + D * T + T * 3);
}

TEST_CASE("storage exclusivity row keeps both modes from engaging at once") {
    MicrogridSpec spec = mixed_spec();
    BuiltModel built = build_model(spec, mixed_dmo(), forecast_only(spec));
    const Constraint* row = find_row(built.model, "sexc_b0_t1");
    REQUIRE(row != nullptr);
    CHECK(row->sense == RowSense::LessEqual);
    CHECK(row->rhs == 1.0);
    REQUIRE(row->entries.size() == 2);
    CHECK(entry_coeff(*row, built.index.discharge_mode(0, 1)) == 1.0);
    CHECK(entry_coeff(*row, built.index.charge_mode(0, 1)) == 1.0);
}

TEST_CASE("structural rows carry the intended coefficients") {
    MicrogridSpec spec = mixed_spec();
    DmoSchedule dmo = mixed_dmo();
    BuiltModel built = build_model(spec, dmo, forecast_only(spec));
    const MilpModel& m = built.model;
    const VariableIndex& ix = built.index;

    SECTION("deviation definition and sign rows") {
        const Constraint* def = find_row(m, "ddef_t1_p0_s0");
        REQUIRE(def != nullptr);
        CHECK(def->sense == RowSense::Equal);
        CHECK(def->rhs == 5.0);  // -p_sched[1]
        CHECK(entry_coeff(*def, ix.deviation(1, 0, 0)) == 1.0);
        CHECK(entry_coeff(*def, ix.grid_power(1, 0, 0)) == -1.0);

        // Indicator constants are the per-hour deviation ranges: with the
        // limit at 50 and hour 1 scheduled at -5, the error spans [-45, 55].
        const Constraint* sgn = find_row(m, "dsgn_t1_p0_s0");
        REQUIRE(sgn != nullptr);
        CHECK(sgn->sense == RowSense::LessEqual);
        CHECK(sgn->rhs == 0.0);
        CHECK(entry_coeff(*sgn, ix.deviation(1, 0, 0)) == 1.0);
        CHECK(entry_coeff(*sgn, ix.deviation_sign(1, 0)) == -55.0);

        const Constraint* lkl = find_row(m, "dlkl_t1_p0_s0");
        REQUIRE(lkl != nullptr);
        CHECK(lkl->sense == RowSense::GreaterEqual);
        CHECK(lkl->rhs == -45.0);
        CHECK(entry_coeff(*lkl, ix.deviation_sign(1, 0)) == -45.0);

        CHECK(m.variables[static_cast<std::size_t>(ix.deviation(1, 0, 0))].lower == -45.0);
        CHECK(m.variables[static_cast<std::size_t>(ix.deviation(1, 0, 0))].upper == 55.0);
        CHECK(m.variables[static_cast<std::size_t>(ix.deviation_positive(1, 0, 0))].upper ==
              55.0);
        CHECK(m.variables[static_cast<std::size_t>(ix.deviation_positive(0, 0, 0))].upper ==
              40.0);  // hour 0 scheduled at +10
    }

    SECTION("first energy row chains to the initial level") {
        const Constraint* soc = find_row(m, "soc_b0_t0_p0_s0");
        REQUIRE(soc != nullptr);
        CHECK(soc->sense == RowSense::Equal);
        CHECK(soc->rhs == 20.0);  // c_init
        CHECK(entry_coeff(*soc, ix.storage_energy(0, 0, 0, 0)) == 1.0);
        CHECK(entry_coeff(*soc, ix.storage_power(0, 0, 0, 0)) == 0.5);  // delta_tau
        const Constraint* next = find_row(m, "soc_b0_t0_p1_s0");
        REQUIRE(next != nullptr);
        CHECK(next->rhs == 0.0);
        CHECK(entry_coeff(*next, ix.storage_energy(0, 0, 0, 0)) == -1.0);
    }

    SECTION("first ramp rows use the initial operating point") {
        // g1 starts committed at 30 kW with ramps of 100 per sub-period
        const Constraint* up = find_row(m, "rup_g1_t0_p0_s0");
        REQUIRE(up != nullptr);
        CHECK(up->rhs == 130.0);
        REQUIRE(up->entries.size() == 1);
        const Constraint* dn = find_row(m, "rdn_g1_t0_p0_s0");
        REQUIRE(dn != nullptr);
        CHECK(dn->rhs == 70.0);
        // interior ramp rows difference two consecutive points
        const Constraint* mid = find_row(m, "rup_g1_t1_p0_s0");
        REQUIRE(mid != nullptr);
        CHECK(mid->rhs == 100.0);
        CHECK(entry_coeff(*mid, ix.gen_power(1, 1, 0, 0)) == 1.0);
        CHECK(entry_coeff(*mid, ix.gen_power(1, 0, 1, 0)) == -1.0);
    }

    SECTION("piecewise rows split power into bounded segments") {
        const Constraint* pwl = find_row(m, "pwl_g1_t2_p1_s0");
        REQUIRE(pwl != nullptr);
        CHECK(pwl->sense == RowSense::Equal);
        CHECK(entry_coeff(*pwl, ix.gen_power(1, 2, 1, 0)) == 1.0);
        CHECK(entry_coeff(*pwl, ix.gen_segment(1, 0, 2, 1, 0)) == -1.0);
        CHECK(entry_coeff(*pwl, ix.gen_segment(1, 1, 2, 1, 0)) == -1.0);
        CHECK(m.variables[ix.gen_segment(1, 0, 2, 1, 0)].upper == 60.0);
        CHECK(m.variables[ix.gen_segment(1, 1, 2, 1, 0)].upper == 40.0);
        // single-segment unit has no segment columns
        CHECK(built.index.segment_counts[0] == 0);
    }

    SECTION("minimum up window holds commitment after a start") {
        // g1: min_up 3, T = 3, so the t=0 window spans the horizon. Initially
        // committed for 1 of 3 hours: hours 0 and 1 stay pinned on.
        CHECK(m.variables[ix.commit(1, 0)].lower == 1.0);
        CHECK(m.variables[ix.commit(1, 1)].lower == 1.0);
        CHECK(m.variables[ix.commit(1, 2)].lower == 0.0);
        const Constraint* win = find_row(m, "upwin_g1_t0");
        REQUIRE(win != nullptr);
        CHECK(win->sense == RowSense::GreaterEqual);
        // sum I(0..2) - 3 I(0) >= -3 * init  ->  coefficient of I(0) merges
        CHECK(win->rhs == -3.0);
        CHECK(entry_coeff(*win, ix.commit(1, 0)) == -2.0);
        CHECK(entry_coeff(*win, ix.commit(1, 1)) == 1.0);
        CHECK(entry_coeff(*win, ix.commit(1, 2)) == 1.0);
    }

    SECTION("adjustable load is forced off outside its window") {
        CHECK(m.variables[ix.load_on(0, 0)].upper == 0.0);
        CHECK(m.variables[ix.load_on(0, 1)].upper == 1.0);
        CHECK(m.variables[ix.load_power(0, 0, 1, 0)].upper == 0.0);
        CHECK(m.variables[ix.load_power(0, 2, 1, 0)].upper == 10.0);
        const Constraint* ener = find_row(m, "ener_d0_s0");
        REQUIRE(ener != nullptr);
        CHECK(ener->sense == RowSense::Equal);
        CHECK(ener->rhs == 8.0);
        REQUIRE(ener->entries.size() == 4);  // 2 window hours x 2 sub-periods
        for (const auto& e : ener->entries) CHECK(e.coeff == 0.5);
    }
}

TEST_CASE("build rejects mismatched inputs") {
    MicrogridSpec spec = mgsched::testing::single_unit_spec();
    DmoSchedule dmo = mgsched::testing::single_unit_dmo();
    ScenarioSet set = forecast_only(spec);

    ScenarioSet empty;
    CHECK_THROWS_AS(build_model(spec, dmo, empty), std::invalid_argument);

    DmoSchedule short_dmo = dmo;
    short_dmo.p_sched = {20.0};
    CHECK_THROWS_AS(build_model(spec, short_dmo, set), std::invalid_argument);

    ScenarioSet bad = set;
    bad.scenarios[0].islanding.pop_back();
    CHECK_THROWS_AS(build_model(spec, dmo, bad), std::invalid_argument);

    bad = set;
    bad.scenarios[0].load_profiles[0].push_back(1.0);
    CHECK_THROWS_AS(build_model(spec, dmo, bad), std::invalid_argument);
}

TEST_CASE("construction is deterministic") {
    MicrogridSpec spec = mixed_spec();
    DmoSchedule dmo = mixed_dmo();
    ScenarioConfig cfg;
    cfg.n_scenarios = 3;
    cfg.renewable_band = 0.2;
    cfg.load_band = 0.1;
    cfg.islanding_prob_per_hour = 0.3;
    cfg.seed = 5;
    ScenarioSet set = generate_scenarios(spec, cfg);

    std::ostringstream a, b;
    write_lp(build_model(spec, dmo, set).model, a);
    write_lp(build_model(spec, dmo, set).model, b);
    CHECK(a.str() == b.str());
    CHECK(!a.str().empty());
}

TEST_CASE("solved models satisfy balance and storage bookkeeping") {
    MicrogridSpec spec = mixed_spec();
    spec.dispatchable_units[1].min_up = 1;  // leave room for cycling
    spec.dispatchable_units[1].min_down = 1;
    DmoSchedule dmo = mixed_dmo();
    ScenarioConfig cfg;
    cfg.n_scenarios = 2;
    cfg.renewable_band = 0.3;
    cfg.islanding_prob_per_hour = 0.4;
    cfg.seed = 12;
    ScenarioSet set = generate_scenarios(spec, cfg);
    BuiltModel built = build_model(spec, dmo, set);

    MilpSolution sol = solve_milp(built.model);
    REQUIRE(sol.status == MilpStatus::Optimal);
    const VariableIndex& ix = built.index;
    const TimeGrid& g = spec.time_grid;

    for (int s = 0; s < 2; ++s) {
        const Scenario& sc = set.scenarios[s];
        double soc = spec.storage_units[0].c_init;
        for (int t = 0; t < g.n_hours; ++t)
            for (int tau = 0; tau < g.subperiods_per_hour; ++tau) {
                const int pt = g.point(t, tau);
                double lhs = sol.x[ix.grid_power(t, tau, s)] + sol.x[ix.curtailment(t, tau, s)];
                for (int i = 0; i < 2; ++i) lhs += sol.x[ix.gen_power(i, t, tau, s)];
                lhs += sol.x[ix.storage_power(0, t, tau, s)];
                lhs += sc.renewable_profiles[0][pt];
                double rhs = sc.load_profiles[0][pt] + sol.x[ix.load_power(0, t, tau, s)];
                CHECK(lhs == Catch::Approx(rhs).margin(1e-6));

                soc -= g.delta_tau() * sol.x[ix.storage_power(0, t, tau, s)];
                CHECK(sol.x[ix.storage_energy(0, t, tau, s)] ==
                      Catch::Approx(soc).margin(1e-6));
                CHECK(soc >= -1e-6);
                CHECK(soc <= spec.storage_units[0].c_max + 1e-6);
            }
    }
}
