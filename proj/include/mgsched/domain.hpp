// SPDX-License-Identifier: Apache-2.0
#pragma once

// Typed description of the microgrid under schedule: time grid, dispatchable
// units, storage, renewables, loads, and the operator-assigned power transfer
// schedule. All values are plain data, immutable by convention once built;
// validate_spec() reports every invariant breach instead of throwing.

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

namespace mgsched {

// Hours in the horizon and sub-periods per hour. delta_tau is derived, never
// set directly, so delta_tau * subperiods_per_hour == 1 holds by construction.
struct TimeGrid {
    int n_hours = 24;
    int subperiods_per_hour = 6;

    double delta_tau() const { return 1.0 / static_cast<double>(subperiods_per_hour); }
    int n_points() const { return n_hours * subperiods_per_hour; }
    int point(int t, int tau) const { return t * subperiods_per_hour + tau; }
};

// One segment of a convex piecewise-linear energy cost curve. `breakpoint_kw`
// is the cumulative power level where the segment ends; rates must be
// non-decreasing across segments.
struct CostSegment {
    double breakpoint_kw = 0.0;
    double rate = 0.0;  // $/kWh
};

struct DispatchableUnit {
    std::string id;
    double p_min = 0.0;  // kW
    double p_max = 0.0;  // kW
    double ramp_up = 0.0;    // kW per sub-period
    double ramp_down = 0.0;  // kW per sub-period
    int min_up = 0;    // hours
    int min_down = 0;  // hours
    std::vector<CostSegment> cost_segments;
    double no_load_cost = 0.0;   // $/h while committed
    double startup_cost = 0.0;   // $ per event
    double shutdown_cost = 0.0;  // $ per event
    bool init_committed = false;
    int init_on_hours = 0;
    int init_off_hours = 0;
    double init_power = 0.0;  // kW, meaningful when init_committed
};

enum class StorageMode { Charging, Discharging, Idle };

struct StorageUnit {
    std::string id;
    double p_ch_min = 0.0;   // kW
    double p_ch_max = 0.0;   // kW
    double p_dch_min = 0.0;  // kW
    double p_dch_max = 0.0;  // kW
    double c_max = 0.0;      // kWh
    double c_init = 0.0;     // kWh
    int min_charge_time = 0;     // hours
    int min_discharge_time = 0;  // hours
    // Charge efficiency hook; 1.0 reproduces the lossless energy update.
    double efficiency = 1.0;
    StorageMode init_mode = StorageMode::Idle;
    int init_mode_hours = 0;
};

// Renewable generator: output is an uncertain parameter, not a decision.
struct NondispatchableUnit {
    std::string id;
    std::vector<double> forecast;  // kW per (t, tau), length n_points
};

struct FixedLoad {
    std::string id;
    std::vector<double> forecast;  // kW per (t, tau), length n_points
};

struct AdjustableLoad {
    std::string id;
    double d_min = 0.0;  // kW
    double d_max = 0.0;  // kW
    double energy_required = 0.0;  // kWh over the window
    int window_start = 0;  // first hour (inclusive)
    int window_end = 0;    // last hour (inclusive)
    int min_operating_time = 0;  // hours
};

// Hourly main-grid transfer assigned by the market operator. Positive values
// schedule the microgrid as a load (import), negative as a generator.
struct DmoSchedule {
    std::vector<double> p_sched;  // kW per hour
    double p_m_max = 0.0;  // kW, interconnection limit
    double penalty = 0.0;  // $/kWh on positive deviation
};

struct MicrogridSpec {
    TimeGrid time_grid;
    std::vector<DispatchableUnit> dispatchable_units;
    std::vector<StorageUnit> storage_units;
    std::vector<NondispatchableUnit> nondispatchable_units;
    std::vector<FixedLoad> fixed_loads;
    std::vector<AdjustableLoad> adjustable_loads;
    double voll = 0.0;  // $/kWh value of lost load
};

// A single invariant breach: which asset, which field, what went wrong.
struct Violation {
    std::string asset_id;  // empty for spec-level breaches
    std::string field;
    std::string message;
};

struct ValidationReport {
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
    std::string to_string() const {
        std::string out;
        for (const auto& v : violations) {
            out += v.asset_id.empty() ? std::string("<spec>") : v.asset_id;
            out += "." + v.field + ": " + v.message + "\n";
        }
        return out;
    }
};

namespace detail {

inline bool finite(double x) { return std::isfinite(x); }

inline void require(std::vector<Violation>& out, bool cond, const std::string& asset,
                    const std::string& field, const std::string& msg) {
    if (!cond) out.push_back({asset, field, msg});
}

inline std::string num(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%g", x);
    return buf;
}

}  // namespace detail

// Checks every stated invariant; violations are data, not failures. The
// report is a pure function of the inputs.
inline ValidationReport validate_spec(const MicrogridSpec& spec, const DmoSchedule& dmo) {
    using detail::num;
    using detail::require;
    std::vector<Violation> v;

    const TimeGrid& g = spec.time_grid;
    require(v, g.n_hours >= 1, "", "time_grid.n_hours", "must be >= 1");
    require(v, g.subperiods_per_hour >= 1, "", "time_grid.subperiods_per_hour", "must be >= 1");
    const bool grid_ok = g.n_hours >= 1 && g.subperiods_per_hour >= 1;

    std::unordered_set<std::string> ids;
    auto check_unique = [&](const std::string& id) {
        if (!ids.insert(id).second)
            v.push_back({id, "id", "duplicate asset id"});
    };

    for (const auto& u : spec.dispatchable_units) {
        check_unique(u.id);
        require(v, u.p_min >= 0.0, u.id, "p_min", "must be >= 0");
        require(v, u.p_min <= u.p_max, u.id, "p_min",
                "p_min <= p_max violated (" + num(u.p_min) + " > " + num(u.p_max) + ")");
        require(v, u.ramp_up >= 0.0, u.id, "ramp_up", "must be >= 0");
        require(v, u.ramp_down >= 0.0, u.id, "ramp_down", "must be >= 0");
        require(v, u.min_up >= 0, u.id, "min_up", "must be >= 0");
        require(v, u.min_down >= 0, u.id, "min_down", "must be >= 0");
        require(v, !u.cost_segments.empty(), u.id, "cost_segments", "at least one segment required");
        double prev_bp = 0.0, prev_rate = -1.0;
        for (std::size_t k = 0; k < u.cost_segments.size(); ++k) {
            const auto& s = u.cost_segments[k];
            require(v, s.breakpoint_kw > prev_bp, u.id, "cost_segments",
                    "breakpoints must be strictly increasing");
            require(v, s.rate >= prev_rate, u.id, "cost_segments",
                    "segment rates must be non-decreasing (convexity)");
            prev_bp = s.breakpoint_kw;
            prev_rate = s.rate;
        }
        if (!u.cost_segments.empty())
            require(v, u.cost_segments.back().breakpoint_kw >= u.p_max, u.id, "cost_segments",
                    "last breakpoint must cover p_max");
        require(v, u.no_load_cost >= 0.0, u.id, "no_load_cost", "must be >= 0");
        require(v, u.startup_cost >= 0.0, u.id, "startup_cost", "must be >= 0");
        require(v, u.shutdown_cost >= 0.0, u.id, "shutdown_cost", "must be >= 0");
        require(v, u.init_on_hours >= 0, u.id, "init_on_hours", "must be >= 0");
        require(v, u.init_off_hours >= 0, u.id, "init_off_hours", "must be >= 0");
        if (u.init_committed)
            require(v, u.init_power >= u.p_min && u.init_power <= u.p_max, u.id, "init_power",
                    "must lie in [p_min, p_max] when init_committed");
    }

    for (const auto& b : spec.storage_units) {
        check_unique(b.id);
        require(v, b.p_ch_min >= 0.0 && b.p_ch_min <= b.p_ch_max, b.id, "p_ch_min",
                "0 <= p_ch_min <= p_ch_max violated");
        require(v, b.p_dch_min >= 0.0 && b.p_dch_min <= b.p_dch_max, b.id, "p_dch_min",
                "0 <= p_dch_min <= p_dch_max violated");
        require(v, b.c_init >= 0.0 && b.c_init <= b.c_max, b.id, "c_init",
                "must lie in [0, c_max]");
        require(v, b.min_charge_time >= 0, b.id, "min_charge_time", "must be >= 0");
        require(v, b.min_discharge_time >= 0, b.id, "min_discharge_time", "must be >= 0");
        require(v, b.efficiency > 0.0 && b.efficiency <= 1.0, b.id, "efficiency",
                "must lie in (0, 1]");
        require(v, b.init_mode_hours >= 0, b.id, "init_mode_hours", "must be >= 0");
    }

    auto check_profile = [&](const std::string& id, const std::vector<double>& p) {
        if (grid_ok)
            require(v, static_cast<int>(p.size()) == g.n_points(), id, "forecast",
                    "profile length must equal n_hours * subperiods_per_hour");
        for (double x : p) {
            if (!(detail::finite(x) && x >= 0.0)) {
                v.push_back({id, "forecast", "all values must be finite and >= 0"});
                break;
            }
        }
    };
    for (const auto& r : spec.nondispatchable_units) {
        check_unique(r.id);
        check_profile(r.id, r.forecast);
    }
    for (const auto& l : spec.fixed_loads) {
        check_unique(l.id);
        check_profile(l.id, l.forecast);
    }

    for (const auto& d : spec.adjustable_loads) {
        check_unique(d.id);
        require(v, d.d_min >= 0.0 && d.d_min <= d.d_max, d.id, "d_min",
                "0 <= d_min <= d_max violated");
        const bool window_ok = 0 <= d.window_start && d.window_start <= d.window_end &&
                               (!grid_ok || d.window_end < g.n_hours);
        require(v, window_ok, d.id, "window_start", "0 <= window_start <= window_end < n_hours");
        if (window_ok) {
            const double hours = static_cast<double>(d.window_end - d.window_start + 1);
            require(v, d.energy_required >= d.d_min * hours, d.id, "energy_required",
                    "E >= d_min x window violated");
            require(v, d.energy_required <= d.d_max * hours, d.id, "energy_required",
                    "E <= d_max x window violated (" + num(d.energy_required) + " > " +
                        num(d.d_max * hours) + ")");
        }
        require(v, d.min_operating_time >= 0, d.id, "min_operating_time", "must be >= 0");
    }

    require(v, spec.voll >= 0.0, "", "voll", "must be >= 0");

    require(v, dmo.p_m_max > 0.0, "", "dmo_schedule.p_m_max", "must be > 0");
    require(v, dmo.penalty >= 0.0, "", "dmo_schedule.penalty", "must be >= 0");
    if (grid_ok)
        require(v, static_cast<int>(dmo.p_sched.size()) == g.n_hours, "", "dmo_schedule.p_sched",
                "length must equal n_hours");
    for (std::size_t t = 0; t < dmo.p_sched.size(); ++t)
        require(v, std::abs(dmo.p_sched[t]) <= dmo.p_m_max, "", "dmo_schedule.p_sched",
                "|p_sched[" + std::to_string(t) + "]| must be <= p_m_max");

    return ValidationReport{std::move(v)};
}

}  // namespace mgsched
