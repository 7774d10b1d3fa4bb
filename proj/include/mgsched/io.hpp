// SPDX-License-Identifier: Apache-2.0
#pragma once

// JSON (de)serialization for instance documents and scenario sets.
//
// An instance document has eight top-level keys: time_grid,
// dispatchable_units, storage_units, nondispatchable_units, fixed_loads,
// adjustable_loads, voll, dmo_schedule. Field names mirror the domain structs
// one-to-one with two conveniences:
//   * ramp_up / ramp_down are given in kW per hour and divided by
//     subperiods_per_hour on load (120 kW/h at 6 sub-periods stores 20),
//   * forecast arrays may have length n_hours instead of n_points, in which
//     case each hourly value is replicated across the hour's sub-periods.
// Parse errors carry the JSON path of the offending field.

#include <cstdint>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mgsched/domain.hpp"
#include "mgsched/scenario.hpp"

namespace mgsched {

struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

struct Instance {
    MicrogridSpec spec;
    DmoSchedule dmo;
};

namespace io_detail {

using nlohmann::json;

[[noreturn]] inline void fail(const std::string& path, const std::string& why) {
    throw ParseError(path + ": " + why);
}

inline const json& member(const json& j, const std::string& path, const char* key) {
    if (!j.is_object()) fail(path, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) fail(path + "." + key, "missing required field");
    return *it;
}

// voll may be infinite; JSON has no literal for it, so the string "inf" is
// accepted and emitted in its place.
inline double as_number(const json& j, const std::string& path) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string() && (j.get<std::string>() == "inf" || j.get<std::string>() == "+inf"))
        return std::numeric_limits<double>::infinity();
    fail(path, "expected a number");
}

inline double num(const json& j, const std::string& path, const char* key) {
    return as_number(member(j, path, key), path + "." + key);
}

inline double num_or(const json& j, const std::string& path, const char* key, double fallback) {
    if (!j.is_object()) fail(path, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) return fallback;
    return as_number(*it, path + "." + key);
}

inline int integer(const json& j, const std::string& path, const char* key) {
    const json& v = member(j, path, key);
    if (!v.is_number_integer()) fail(path + "." + key, "expected an integer");
    return v.get<int>();
}

inline int integer_or(const json& j, const std::string& path, const char* key, int fallback) {
    if (!j.is_object()) fail(path, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) return fallback;
    if (!it->is_number_integer()) fail(path + "." + key, "expected an integer");
    return it->get<int>();
}

inline bool boolean_or(const json& j, const std::string& path, const char* key, bool fallback) {
    if (!j.is_object()) fail(path, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) return fallback;
    if (!it->is_boolean()) fail(path + "." + key, "expected a boolean");
    return it->get<bool>();
}

inline std::string text(const json& j, const std::string& path, const char* key) {
    const json& v = member(j, path, key);
    if (!v.is_string()) fail(path + "." + key, "expected a string");
    return v.get<std::string>();
}

inline std::vector<double> num_array(const json& j, const std::string& path) {
    if (!j.is_array()) fail(path, "expected an array of numbers");
    std::vector<double> out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i)
        out.push_back(as_number(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

// Accepts length n_points as-is; length n_hours is replicated K times per hour.
inline std::vector<double> profile(const json& j, const std::string& path, const TimeGrid& g) {
    std::vector<double> raw = num_array(j, path);
    const std::size_t np = static_cast<std::size_t>(g.n_points());
    const std::size_t nh = static_cast<std::size_t>(g.n_hours);
    if (raw.size() == np) return raw;
    if (raw.size() == nh) {
        std::vector<double> out;
        out.reserve(np);
        for (double v : raw)
            for (int k = 0; k < g.subperiods_per_hour; ++k) out.push_back(v);
        return out;
    }
    fail(path, "expected " + std::to_string(np) + " (per sub-period) or " +
                   std::to_string(nh) + " (per hour) values, got " + std::to_string(raw.size()));
}

inline StorageMode mode_from_text(const std::string& v, const std::string& path) {
    if (v == "charging") return StorageMode::Charging;
    if (v == "discharging") return StorageMode::Discharging;
    if (v == "idle") return StorageMode::Idle;
    fail(path, "expected one of charging, discharging, idle");
}

inline const char* mode_to_text(StorageMode m) {
    switch (m) {
        case StorageMode::Charging: return "charging";
        case StorageMode::Discharging: return "discharging";
        default: return "idle";
    }
}

inline json number_or_inf(double v) {
    if (std::isfinite(v)) return json(v);
    return json("inf");
}

}  // namespace io_detail

inline Instance instance_from_json(const nlohmann::json& doc) {
    using namespace io_detail;
    Instance inst;

    const json& jg = member(doc, "$", "time_grid");
    inst.spec.time_grid.n_hours = integer(jg, "$.time_grid", "n_hours");
    inst.spec.time_grid.subperiods_per_hour = integer(jg, "$.time_grid", "subperiods_per_hour");
    const TimeGrid& g = inst.spec.time_grid;
    if (g.n_hours < 1 || g.subperiods_per_hour < 1)
        fail("$.time_grid", "n_hours and subperiods_per_hour must be at least 1");
    const double k = static_cast<double>(g.subperiods_per_hour);

    const json& jus = member(doc, "$", "dispatchable_units");
    if (!jus.is_array()) fail("$.dispatchable_units", "expected an array");
    for (std::size_t i = 0; i < jus.size(); ++i) {
        const std::string p = "$.dispatchable_units[" + std::to_string(i) + "]";
        const json& ju = jus[i];
        DispatchableUnit u;
        u.id = text(ju, p, "id");
        u.p_min = num(ju, p, "p_min");
        u.p_max = num(ju, p, "p_max");
        u.ramp_up = num(ju, p, "ramp_up") / k;
        u.ramp_down = num(ju, p, "ramp_down") / k;
        u.min_up = integer_or(ju, p, "min_up", 0);
        u.min_down = integer_or(ju, p, "min_down", 0);
        const json& segs = member(ju, p, "cost_segments");
        if (!segs.is_array()) fail(p + ".cost_segments", "expected an array");
        for (std::size_t s = 0; s < segs.size(); ++s) {
            const std::string sp = p + ".cost_segments[" + std::to_string(s) + "]";
            CostSegment seg;
            seg.breakpoint_kw = num(segs[s], sp, "breakpoint_kw");
            seg.rate = num(segs[s], sp, "rate");
            u.cost_segments.push_back(seg);
        }
        u.no_load_cost = num_or(ju, p, "no_load_cost", 0.0);
        u.startup_cost = num_or(ju, p, "startup_cost", 0.0);
        u.shutdown_cost = num_or(ju, p, "shutdown_cost", 0.0);
        u.init_committed = boolean_or(ju, p, "init_committed", false);
        u.init_on_hours = integer_or(ju, p, "init_on_hours", 0);
        u.init_off_hours = integer_or(ju, p, "init_off_hours", 0);
        u.init_power = num_or(ju, p, "init_power", 0.0);
        inst.spec.dispatchable_units.push_back(std::move(u));
    }

    const json& jbs = member(doc, "$", "storage_units");
    if (!jbs.is_array()) fail("$.storage_units", "expected an array");
    for (std::size_t i = 0; i < jbs.size(); ++i) {
        const std::string p = "$.storage_units[" + std::to_string(i) + "]";
        const json& jb = jbs[i];
        StorageUnit b;
        b.id = text(jb, p, "id");
        b.p_ch_min = num_or(jb, p, "p_ch_min", 0.0);
        b.p_ch_max = num(jb, p, "p_ch_max");
        b.p_dch_min = num_or(jb, p, "p_dch_min", 0.0);
        b.p_dch_max = num(jb, p, "p_dch_max");
        b.c_max = num(jb, p, "c_max");
        b.c_init = num_or(jb, p, "c_init", b.c_max / 2.0);
        b.min_charge_time = integer_or(jb, p, "min_charge_time", 0);
        b.min_discharge_time = integer_or(jb, p, "min_discharge_time", 0);
        b.efficiency = num_or(jb, p, "efficiency", 1.0);
        if (jb.contains("init_mode"))
            b.init_mode = mode_from_text(text(jb, p, "init_mode"), p + ".init_mode");
        b.init_mode_hours = integer_or(jb, p, "init_mode_hours", 0);
        inst.spec.storage_units.push_back(std::move(b));
    }

    const json& jws = member(doc, "$", "nondispatchable_units");
    if (!jws.is_array()) fail("$.nondispatchable_units", "expected an array");
    for (std::size_t i = 0; i < jws.size(); ++i) {
        const std::string p = "$.nondispatchable_units[" + std::to_string(i) + "]";
        NondispatchableUnit w;
        w.id = text(jws[i], p, "id");
        w.forecast = profile(member(jws[i], p, "forecast"), p + ".forecast", g);
        inst.spec.nondispatchable_units.push_back(std::move(w));
    }

    const json& jls = member(doc, "$", "fixed_loads");
    if (!jls.is_array()) fail("$.fixed_loads", "expected an array");
    for (std::size_t i = 0; i < jls.size(); ++i) {
        const std::string p = "$.fixed_loads[" + std::to_string(i) + "]";
        FixedLoad l;
        l.id = text(jls[i], p, "id");
        l.forecast = profile(member(jls[i], p, "forecast"), p + ".forecast", g);
        inst.spec.fixed_loads.push_back(std::move(l));
    }

    const json& jds = member(doc, "$", "adjustable_loads");
    if (!jds.is_array()) fail("$.adjustable_loads", "expected an array");
    for (std::size_t i = 0; i < jds.size(); ++i) {
        const std::string p = "$.adjustable_loads[" + std::to_string(i) + "]";
        const json& jd = jds[i];
        AdjustableLoad d;
        d.id = text(jd, p, "id");
        d.d_min = num_or(jd, p, "d_min", 0.0);
        d.d_max = num(jd, p, "d_max");
        d.energy_required = num(jd, p, "energy_required");
        d.window_start = integer(jd, p, "window_start");
        d.window_end = integer(jd, p, "window_end");
        d.min_operating_time = integer_or(jd, p, "min_operating_time", 0);
        inst.spec.adjustable_loads.push_back(std::move(d));
    }

    inst.spec.voll = num(doc, "$", "voll");

    const json& jm = member(doc, "$", "dmo_schedule");
    inst.dmo.p_sched = num_array(member(jm, "$.dmo_schedule", "p_sched"), "$.dmo_schedule.p_sched");
    inst.dmo.p_m_max = num(jm, "$.dmo_schedule", "p_m_max");
    inst.dmo.penalty = num(jm, "$.dmo_schedule", "penalty");

    return inst;
}

inline Instance load_instance(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open file");
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path + ": " + e.what());
    }
    try {
        return instance_from_json(doc);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

inline nlohmann::json instance_to_json(const MicrogridSpec& spec, const DmoSchedule& dmo) {
    using io_detail::json;
    using io_detail::number_or_inf;
    const double k = static_cast<double>(spec.time_grid.subperiods_per_hour);
    json doc;
    doc["time_grid"] = {{"n_hours", spec.time_grid.n_hours},
                        {"subperiods_per_hour", spec.time_grid.subperiods_per_hour}};
    doc["dispatchable_units"] = json::array();
    for (const auto& u : spec.dispatchable_units) {
        json ju;
        ju["id"] = u.id;
        ju["p_min"] = u.p_min;
        ju["p_max"] = u.p_max;
        ju["ramp_up"] = u.ramp_up * k;
        ju["ramp_down"] = u.ramp_down * k;
        ju["min_up"] = u.min_up;
        ju["min_down"] = u.min_down;
        ju["cost_segments"] = json::array();
        for (const auto& s : u.cost_segments)
            ju["cost_segments"].push_back({{"breakpoint_kw", s.breakpoint_kw}, {"rate", s.rate}});
        ju["no_load_cost"] = u.no_load_cost;
        ju["startup_cost"] = u.startup_cost;
        ju["shutdown_cost"] = u.shutdown_cost;
        ju["init_committed"] = u.init_committed;
        ju["init_on_hours"] = u.init_on_hours;
        ju["init_off_hours"] = u.init_off_hours;
        ju["init_power"] = u.init_power;
        doc["dispatchable_units"].push_back(std::move(ju));
    }
    doc["storage_units"] = json::array();
    for (const auto& b : spec.storage_units) {
        json jb;
        jb["id"] = b.id;
        jb["p_ch_min"] = b.p_ch_min;
        jb["p_ch_max"] = b.p_ch_max;
        jb["p_dch_min"] = b.p_dch_min;
        jb["p_dch_max"] = b.p_dch_max;
        jb["c_max"] = b.c_max;
        jb["c_init"] = b.c_init;
        jb["min_charge_time"] = b.min_charge_time;
        jb["min_discharge_time"] = b.min_discharge_time;
        jb["efficiency"] = b.efficiency;
        jb["init_mode"] = io_detail::mode_to_text(b.init_mode);
        jb["init_mode_hours"] = b.init_mode_hours;
        doc["storage_units"].push_back(std::move(jb));
    }
    doc["nondispatchable_units"] = json::array();
    for (const auto& w : spec.nondispatchable_units)
        doc["nondispatchable_units"].push_back({{"id", w.id}, {"forecast", w.forecast}});
    doc["fixed_loads"] = json::array();
    for (const auto& l : spec.fixed_loads)
        doc["fixed_loads"].push_back({{"id", l.id}, {"forecast", l.forecast}});
    doc["adjustable_loads"] = json::array();
    for (const auto& d : spec.adjustable_loads) {
        json jd;
        jd["id"] = d.id;
        jd["d_min"] = d.d_min;
        jd["d_max"] = d.d_max;
        jd["energy_required"] = d.energy_required;
        jd["window_start"] = d.window_start;
        jd["window_end"] = d.window_end;
        jd["min_operating_time"] = d.min_operating_time;
        doc["adjustable_loads"].push_back(std::move(jd));
    }
    doc["voll"] = number_or_inf(spec.voll);
    doc["dmo_schedule"] = {{"p_sched", dmo.p_sched},
                           {"p_m_max", dmo.p_m_max},
                           {"penalty", dmo.penalty}};
    return doc;
}

inline void save_instance(const MicrogridSpec& spec, const DmoSchedule& dmo,
                          const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError(path + ": cannot open file for writing");
    out << instance_to_json(spec, dmo).dump(2) << "\n";
}

inline nlohmann::json scenario_set_to_json(const ScenarioSet& set) {
    using io_detail::json;
    json doc;
    doc["scenarios"] = json::array();
    for (const auto& s : set.scenarios) {
        json js;
        js["id"] = s.id;
        js["probability"] = s.probability;
        js["renewable_profiles"] = s.renewable_profiles;
        js["load_profiles"] = s.load_profiles;
        json isl = json::array();
        for (auto v : s.islanding) isl.push_back(static_cast<int>(v));
        js["islanding"] = std::move(isl);
        doc["scenarios"].push_back(std::move(js));
    }
    return doc;
}

inline ScenarioSet scenario_set_from_json(const nlohmann::json& doc) {
    using namespace io_detail;
    ScenarioSet set;
    const json& js = member(doc, "$", "scenarios");
    if (!js.is_array()) fail("$.scenarios", "expected an array");
    for (std::size_t i = 0; i < js.size(); ++i) {
        const std::string p = "$.scenarios[" + std::to_string(i) + "]";
        const json& j = js[i];
        Scenario s;
        s.id = text(j, p, "id");
        s.probability = num(j, p, "probability");
        const json& jr = member(j, p, "renewable_profiles");
        if (!jr.is_array()) fail(p + ".renewable_profiles", "expected an array");
        for (std::size_t r = 0; r < jr.size(); ++r)
            s.renewable_profiles.push_back(
                num_array(jr[r], p + ".renewable_profiles[" + std::to_string(r) + "]"));
        const json& jl = member(j, p, "load_profiles");
        if (!jl.is_array()) fail(p + ".load_profiles", "expected an array");
        for (std::size_t r = 0; r < jl.size(); ++r)
            s.load_profiles.push_back(
                num_array(jl[r], p + ".load_profiles[" + std::to_string(r) + "]"));
        for (double v : num_array(member(j, p, "islanding"), p + ".islanding"))
            s.islanding.push_back(v != 0.0 ? 1 : 0);
        set.scenarios.push_back(std::move(s));
    }
    return set;
}

// FNV-1a, used to stamp run manifests with a digest of the effective config.
inline std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : data) {
        h ^= static_cast<std::uint64_t>(c);
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    std::ostringstream os;
    os << std::hex;
    os.width(16);
    os.fill('0');
    os << v;
    return os.str();
}

}  // namespace mgsched
