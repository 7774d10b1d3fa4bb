// SPDX-License-Identifier: Apache-2.0
#pragma once

// Two-stage scheduling model builder. First stage: hourly unit commitment,
// storage mode selection, adjustable-load on/off, startup/shutdown events and
// the per-scenario deviation sign. Second stage: sub-hourly dispatch, storage
// energy, grid transfer, curtailment and deviation per scenario. Column and
// row layout is a pure function of (spec, dmo, scenarios): family-major
// blocks in a fixed order so identical inputs give identical models.
//
// Naming scheme (LP-safe, index based): entity indices are positions in the
// spec lists, t is the hour, p the sub-period, s the scenario. Examples:
// I_g0_t3, PB_b1_t0_p2_s4, DELTA_t7_s0.

#include <cassert>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "mgsched/domain.hpp"
#include "mgsched/milp.hpp"
#include "mgsched/scenario.hpp"

namespace mgsched {

enum class VarFamily : std::uint8_t {
    Commit,             // I: unit committed in hour t
    Startup,            // SU: commitment rises at t (continuous, forced 0/1)
    Shutdown,           // SD: commitment falls at t
    DischargeMode,      // U: storage discharging in hour t
    ChargeMode,         // V: storage charging in hour t
    LoadOn,             // Z: adjustable load operating in hour t
    DeviationSign,      // DELTA: deviation is positive at (t, s)
    GenPower,           // P: dispatchable output, kW
    GenSegment,         // SEG: piecewise cost segment fill, kW
    StoragePower,       // PB: net storage injection, kW (charging negative)
    StorageEnergy,      // CB: stored energy, kWh
    StorageDischarge,   // PD: discharge split, kW (lossy storage only)
    StorageCharge,      // PC: charge split, kW (lossy storage only)
    GridPower,          // PM: main-grid transfer, kW (import positive)
    Curtailment,        // LS: load shed, kW
    Deviation,          // DP: PM minus the scheduled transfer, kW
    DeviationPositive,  // DPP: positive part of DP, kW
    LoadPower,          // D: adjustable-load consumption, kW
};

struct VarKey {
    VarFamily family = VarFamily::Commit;
    int entity = -1;     // index into the owning spec list; -1 for system-wide
    int segment = -1;    // GenSegment only
    int hour = -1;
    int subperiod = -1;  // -1 for hourly (first-stage) variables
    int scenario = -1;   // -1 for scenario-independent variables

    bool operator==(const VarKey&) const = default;
};

// Column lookup in both directions. Accessors assert on range; key_of is the
// exact inverse of the typed getters.
class VariableIndex {
public:
    int n_units = 0, n_storage = 0, n_adjustable = 0;
    int n_hours = 0, n_subperiods = 0, n_scenarios = 0;
    std::vector<int> segment_counts;     // 0 = cost carried on GenPower directly
    std::vector<bool> storage_split;     // true = lossy, PD/PC columns exist

    int commit(int i, int t) const { return commit_[ut(i, t)]; }
    int startup(int i, int t) const { return startup_[ut(i, t)]; }
    int shutdown(int i, int t) const { return shutdown_[ut(i, t)]; }
    int discharge_mode(int b, int t) const { return dch_mode_[bt(b, t)]; }
    int charge_mode(int b, int t) const { return ch_mode_[bt(b, t)]; }
    int load_on(int d, int t) const { return load_on_[dt(d, t)]; }
    int deviation_sign(int t, int s) const { return dev_sign_[ts(t, s)]; }
    int gen_power(int i, int t, int tau, int s) const { return gen_power_[utks(i, t, tau, s)]; }
    int gen_segment(int i, int k, int t, int tau, int s) const {
        assert(k >= 0 && k < segment_counts[static_cast<std::size_t>(i)]);
        return gen_segment_[static_cast<std::size_t>(i)]
                           [static_cast<std::size_t>(((k * n_hours + t) * n_subperiods + tau) *
                                                     n_scenarios + s)];
    }
    int storage_power(int b, int t, int tau, int s) const { return sto_power_[btks(b, t, tau, s)]; }
    int storage_energy(int b, int t, int tau, int s) const { return sto_energy_[btks(b, t, tau, s)]; }
    int storage_discharge(int b, int t, int tau, int s) const {
        assert(storage_split[static_cast<std::size_t>(b)]);
        return sto_dch_[static_cast<std::size_t>(b)][tks_local(t, tau, s)];
    }
    int storage_charge(int b, int t, int tau, int s) const {
        assert(storage_split[static_cast<std::size_t>(b)]);
        return sto_ch_[static_cast<std::size_t>(b)][tks_local(t, tau, s)];
    }
    int grid_power(int t, int tau, int s) const { return grid_[tks(t, tau, s)]; }
    int curtailment(int t, int tau, int s) const { return curtail_[tks(t, tau, s)]; }
    int deviation(int t, int tau, int s) const { return dev_[tks(t, tau, s)]; }
    int deviation_positive(int t, int tau, int s) const { return dev_pos_[tks(t, tau, s)]; }
    int load_power(int d, int t, int tau, int s) const { return load_power_[dtks(d, t, tau, s)]; }

    int n_columns() const { return static_cast<int>(keys_.size()); }
    const VarKey& key_of(int column) const { return keys_[static_cast<std::size_t>(column)]; }

private:
    friend struct FormulationBuilder;
    std::vector<int> commit_, startup_, shutdown_;
    std::vector<int> dch_mode_, ch_mode_;
    std::vector<int> load_on_;
    std::vector<int> dev_sign_;
    std::vector<int> gen_power_;
    std::vector<std::vector<int>> gen_segment_;
    std::vector<int> sto_power_, sto_energy_;
    std::vector<std::vector<int>> sto_dch_, sto_ch_;
    std::vector<int> grid_, curtail_, dev_, dev_pos_;
    std::vector<int> load_power_;
    std::vector<VarKey> keys_;

    std::size_t ut(int i, int t) const {
        assert(i >= 0 && i < n_units && t >= 0 && t < n_hours);
        return static_cast<std::size_t>(i * n_hours + t);
    }
    std::size_t bt(int b, int t) const {
        assert(b >= 0 && b < n_storage && t >= 0 && t < n_hours);
        return static_cast<std::size_t>(b * n_hours + t);
    }
    std::size_t dt(int d, int t) const {
        assert(d >= 0 && d < n_adjustable && t >= 0 && t < n_hours);
        return static_cast<std::size_t>(d * n_hours + t);
    }
    std::size_t ts(int t, int s) const {
        assert(t >= 0 && t < n_hours && s >= 0 && s < n_scenarios);
        return static_cast<std::size_t>(t * n_scenarios + s);
    }
    std::size_t tks_local(int t, int tau, int s) const {
        assert(t >= 0 && t < n_hours && tau >= 0 && tau < n_subperiods);
        assert(s >= 0 && s < n_scenarios);
        return static_cast<std::size_t>((t * n_subperiods + tau) * n_scenarios + s);
    }
    std::size_t tks(int t, int tau, int s) const { return tks_local(t, tau, s); }
    std::size_t utks(int i, int t, int tau, int s) const {
        assert(i >= 0 && i < n_units);
        return static_cast<std::size_t>(i) * static_cast<std::size_t>(n_hours) *
                   static_cast<std::size_t>(n_subperiods) * static_cast<std::size_t>(n_scenarios) +
               tks_local(t, tau, s);
    }
    std::size_t btks(int b, int t, int tau, int s) const {
        assert(b >= 0 && b < n_storage);
        return static_cast<std::size_t>(b) * static_cast<std::size_t>(n_hours) *
                   static_cast<std::size_t>(n_subperiods) * static_cast<std::size_t>(n_scenarios) +
               tks_local(t, tau, s);
    }
    std::size_t dtks(int d, int t, int tau, int s) const {
        assert(d >= 0 && d < n_adjustable);
        return static_cast<std::size_t>(d) * static_cast<std::size_t>(n_hours) *
                   static_cast<std::size_t>(n_subperiods) * static_cast<std::size_t>(n_scenarios) +
               tks_local(t, tau, s);
    }
};

struct BuiltModel {
    MilpModel model;
    VariableIndex index;
};

namespace form_detail {

// Accumulates row entries, merging repeated columns (window rows touch the
// same commitment column twice) and dropping exact zeros on emission.
class RowBuilder {
public:
    void add(int column, double coeff) {
        for (auto& e : entries_)
            if (e.column == column) {
                e.coeff += coeff;
                return;
            }
        entries_.push_back({column, coeff});
    }
    std::vector<RowEntry> take() {
        std::vector<RowEntry> out;
        out.reserve(entries_.size());
        for (const auto& e : entries_)
            if (e.coeff != 0.0) out.push_back(e);
        entries_.clear();
        return out;
    }

private:
    std::vector<RowEntry> entries_;
};

inline std::string tag(const char* stem, int t) { return std::string(stem) + "_t" + std::to_string(t); }

}  // namespace form_detail

struct FormulationBuilder {
    static BuiltModel build(const MicrogridSpec& spec, const DmoSchedule& dmo,
                            const ScenarioSet& set) {
        const TimeGrid& g = spec.time_grid;
        const int T = g.n_hours;
        const int K = g.subperiods_per_hour;
        const int S = static_cast<int>(set.scenarios.size());
        const double dt = g.delta_tau();
        const double M = dmo.p_m_max;

        if (S == 0) throw std::invalid_argument("build_model: scenario set is empty");
        if (static_cast<int>(dmo.p_sched.size()) != T)
            throw std::invalid_argument("build_model: dmo schedule has " +
                                        std::to_string(dmo.p_sched.size()) + " hours, grid has " +
                                        std::to_string(T));
        for (int s = 0; s < S; ++s) {
            const Scenario& sc = set.scenarios[s];
            if (sc.renewable_profiles.size() != spec.nondispatchable_units.size() ||
                sc.load_profiles.size() != spec.fixed_loads.size() ||
                static_cast<int>(sc.islanding.size()) != g.n_points())
                throw std::invalid_argument("build_model: scenario " + std::to_string(s) +
                                            " does not match the spec layout");
            for (const auto& p : sc.renewable_profiles)
                if (static_cast<int>(p.size()) != g.n_points())
                    throw std::invalid_argument("build_model: scenario " + std::to_string(s) +
                                                " renewable profile length mismatch");
            for (const auto& p : sc.load_profiles)
                if (static_cast<int>(p.size()) != g.n_points())
                    throw std::invalid_argument("build_model: scenario " + std::to_string(s) +
                                                " load profile length mismatch");
        }

        const int G = static_cast<int>(spec.dispatchable_units.size());
        const int B = static_cast<int>(spec.storage_units.size());
        const int Dn = static_cast<int>(spec.adjustable_loads.size());
        const bool shed_allowed = std::isfinite(spec.voll);

        BuiltModel out;
        MilpModel& m = out.model;
        VariableIndex& ix = out.index;
        ix.n_units = G;
        ix.n_storage = B;
        ix.n_adjustable = Dn;
        ix.n_hours = T;
        ix.n_subperiods = K;
        ix.n_scenarios = S;

        auto push = [&](std::vector<int>& slot, VarKey key, std::string name, VarKind kind,
                        double lo, double hi, double obj) {
            int col = m.add_variable(std::move(name), kind, lo, hi, obj);
            slot.push_back(col);
            ix.keys_.push_back(key);
            return col;
        };

        // ---- first-stage columns -------------------------------------------
        for (int i = 0; i < G; ++i) {
            const auto& u = spec.dispatchable_units[i];
            // Hours still pinned by the initial minimum-up/down obligation.
            int pin_on = u.init_committed ? std::min(T, std::max(0, u.min_up - u.init_on_hours)) : 0;
            int pin_off =
                !u.init_committed ? std::min(T, std::max(0, u.min_down - u.init_off_hours)) : 0;
            for (int t = 0; t < T; ++t) {
                double lo = t < pin_on ? 1.0 : 0.0;
                double hi = t < pin_off ? 0.0 : 1.0;
                push(ix.commit_, {VarFamily::Commit, i, -1, t, -1, -1},
                     "I_g" + std::to_string(i) + "_t" + std::to_string(t), VarKind::Binary, lo, hi,
                     u.no_load_cost);
            }
        }
        for (int i = 0; i < G; ++i)
            for (int t = 0; t < T; ++t)
                push(ix.startup_, {VarFamily::Startup, i, -1, t, -1, -1},
                     "SU_g" + std::to_string(i) + "_t" + std::to_string(t), VarKind::Continuous,
                     0.0, 1.0, spec.dispatchable_units[i].startup_cost);
        for (int i = 0; i < G; ++i)
            for (int t = 0; t < T; ++t)
                push(ix.shutdown_, {VarFamily::Shutdown, i, -1, t, -1, -1},
                     "SD_g" + std::to_string(i) + "_t" + std::to_string(t), VarKind::Continuous,
                     0.0, 1.0, spec.dispatchable_units[i].shutdown_cost);
        for (int b = 0; b < B; ++b) {
            const auto& st = spec.storage_units[b];
            int pin = st.init_mode == StorageMode::Discharging
                          ? std::min(T, std::max(0, st.min_discharge_time - st.init_mode_hours))
                          : 0;
            for (int t = 0; t < T; ++t)
                push(ix.dch_mode_, {VarFamily::DischargeMode, b, -1, t, -1, -1},
                     "U_b" + std::to_string(b) + "_t" + std::to_string(t), VarKind::Binary,
                     t < pin ? 1.0 : 0.0, 1.0, 0.0);
        }
        for (int b = 0; b < B; ++b) {
            const auto& st = spec.storage_units[b];
            int pin = st.init_mode == StorageMode::Charging
                          ? std::min(T, std::max(0, st.min_charge_time - st.init_mode_hours))
                          : 0;
            for (int t = 0; t < T; ++t)
                push(ix.ch_mode_, {VarFamily::ChargeMode, b, -1, t, -1, -1},
                     "V_b" + std::to_string(b) + "_t" + std::to_string(t), VarKind::Binary,
                     t < pin ? 1.0 : 0.0, 1.0, 0.0);
        }
        for (int d = 0; d < Dn; ++d) {
            const auto& load = spec.adjustable_loads[d];
            for (int t = 0; t < T; ++t) {
                bool inside = t >= load.window_start && t <= load.window_end;
                push(ix.load_on_, {VarFamily::LoadOn, d, -1, t, -1, -1},
                     "Z_d" + std::to_string(d) + "_t" + std::to_string(t), VarKind::Binary, 0.0,
                     inside ? 1.0 : 0.0, 0.0);
            }
        }
        for (int t = 0; t < T; ++t)
            for (int s = 0; s < S; ++s)
                push(ix.dev_sign_, {VarFamily::DeviationSign, -1, -1, t, -1, s},
                     "DELTA_t" + std::to_string(t) + "_s" + std::to_string(s), VarKind::Binary,
                     0.0, 1.0, 0.0);

        // ---- second-stage columns ------------------------------------------
        auto point_name = [&](const char* stem, int t, int tau, int s) {
            return std::string(stem) + "_t" + std::to_string(t) + "_p" + std::to_string(tau) +
                   "_s" + std::to_string(s);
        };
        for (int i = 0; i < G; ++i) {
            const auto& u = spec.dispatchable_units[i];
            const bool single = u.cost_segments.size() == 1;
            ix.segment_counts.push_back(single ? 0 : static_cast<int>(u.cost_segments.size()));
            for (int t = 0; t < T; ++t)
                for (int tau = 0; tau < K; ++tau)
                    for (int s = 0; s < S; ++s) {
                        double obj = single ? set.scenarios[s].probability * dt *
                                                  u.cost_segments[0].rate
                                            : 0.0;
                        push(ix.gen_power_, {VarFamily::GenPower, i, -1, t, tau, s},
                             "P_g" + std::to_string(i) + point_name("", t, tau, s),
                             VarKind::Continuous, 0.0, u.p_max, obj);
                    }
        }
        ix.gen_segment_.resize(static_cast<std::size_t>(G));
        for (int i = 0; i < G; ++i) {
            const auto& u = spec.dispatchable_units[i];
            if (ix.segment_counts[static_cast<std::size_t>(i)] == 0) continue;
            double prev_bp = 0.0;
            for (int k = 0; k < static_cast<int>(u.cost_segments.size()); ++k) {
                const double width = u.cost_segments[static_cast<std::size_t>(k)].breakpoint_kw -
                                     prev_bp;
                prev_bp = u.cost_segments[static_cast<std::size_t>(k)].breakpoint_kw;
                for (int t = 0; t < T; ++t)
                    for (int tau = 0; tau < K; ++tau)
                        for (int s = 0; s < S; ++s)
                            push(ix.gen_segment_[static_cast<std::size_t>(i)],
                                 {VarFamily::GenSegment, i, k, t, tau, s},
                                 "SEG" + std::to_string(k) + "_g" + std::to_string(i) +
                                     point_name("", t, tau, s),
                                 VarKind::Continuous, 0.0, width,
                                 set.scenarios[s].probability * dt *
                                     u.cost_segments[static_cast<std::size_t>(k)].rate);
            }
        }
        for (int b = 0; b < B; ++b) {
            const auto& st = spec.storage_units[b];
            for (int t = 0; t < T; ++t)
                for (int tau = 0; tau < K; ++tau)
                    for (int s = 0; s < S; ++s)
                        push(ix.sto_power_, {VarFamily::StoragePower, b, -1, t, tau, s},
                             "PB_b" + std::to_string(b) + point_name("", t, tau, s),
                             VarKind::Continuous, -st.p_ch_max, st.p_dch_max, 0.0);
        }
        for (int b = 0; b < B; ++b) {
            const auto& st = spec.storage_units[b];
            for (int t = 0; t < T; ++t)
                for (int tau = 0; tau < K; ++tau)
                    for (int s = 0; s < S; ++s)
                        push(ix.sto_energy_, {VarFamily::StorageEnergy, b, -1, t, tau, s},
                             "CB_b" + std::to_string(b) + point_name("", t, tau, s),
                             VarKind::Continuous, 0.0, st.c_max, 0.0);
        }
        ix.sto_dch_.resize(static_cast<std::size_t>(B));
        ix.sto_ch_.resize(static_cast<std::size_t>(B));
        for (int b = 0; b < B; ++b) {
            const auto& st = spec.storage_units[b];
            ix.storage_split.push_back(st.efficiency < 1.0);
            if (!ix.storage_split.back()) continue;
            for (int t = 0; t < T; ++t)
                for (int tau = 0; tau < K; ++tau)
                    for (int s = 0; s < S; ++s)
                        push(ix.sto_dch_[static_cast<std::size_t>(b)],
                             {VarFamily::StorageDischarge, b, -1, t, tau, s},
                             "PD_b" + std::to_string(b) + point_name("", t, tau, s),
                             VarKind::Continuous, 0.0, st.p_dch_max, 0.0);
            for (int t = 0; t < T; ++t)
                for (int tau = 0; tau < K; ++tau)
                    for (int s = 0; s < S; ++s)
                        push(ix.sto_ch_[static_cast<std::size_t>(b)],
                             {VarFamily::StorageCharge, b, -1, t, tau, s},
                             "PC_b" + std::to_string(b) + point_name("", t, tau, s),
                             VarKind::Continuous, 0.0, st.p_ch_max, 0.0);
        }
        for (int t = 0; t < T; ++t)
            for (int tau = 0; tau < K; ++tau)
                for (int s = 0; s < S; ++s) {
                    // Islanding enters as bounds: a disconnected point pins the
                    // transfer to zero.
                    double cap = set.scenarios[s].islanding[g.point(t, tau)] ? M : 0.0;
                    push(ix.grid_, {VarFamily::GridPower, -1, -1, t, tau, s},
                         point_name("PM", t, tau, s), VarKind::Continuous, -cap, cap, 0.0);
                }
        for (int t = 0; t < T; ++t)
            for (int tau = 0; tau < K; ++tau)
                for (int s = 0; s < S; ++s)
                    push(ix.curtail_, {VarFamily::Curtailment, -1, -1, t, tau, s},
                         point_name("LS", t, tau, s), VarKind::Continuous, 0.0,
                         shed_allowed ? kInf : 0.0,
                         shed_allowed ? set.scenarios[s].probability * dt * spec.voll : 0.0);
        // Exact deviation ranges: the transfer spans [-M, M], so the error
        // against an hour's schedule spans [-(M + sched), M - sched].
        for (int t = 0; t < T; ++t) {
            const double sched = dmo.p_sched[static_cast<std::size_t>(t)];
            for (int tau = 0; tau < K; ++tau)
                for (int s = 0; s < S; ++s)
                    push(ix.dev_, {VarFamily::Deviation, -1, -1, t, tau, s},
                         point_name("DP", t, tau, s), VarKind::Continuous, -(M + sched),
                         M - sched, 0.0);
        }
        for (int t = 0; t < T; ++t) {
            const double dev_up = std::max(0.0, M - dmo.p_sched[static_cast<std::size_t>(t)]);
            for (int tau = 0; tau < K; ++tau)
                for (int s = 0; s < S; ++s)
                    push(ix.dev_pos_, {VarFamily::DeviationPositive, -1, -1, t, tau, s},
                         point_name("DPP", t, tau, s), VarKind::Continuous, 0.0, dev_up,
                         set.scenarios[s].probability * dt * dmo.penalty);
        }
        for (int d = 0; d < Dn; ++d) {
            const auto& load = spec.adjustable_loads[d];
            for (int t = 0; t < T; ++t) {
                bool inside = t >= load.window_start && t <= load.window_end;
                for (int tau = 0; tau < K; ++tau)
                    for (int s = 0; s < S; ++s)
                        push(ix.load_power_, {VarFamily::LoadPower, d, -1, t, tau, s},
                             "D_d" + std::to_string(d) + point_name("", t, tau, s),
                             VarKind::Continuous, 0.0, inside ? load.d_max : 0.0, 0.0);
            }
        }

        // ---- rows -----------------------------------------------------------
        form_detail::RowBuilder row;

        // Power balance at every point of every scenario; renewable output and
        // fixed load are scenario constants on the right-hand side.
        for (int s = 0; s < S; ++s) {
            const Scenario& sc = set.scenarios[s];
            for (int t = 0; t < T; ++t)
                for (int tau = 0; tau < K; ++tau) {
                    const int pt = g.point(t, tau);
                    for (int i = 0; i < G; ++i) row.add(ix.gen_power(i, t, tau, s), 1.0);
                    for (int b = 0; b < B; ++b) row.add(ix.storage_power(b, t, tau, s), 1.0);
                    row.add(ix.grid_power(t, tau, s), 1.0);
                    row.add(ix.curtailment(t, tau, s), 1.0);
                    for (int d = 0; d < Dn; ++d) row.add(ix.load_power(d, t, tau, s), -1.0);
                    double rhs = 0.0;
                    for (const auto& lp : sc.load_profiles) rhs += lp[static_cast<std::size_t>(pt)];
                    for (const auto& rp : sc.renewable_profiles)
                        rhs -= rp[static_cast<std::size_t>(pt)];
                    m.add_constraint(point_name("bal", t, tau, s), row.take(), RowSense::Equal,
                                     rhs);
                }
        }

        // Dispatchable units: output limits tied to commitment, optional
        // piecewise split, and literal sub-period ramps. The first point ramps
        // against the initial operating point (zero when offline).
        for (int i = 0; i < G; ++i) {
            const auto& u = spec.dispatchable_units[i];
            const int nseg = ix.segment_counts[static_cast<std::size_t>(i)];
            for (int s = 0; s < S; ++s)
                for (int t = 0; t < T; ++t)
                    for (int tau = 0; tau < K; ++tau) {
                        row.add(ix.gen_power(i, t, tau, s), 1.0);
                        row.add(ix.commit(i, t), -u.p_max);
                        m.add_constraint("pmax_g" + std::to_string(i) + point_name("", t, tau, s),
                                         row.take(), RowSense::LessEqual, 0.0);
                        if (u.p_min > 0.0) {
                            row.add(ix.gen_power(i, t, tau, s), 1.0);
                            row.add(ix.commit(i, t), -u.p_min);
                            m.add_constraint(
                                "pmin_g" + std::to_string(i) + point_name("", t, tau, s),
                                row.take(), RowSense::GreaterEqual, 0.0);
                        }
                        if (nseg > 0) {
                            row.add(ix.gen_power(i, t, tau, s), 1.0);
                            for (int k = 0; k < nseg; ++k)
                                row.add(ix.gen_segment(i, k, t, tau, s), -1.0);
                            m.add_constraint(
                                "pwl_g" + std::to_string(i) + point_name("", t, tau, s),
                                row.take(), RowSense::Equal, 0.0);
                        }
                    }
            const double init_p = u.init_committed ? u.init_power : 0.0;
            for (int s = 0; s < S; ++s)
                for (int t = 0; t < T; ++t)
                    for (int tau = 0; tau < K; ++tau) {
                        const bool first = t == 0 && tau == 0;
                        const int pt = tau > 0 ? t : t - 1;
                        const int ptau = tau > 0 ? tau - 1 : K - 1;
                        row.add(ix.gen_power(i, t, tau, s), 1.0);
                        if (!first) row.add(ix.gen_power(i, pt, ptau, s), -1.0);
                        m.add_constraint("rup_g" + std::to_string(i) + point_name("", t, tau, s),
                                         row.take(), RowSense::LessEqual,
                                         u.ramp_up + (first ? init_p : 0.0));
                        row.add(ix.gen_power(i, t, tau, s), -1.0);
                        if (!first) row.add(ix.gen_power(i, pt, ptau, s), 1.0);
                        m.add_constraint("rdn_g" + std::to_string(i) + point_name("", t, tau, s),
                                         row.take(), RowSense::LessEqual,
                                         u.ramp_down - (first ? init_p : 0.0));
                    }
        }

        // Commitment logic: startup/shutdown events and minimum up/down
        // windows. A window row at t forces the indicator to hold for
        // min(limit, horizon remainder) hours after a transition.
        for (int i = 0; i < G; ++i) {
            const auto& u = spec.dispatchable_units[i];
            const double init_i = u.init_committed ? 1.0 : 0.0;
            for (int t = 0; t < T; ++t) {
                row.add(ix.startup(i, t), 1.0);
                row.add(ix.shutdown(i, t), -1.0);
                row.add(ix.commit(i, t), -1.0);
                if (t > 0) row.add(ix.commit(i, t - 1), 1.0);
                m.add_constraint("evt_g" + std::to_string(i) + "_t" + std::to_string(t),
                                 row.take(), RowSense::Equal, t == 0 ? -init_i : 0.0);
            }
            for (int t = 0; t < T && u.min_up >= 2; ++t) {
                const int L = std::min(u.min_up, T - t);
                if (L < 2) continue;
                for (int tt = t; tt < t + L; ++tt) row.add(ix.commit(i, tt), 1.0);
                row.add(ix.commit(i, t), -static_cast<double>(L));
                double rhs = 0.0;
                if (t > 0)
                    row.add(ix.commit(i, t - 1), static_cast<double>(L));
                else
                    rhs = -static_cast<double>(L) * init_i;
                m.add_constraint("upwin_g" + std::to_string(i) + "_t" + std::to_string(t),
                                 row.take(), RowSense::GreaterEqual, rhs);
            }
            for (int t = 0; t < T && u.min_down >= 2; ++t) {
                const int L = std::min(u.min_down, T - t);
                if (L < 2) continue;
                for (int tt = t; tt < t + L; ++tt) row.add(ix.commit(i, tt), -1.0);
                row.add(ix.commit(i, t), static_cast<double>(L));
                double rhs = -static_cast<double>(L);
                if (t > 0)
                    row.add(ix.commit(i, t - 1), -static_cast<double>(L));
                else
                    rhs += static_cast<double>(L) * init_i;
                m.add_constraint("dnwin_g" + std::to_string(i) + "_t" + std::to_string(t),
                                 row.take(), RowSense::GreaterEqual, rhs);
            }
        }

        // Storage: mode-dependent power limits, energy bookkeeping from the
        // initial level, one-mode-at-a-time, and minimum charge/discharge
        // windows on the hourly mode indicators.
        for (int b = 0; b < B; ++b) {
            const auto& st = spec.storage_units[b];
            const bool split = ix.storage_split[static_cast<std::size_t>(b)];
            for (int s = 0; s < S; ++s)
                for (int t = 0; t < T; ++t)
                    for (int tau = 0; tau < K; ++tau) {
                        if (split) {
                            row.add(ix.storage_power(b, t, tau, s), 1.0);
                            row.add(ix.storage_discharge(b, t, tau, s), -1.0);
                            row.add(ix.storage_charge(b, t, tau, s), 1.0);
                            m.add_constraint(
                                "sdef_b" + std::to_string(b) + point_name("", t, tau, s),
                                row.take(), RowSense::Equal, 0.0);
                            row.add(ix.storage_discharge(b, t, tau, s), 1.0);
                            row.add(ix.discharge_mode(b, t), -st.p_dch_max);
                            m.add_constraint(
                                "smax_b" + std::to_string(b) + point_name("", t, tau, s),
                                row.take(), RowSense::LessEqual, 0.0);
                            if (st.p_dch_min > 0.0) {
                                row.add(ix.storage_discharge(b, t, tau, s), 1.0);
                                row.add(ix.discharge_mode(b, t), -st.p_dch_min);
                                m.add_constraint(
                                    "smin_b" + std::to_string(b) + point_name("", t, tau, s),
                                    row.take(), RowSense::GreaterEqual, 0.0);
                            }
                            row.add(ix.storage_charge(b, t, tau, s), 1.0);
                            row.add(ix.charge_mode(b, t), -st.p_ch_max);
                            m.add_constraint(
                                "cmax_b" + std::to_string(b) + point_name("", t, tau, s),
                                row.take(), RowSense::LessEqual, 0.0);
                            if (st.p_ch_min > 0.0) {
                                row.add(ix.storage_charge(b, t, tau, s), 1.0);
                                row.add(ix.charge_mode(b, t), -st.p_ch_min);
                                m.add_constraint(
                                    "cmin_b" + std::to_string(b) + point_name("", t, tau, s),
                                    row.take(), RowSense::GreaterEqual, 0.0);
                            }
                        } else {
                            row.add(ix.storage_power(b, t, tau, s), 1.0);
                            row.add(ix.discharge_mode(b, t), -st.p_dch_max);
                            row.add(ix.charge_mode(b, t), st.p_ch_min);
                            m.add_constraint(
                                "smax_b" + std::to_string(b) + point_name("", t, tau, s),
                                row.take(), RowSense::LessEqual, 0.0);
                            row.add(ix.storage_power(b, t, tau, s), 1.0);
                            row.add(ix.discharge_mode(b, t), -st.p_dch_min);
                            row.add(ix.charge_mode(b, t), st.p_ch_max);
                            m.add_constraint(
                                "smin_b" + std::to_string(b) + point_name("", t, tau, s),
                                row.take(), RowSense::GreaterEqual, 0.0);
                        }
                        // energy update; the first point chains to c_init
                        row.add(ix.storage_energy(b, t, tau, s), 1.0);
                        const bool first = t == 0 && tau == 0;
                        if (!first) {
                            const int pt = tau > 0 ? t : t - 1;
                            const int ptau = tau > 0 ? tau - 1 : K - 1;
                            row.add(ix.storage_energy(b, pt, ptau, s), -1.0);
                        }
                        if (split) {
                            row.add(ix.storage_discharge(b, t, tau, s), dt);
                            row.add(ix.storage_charge(b, t, tau, s), -dt * st.efficiency);
                        } else {
                            row.add(ix.storage_power(b, t, tau, s), dt);
                        }
                        m.add_constraint("soc_b" + std::to_string(b) + point_name("", t, tau, s),
                                         row.take(), RowSense::Equal, first ? st.c_init : 0.0);
                    }
            for (int t = 0; t < T; ++t) {
                row.add(ix.discharge_mode(b, t), 1.0);
                row.add(ix.charge_mode(b, t), 1.0);
                m.add_constraint("sexc_b" + std::to_string(b) + "_t" + std::to_string(t),
                                 row.take(), RowSense::LessEqual, 1.0);
            }
            const double init_v = st.init_mode == StorageMode::Charging ? 1.0 : 0.0;
            const double init_u = st.init_mode == StorageMode::Discharging ? 1.0 : 0.0;
            for (int t = 0; t < T && st.min_charge_time >= 2; ++t) {
                const int L = std::min(st.min_charge_time, T - t);
                if (L < 2) continue;
                for (int tt = t; tt < t + L; ++tt) row.add(ix.charge_mode(b, tt), 1.0);
                row.add(ix.charge_mode(b, t), -static_cast<double>(L));
                double rhs = 0.0;
                if (t > 0)
                    row.add(ix.charge_mode(b, t - 1), static_cast<double>(L));
                else
                    rhs = -static_cast<double>(L) * init_v;
                m.add_constraint("chwin_b" + std::to_string(b) + "_t" + std::to_string(t),
                                 row.take(), RowSense::GreaterEqual, rhs);
            }
            for (int t = 0; t < T && st.min_discharge_time >= 2; ++t) {
                const int L = std::min(st.min_discharge_time, T - t);
                if (L < 2) continue;
                for (int tt = t; tt < t + L; ++tt) row.add(ix.discharge_mode(b, tt), 1.0);
                row.add(ix.discharge_mode(b, t), -static_cast<double>(L));
                double rhs = 0.0;
                if (t > 0)
                    row.add(ix.discharge_mode(b, t - 1), static_cast<double>(L));
                else
                    rhs = -static_cast<double>(L) * init_u;
                m.add_constraint("dcwin_b" + std::to_string(b) + "_t" + std::to_string(t),
                                 row.take(), RowSense::GreaterEqual, rhs);
            }
        }

        // Adjustable loads: consumption tied to the hourly on indicator, a
        // window-wide energy requirement per scenario, and a minimum operating
        // window truncated at the window end (the load cannot run past it).
        for (int d = 0; d < Dn; ++d) {
            const auto& load = spec.adjustable_loads[d];
            for (int s = 0; s < S; ++s) {
                for (int t = load.window_start; t <= load.window_end; ++t)
                    for (int tau = 0; tau < K; ++tau) {
                        row.add(ix.load_power(d, t, tau, s), 1.0);
                        row.add(ix.load_on(d, t), -load.d_max);
                        m.add_constraint("dmax_d" + std::to_string(d) + point_name("", t, tau, s),
                                         row.take(), RowSense::LessEqual, 0.0);
                        if (load.d_min > 0.0) {
                            row.add(ix.load_power(d, t, tau, s), 1.0);
                            row.add(ix.load_on(d, t), -load.d_min);
                            m.add_constraint(
                                "dmin_d" + std::to_string(d) + point_name("", t, tau, s),
                                row.take(), RowSense::GreaterEqual, 0.0);
                        }
                    }
                for (int t = load.window_start; t <= load.window_end; ++t)
                    for (int tau = 0; tau < K; ++tau) row.add(ix.load_power(d, t, tau, s), dt);
                m.add_constraint("ener_d" + std::to_string(d) + "_s" + std::to_string(s),
                                 row.take(), RowSense::Equal, load.energy_required);
            }
            for (int t = load.window_start;
                 t <= load.window_end && load.min_operating_time >= 2; ++t) {
                const int L = std::min(load.min_operating_time, load.window_end - t + 1);
                if (L < 2) continue;
                for (int tt = t; tt < t + L; ++tt) row.add(ix.load_on(d, tt), 1.0);
                row.add(ix.load_on(d, t), -static_cast<double>(L));
                // the load is off before its window, so the t = window_start
                // row has no predecessor term
                if (t > load.window_start) row.add(ix.load_on(d, t - 1), static_cast<double>(L));
                m.add_constraint("opwin_d" + std::to_string(d) + "_t" + std::to_string(t),
                                 row.take(), RowSense::GreaterEqual, 0.0);
            }
        }

        // Deviation accounting: DP is the transfer error, DELTA selects its
        // sign, DPP captures the positive part. The DPP >= -M DELTA half of
        // the indicator pair is vacuous under DPP >= 0 and is not emitted.
        // The indicator constants are the exact per-hour deviation ranges
        // (up = M - sched, down = M + sched), so no artificial transfer floor
        // or ceiling appears and the relaxation stays as tight as possible.
        for (int s = 0; s < S; ++s)
            for (int t = 0; t < T; ++t) {
                const double sched = dmo.p_sched[static_cast<std::size_t>(t)];
                const double m_up = M - sched;
                const double m_dn = M + sched;
                for (int tau = 0; tau < K; ++tau) {
                    row.add(ix.deviation(t, tau, s), 1.0);
                    row.add(ix.grid_power(t, tau, s), -1.0);
                    m.add_constraint(point_name("ddef", t, tau, s), row.take(), RowSense::Equal,
                                     -sched);
                    row.add(ix.deviation(t, tau, s), 1.0);
                    row.add(ix.deviation_sign(t, s), -m_up);
                    m.add_constraint(point_name("dsgn", t, tau, s), row.take(),
                                     RowSense::LessEqual, 0.0);
                    row.add(ix.deviation_positive(t, tau, s), 1.0);
                    row.add(ix.deviation_sign(t, s), -m_up);
                    m.add_constraint(point_name("dpub", t, tau, s), row.take(),
                                     RowSense::LessEqual, 0.0);
                    row.add(ix.deviation(t, tau, s), 1.0);
                    row.add(ix.deviation_positive(t, tau, s), -1.0);
                    row.add(ix.deviation_sign(t, s), m_up);
                    m.add_constraint(point_name("dlku", t, tau, s), row.take(),
                                     RowSense::LessEqual, m_up);
                    row.add(ix.deviation(t, tau, s), 1.0);
                    row.add(ix.deviation_positive(t, tau, s), -1.0);
                    row.add(ix.deviation_sign(t, s), -m_dn);
                    m.add_constraint(point_name("dlkl", t, tau, s), row.take(),
                                     RowSense::GreaterEqual, -m_dn);
                }
            }

        m.validate();
        return out;
    }
};

inline BuiltModel build_model(const MicrogridSpec& spec, const DmoSchedule& dmo,
                              const ScenarioSet& scenarios) {
    return FormulationBuilder::build(spec, dmo, scenarios);
}

}  // namespace mgsched
