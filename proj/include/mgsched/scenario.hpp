// SPDX-License-Identifier: Apache-2.0
#pragma once

// Monte Carlo scenario generation and fast-forward reduction. Reproducibility
// contract: each scenario draws from its own substream derived from (seed,
// scenario index), and the draw order inside a scenario is fixed: renewable
// units in list order point by point, then fixed loads, then per-hour
// islanding triggers (duration drawn only when a trigger fires). Identical
// (spec, config) inputs give bit-identical scenario sets.

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "mgsched/domain.hpp"

namespace mgsched {

struct Scenario {
    std::string id;
    double probability = 0.0;
    std::vector<std::vector<double>> renewable_profiles;  // [unit][point] kW
    std::vector<std::vector<double>> load_profiles;       // [fixed load][point] kW
    std::vector<std::uint8_t> islanding;                  // [point], 1 = grid-connected
};

struct ScenarioSet {
    std::vector<Scenario> scenarios;
    double total_probability() const {
        double p = 0.0;
        for (const auto& s : scenarios) p += s.probability;
        return p;
    }
};

struct ScenarioConfig {
    int n_scenarios = 0;
    double renewable_band = 0.0;
    double load_band = 0.0;
    double islanding_prob_per_hour = 0.0;
    int max_island_hours = 1;
    std::uint64_t seed = 0;
};

namespace rng_detail {

inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Uniform [0,1) from the top 53 bits; fixed mapping so results do not depend
// on library distribution internals.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace rng_detail

inline ScenarioSet generate_scenarios(const MicrogridSpec& spec, const ScenarioConfig& cfg) {
    if (cfg.n_scenarios <= 0)
        throw std::invalid_argument("scenario config: n_scenarios must be >= 1");
    if (cfg.renewable_band < 0.0 || cfg.load_band < 0.0)
        throw std::invalid_argument("scenario config: bands must be >= 0");
    if (cfg.islanding_prob_per_hour < 0.0 || cfg.islanding_prob_per_hour > 1.0)
        throw std::invalid_argument("scenario config: islanding probability must be in [0,1]");
    if (cfg.max_island_hours < 1)
        throw std::invalid_argument("scenario config: max_island_hours must be >= 1");

    const TimeGrid& g = spec.time_grid;
    const int points = g.n_points();
    ScenarioSet out;
    out.scenarios.resize(cfg.n_scenarios);

    for (int s = 0; s < cfg.n_scenarios; ++s) {
        Scenario& sc = out.scenarios[s];
        sc.id = "s" + std::to_string(s);
        sc.probability = 1.0 / static_cast<double>(cfg.n_scenarios);

        std::mt19937_64 rng(rng_detail::splitmix64(
            cfg.seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(s + 1))));
        auto perturb = [&](const std::vector<double>& forecast, double band) {
            std::vector<double> p(points);
            for (int k = 0; k < points; ++k) {
                double e = band == 0.0
                               ? 0.0
                               : (2.0 * rng_detail::uniform01(rng) - 1.0) * band;
                p[k] = std::max(0.0, forecast[k] * (1.0 + e));
            }
            return p;
        };

        sc.renewable_profiles.reserve(spec.nondispatchable_units.size());
        for (const auto& r : spec.nondispatchable_units)
            sc.renewable_profiles.push_back(perturb(r.forecast, cfg.renewable_band));
        sc.load_profiles.reserve(spec.fixed_loads.size());
        for (const auto& l : spec.fixed_loads)
            sc.load_profiles.push_back(perturb(l.forecast, cfg.load_band));

        // Islanding: whole-hour outage blocks. Every hour may start an outage
        // independently; overlapping windows merge.
        sc.islanding.assign(points, 1);
        for (int t = 0; t < g.n_hours; ++t) {
            if (cfg.islanding_prob_per_hour == 0.0) continue;
            if (rng_detail::uniform01(rng) >= cfg.islanding_prob_per_hour) continue;
            int duration = 1 + static_cast<int>(rng_detail::uniform01(rng) *
                                                static_cast<double>(cfg.max_island_hours));
            duration = std::min(duration, cfg.max_island_hours);
            for (int th = t; th < std::min(t + duration, g.n_hours); ++th)
                for (int tau = 0; tau < g.subperiods_per_hour; ++tau)
                    sc.islanding[g.point(th, tau)] = 0;
        }
    }
    return out;
}

// Euclidean distance on concatenated (renewable, load) kW values; islanding
// indicator differences are scaled so a disconnected point weighs like a
// full-line-capacity power difference.
inline double scenario_distance(const Scenario& a, const Scenario& b,
                                double islanding_scale_kw) {
    double sum = 0.0;
    for (std::size_t u = 0; u < a.renewable_profiles.size(); ++u)
        for (std::size_t k = 0; k < a.renewable_profiles[u].size(); ++k) {
            double d = a.renewable_profiles[u][k] - b.renewable_profiles[u][k];
            sum += d * d;
        }
    for (std::size_t l = 0; l < a.load_profiles.size(); ++l)
        for (std::size_t k = 0; k < a.load_profiles[l].size(); ++k) {
            double d = a.load_profiles[l][k] - b.load_profiles[l][k];
            sum += d * d;
        }
    for (std::size_t k = 0; k < a.islanding.size(); ++k) {
        double d = islanding_scale_kw *
                   (static_cast<double>(a.islanding[k]) - static_cast<double>(b.islanding[k]));
        sum += d * d;
    }
    return std::sqrt(sum);
}

// Fast-forward selection under the probability-weighted transport distance.
// Discarded probability mass moves to the nearest retained scenario (ties to
// the lowest index); retained scenarios keep their original order and
// profiles bit-identical. islanding_scale_kw is normally the line limit
// P_M^max so outage mismatches stay commensurate with power mismatches.
inline ScenarioSet reduce_scenarios(const ScenarioSet& set, int k, double islanding_scale_kw) {
    const int n = static_cast<int>(set.scenarios.size());
    if (k < 1 || k > n)
        throw std::invalid_argument("reduce_scenarios: k must satisfy 1 <= k <= set size");
    if (k == n) return set;

    std::vector<std::vector<double>> dist(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            dist[i][j] = dist[j][i] =
                scenario_distance(set.scenarios[i], set.scenarios[j], islanding_scale_kw);

    std::vector<bool> selected(n, false);
    // Greedy fast-forward: each step picks the candidate minimizing the
    // probability-weighted distance from every unselected scenario to its
    // nearest selected one.
    std::vector<double> nearest(n, std::numeric_limits<double>::infinity());  // distance to selected set
    for (int step = 0; step < k; ++step) {
        int best = -1;
        double best_value = std::numeric_limits<double>::infinity();
        for (int u = 0; u < n; ++u) {
            if (selected[u]) continue;
            double value = 0.0;
            for (int j = 0; j < n; ++j) {
                if (selected[j] || j == u) continue;
                value += set.scenarios[j].probability * std::min(nearest[j], dist[j][u]);
            }
            if (value < best_value - 1e-15) {
                best_value = value;
                best = u;
            }
        }
        selected[best] = true;
        for (int j = 0; j < n; ++j) nearest[j] = std::min(nearest[j], dist[j][best]);
    }

    // Reaggregate discarded probability onto the nearest retained scenario.
    std::vector<double> prob(n, 0.0);
    for (int i = 0; i < n; ++i) {
        if (selected[i]) {
            prob[i] += set.scenarios[i].probability;
            continue;
        }
        int target = -1;
        double best = std::numeric_limits<double>::infinity();
        for (int j = 0; j < n; ++j) {
            if (!selected[j]) continue;
            if (dist[i][j] < best - 1e-15) {
                best = dist[i][j];
                target = j;
            }
        }
        prob[target] += set.scenarios[i].probability;
    }

    ScenarioSet out;
    for (int i = 0; i < n; ++i) {
        if (!selected[i]) continue;
        out.scenarios.push_back(set.scenarios[i]);
        out.scenarios.back().probability = prob[i];
    }
    return out;
}

}  // namespace mgsched
