// SPDX-License-Identifier: Apache-2.0
#pragma once

// Exact MILP solving on top of the simplex core: best-bound branch-and-bound
// over binary columns, plus a name-keyed registry of external solver plugins
// speaking the LP-file/solution-file contract.

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

#include "mgsched/lp_format.hpp"
#include "mgsched/milp.hpp"
#include "mgsched/simplex.hpp"

namespace mgsched {

enum class MilpStatus : std::uint8_t { Optimal, Infeasible, GapLimit, NodeLimit, TimeLimit };

struct MilpSolution {
    MilpStatus status = MilpStatus::Infeasible;
    std::vector<double> x;  // empty when no incumbent exists
    double objective = kInf;
    double bound = -kInf;
    double gap = kInf;
    std::int64_t nodes = 0;
    bool has_incumbent() const { return !x.empty(); }
};

struct SolverConfig {
    double gap_tol = 1e-6;
    double integrality_tol = 1e-6;
    std::int64_t node_limit = 0;  // 0 = unlimited
    double time_limit = 0.0;      // seconds, 0 = unlimited
    // Branching is most-fractional (ties to the lowest column index) and node
    // order best-bound (ties FIFO); both fixed, named here for the record.
    void validate() const {
        if (!(gap_tol > 0.0) || !(integrality_tol > 0.0))
            throw std::invalid_argument("solver tolerances must be > 0");
    }
};

inline double relative_gap(double objective, double bound) {
    if (objective == kInf) return kInf;
    return (objective - bound) / std::max(1.0, std::abs(objective));
}

namespace bnb_detail {

// Most fractional binary whose bounds still allow both values; -1 when every
// such column is integral within tol. Ties go to the lowest column index.
inline int pick_branch(const std::vector<double>& x, const std::vector<int>& binaries,
                       const std::vector<double>& lb, const std::vector<double>& ub,
                       double tol) {
    int pick = -1;
    double best = tol;
    for (int j : binaries) {
        if (lb[j] >= ub[j]) continue;  // pinned by an ancestor branch
        double f = std::abs(x[j] - std::round(x[j]));
        if (f > best) {
            best = f;
            pick = j;
        }
    }
    return pick;
}

// Fallback when integral-within-tol rounding turned out infeasible: branch on
// the least-settled unpinned binary so the search can pin columns exactly.
inline int pick_branch_any(const std::vector<double>& x, const std::vector<int>& binaries,
                           const std::vector<double>& lb, const std::vector<double>& ub) {
    return pick_branch(x, binaries, lb, ub, -1.0);
}

}  // namespace bnb_detail

inline MilpSolution solve_milp(const MilpModel& model, const SolverConfig& cfg = {}) {
    cfg.validate();
    model.validate();
    const auto t_start = std::chrono::steady_clock::now();
    auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    };

    const int n = model.n_cols();
    std::vector<int> binaries;
    for (int j = 0; j < n; ++j)
        if (model.variables[j].kind == VarKind::Binary) binaries.push_back(j);

    SimplexSolver simplex(model);
    SimplexBasis root_basis;

    // Nodes hold only the branch edge; bounds are reconstructed by walking
    // the parent chain, and every node warm-starts from the root basis.
    struct Node {
        int parent = -1;
        int branch_col = -1;
        bool fix_to_one = false;
    };
    std::vector<Node> nodes;
    using QueueItem = std::pair<double, std::int64_t>;  // (inherited bound, insertion seq)
    std::priority_queue<QueueItem, std::vector<QueueItem>, std::greater<>> open;

    std::vector<double> root_lb(n), root_ub(n);
    for (int j = 0; j < n; ++j) {
        root_lb[j] = model.variables[j].lower;
        root_ub[j] = model.variables[j].upper;
    }

    MilpSolution out;
    std::int64_t explored = 0;

    auto finish = [&](MilpStatus status, double bound) {
        out.status = status;
        out.nodes = explored;
        if (out.has_incumbent()) {
            out.bound = std::min(bound, out.objective);
            out.gap = relative_gap(out.objective, out.bound);
        } else if (status == MilpStatus::Infeasible) {
            out.bound = kInf;
            out.gap = 0.0;
        } else {
            out.bound = bound;
            out.gap = kInf;
        }
        return out;
    };

    auto node_bounds = [&](int node_id, std::vector<double>& lb, std::vector<double>& ub) {
        lb = root_lb;
        ub = root_ub;
        for (int cur = node_id; cur >= 0; cur = nodes[cur].parent) {
            const Node& nd = nodes[cur];
            if (nd.fix_to_one) lb[nd.branch_col] = std::max(lb[nd.branch_col], 1.0);
            else ub[nd.branch_col] = std::min(ub[nd.branch_col], 0.0);
        }
    };

    // Re-solves with binaries fixed at their rounded values so incumbents are
    // exactly integral and the continuous block is re-optimized around them.
    // Returns false when the rounding is infeasible.
    auto try_incumbent = [&](const LpSolution& relaxed, const std::vector<double>& lb,
                             const std::vector<double>& ub) {
        std::vector<double> flb = lb, fub = ub;
        for (int j : binaries) {
            double r = std::round(relaxed.x[j]);
            flb[j] = r;
            fub[j] = r;
        }
        LpSolution fixed = simplex.solve_with_bounds(flb, fub, &root_basis, nullptr);
        if (fixed.status != LpStatus::Optimal) return false;
        if (!out.has_incumbent() || fixed.objective < out.objective - 1e-12) {
            out.x = fixed.x;
            for (int j : binaries) out.x[j] = flb[j];  // exact integers
            out.objective = fixed.objective;
        }
        return true;
    };

    auto push_children = [&](int parent_id, int column, double bound) {
        for (bool one : {false, true}) {
            nodes.push_back({parent_id, column, one});
            open.push({bound, static_cast<std::int64_t>(nodes.size()) - 1});
        }
    };

    double root_bound;
    {
        LpSolution root = simplex.solve(nullptr, &root_basis);
        ++explored;
        if (root.status == LpStatus::Infeasible) return finish(MilpStatus::Infeasible, kInf);
        if (root.status == LpStatus::Unbounded)
            throw std::runtime_error("LP relaxation is unbounded; MILP bound undefined");
        root_bound = root.objective;

        int branch = bnb_detail::pick_branch(root.x, binaries, root_lb, root_ub,
                                             cfg.integrality_tol);
        if (branch < 0) {
            if (try_incumbent(root, root_lb, root_ub))
                return finish(MilpStatus::Optimal, root_bound);
            branch = bnb_detail::pick_branch_any(root.x, binaries, root_lb, root_ub);
            if (branch < 0) return finish(MilpStatus::Infeasible, kInf);
        }
        push_children(-1, branch, root_bound);
    }

    std::vector<double> lb, ub;
    while (!open.empty()) {
        double best_outstanding = open.top().first;
        if (out.has_incumbent() &&
            relative_gap(out.objective, std::min(best_outstanding, out.objective)) <=
                cfg.gap_tol)
            return finish(MilpStatus::Optimal, best_outstanding);
        if (cfg.node_limit > 0 && explored >= cfg.node_limit)
            return finish(MilpStatus::NodeLimit, best_outstanding);
        if (cfg.time_limit > 0.0 && elapsed() >= cfg.time_limit)
            return finish(MilpStatus::TimeLimit, best_outstanding);

        auto [inherited, node_id] = open.top();
        open.pop();
        const double prune_eps =
            out.has_incumbent() ? 1e-9 * std::max(1.0, std::abs(out.objective)) : 0.0;
        if (out.has_incumbent() && inherited >= out.objective - prune_eps) continue;

        node_bounds(static_cast<int>(node_id), lb, ub);
        LpSolution rel = simplex.solve_with_bounds(lb, ub, &root_basis, nullptr);
        ++explored;
        if (rel.status == LpStatus::Infeasible) continue;
        if (rel.status == LpStatus::Unbounded)
            throw std::runtime_error("node LP unbounded under tightened bounds");
        if (out.has_incumbent() && rel.objective >= out.objective - prune_eps) continue;

        int branch = bnb_detail::pick_branch(rel.x, binaries, lb, ub, cfg.integrality_tol);
        if (branch < 0) {
            if (try_incumbent(rel, lb, ub)) continue;
            branch = bnb_detail::pick_branch_any(rel.x, binaries, lb, ub);
            if (branch < 0) continue;  // fully pinned yet unroundable: dead end
        }
        push_children(static_cast<int>(node_id), branch, rel.objective);
    }

    if (!out.has_incumbent()) return finish(MilpStatus::Infeasible, kInf);
    return finish(MilpStatus::Optimal, out.objective);
}

// ---------------------------------------------------------------------------
// External solver plugins.

struct PluginError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct UnknownPluginError : PluginError {
    using PluginError::PluginError;
};

using PluginFn = std::function<MilpSolution(const MilpModel&, const SolverConfig&)>;

inline std::map<std::string, PluginFn>& plugin_registry() {
    static std::map<std::string, PluginFn> registry;
    return registry;
}

inline void register_plugin(const std::string& name, PluginFn fn) {
    plugin_registry()[name] = std::move(fn);
}

inline MilpSolution solve_via_plugin(const MilpModel& model, const std::string& plugin_name,
                                     const SolverConfig& cfg = {}) {
    auto it = plugin_registry().find(plugin_name);
    if (it == plugin_registry().end())
        throw UnknownPluginError("no solver plugin registered under '" + plugin_name + "'");
    return it->second(model, cfg);
}

// Builds a plugin that shells out to `command <model.lp> <solution.out> <gap>`.
// The adapter owns the MILP search; its answer is normalized by re-reading
// the column values by name and recomputing the objective from the model.
inline PluginFn make_subprocess_plugin(std::string command) {
    return [command](const MilpModel& model, const SolverConfig& cfg) -> MilpSolution {
        model.validate();
        namespace fs = std::filesystem;
        static int invocation = 0;
        std::string stem = "mgsched_plugin_" + std::to_string(::getpid()) + "_" +
                           std::to_string(invocation++);
        fs::path lp_path = fs::temp_directory_path() / (stem + ".lp");
        fs::path sol_path = fs::temp_directory_path() / (stem + ".sol");
        write_lp_file(model, lp_path.string());

        std::string cmd = command + " \"" + lp_path.string() + "\" \"" + sol_path.string() +
                          "\" " + std::to_string(cfg.gap_tol);
        int rc = std::system(cmd.c_str());
        auto cleanup = [&] {
            std::error_code ec;
            fs::remove(lp_path, ec);
            fs::remove(sol_path, ec);
        };
        if (rc != 0) {
            cleanup();
            throw PluginError("solver adapter exited with status " + std::to_string(rc) +
                              ": " + command);
        }
        std::ifstream is(sol_path);
        if (!is) {
            cleanup();
            throw PluginError("solver adapter produced no solution file: " + command);
        }
        SolutionFile sol;
        try {
            sol = parse_solution_file(is);
        } catch (const LpParseError& e) {
            cleanup();
            throw PluginError(std::string("malformed adapter solution file: ") + e.what());
        }
        cleanup();

        MilpSolution out;
        out.nodes = 0;
        if (sol.status == "infeasible") {
            out.status = MilpStatus::Infeasible;
            out.bound = kInf;
            out.gap = 0.0;
            return out;
        }
        if (sol.status != "optimal")
            throw PluginError("solver adapter reported status '" + sol.status + "'");

        std::map<std::string, int> col_of;
        for (int j = 0; j < model.n_cols(); ++j) col_of[model.variables[j].name] = j;
        out.x.assign(model.n_cols(), 0.0);
        for (const auto& [name, value] : sol.values) {
            auto found = col_of.find(name);
            if (found == col_of.end())
                throw PluginError("adapter solution names unknown column '" + name + "'");
            out.x[found->second] = value;
        }
        out.objective = 0.0;
        for (int j = 0; j < model.n_cols(); ++j)
            out.objective += model.variables[j].objective * out.x[j];
        out.status = MilpStatus::Optimal;
        out.bound = out.objective;
        out.gap = 0.0;
        return out;
    };
}

}  // namespace mgsched
