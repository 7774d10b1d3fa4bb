// SPDX-License-Identifier: Apache-2.0
#pragma once

// Generic sparse mixed-integer linear program: the carrier every other module
// speaks. Construction is order-preserving so identical inputs give identical
// column/row layouts.

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace mgsched {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class VarKind : std::uint8_t { Continuous, Binary };
enum class RowSense : std::uint8_t { LessEqual, Equal, GreaterEqual };

struct Variable {
    std::string name;
    VarKind kind = VarKind::Continuous;
    double lower = 0.0;
    double upper = kInf;
    double objective = 0.0;
};

struct RowEntry {
    int column = -1;
    double coeff = 0.0;
};

struct Constraint {
    std::string name;
    std::vector<RowEntry> entries;
    RowSense sense = RowSense::LessEqual;
    double rhs = 0.0;
};

// Thrown for malformed models; distinct from an infeasible solve.
struct ModelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ModelStats {
    std::int64_t n_vars = 0;
    std::int64_t n_binaries = 0;
    std::int64_t n_constraints = 0;
    std::int64_t n_nonzeros = 0;
};

class MilpModel {
public:
    std::vector<Variable> variables;
    std::vector<Constraint> constraints;

    int add_variable(std::string name, VarKind kind, double lower, double upper,
                     double objective = 0.0) {
        variables.push_back({std::move(name), kind, lower, upper, objective});
        return static_cast<int>(variables.size()) - 1;
    }

    int add_constraint(std::string name, std::vector<RowEntry> entries, RowSense sense,
                       double rhs) {
        constraints.push_back({std::move(name), std::move(entries), sense, rhs});
        return static_cast<int>(constraints.size()) - 1;
    }

    int n_cols() const { return static_cast<int>(variables.size()); }
    int n_rows() const { return static_cast<int>(constraints.size()); }

    // Structural validation. Throws ModelError on the first defect; callers
    // that want "infeasible" instead of "malformed" must pass this gate first.
    void validate() const {
        for (std::size_t j = 0; j < variables.size(); ++j) {
            const auto& var = variables[j];
            if (std::isnan(var.lower) || std::isnan(var.upper) || !std::isfinite(var.objective))
                throw ModelError("variable " + var.name + " has non-finite bound or objective");
            if (var.kind == VarKind::Binary &&
                !(var.lower >= 0.0 && var.upper <= 1.0 && var.lower <= var.upper))
                throw ModelError("binary variable " + var.name + " bounds outside [0,1]");
        }
        for (const auto& row : constraints) {
            if (!std::isfinite(row.rhs))
                throw ModelError("constraint " + row.name + " has non-finite rhs");
            for (const auto& e : row.entries) {
                if (e.column < 0 || e.column >= n_cols())
                    throw ModelError("constraint " + row.name + " references unknown column " +
                                     std::to_string(e.column));
                if (!std::isfinite(e.coeff))
                    throw ModelError("constraint " + row.name + " has non-finite coefficient");
            }
        }
    }
};

inline ModelStats model_stats(const MilpModel& model) {
    ModelStats s;
    s.n_vars = static_cast<std::int64_t>(model.variables.size());
    for (const auto& v : model.variables)
        if (v.kind == VarKind::Binary) ++s.n_binaries;
    s.n_constraints = static_cast<std::int64_t>(model.constraints.size());
    for (const auto& c : model.constraints)
        s.n_nonzeros += static_cast<std::int64_t>(c.entries.size());
    return s;
}

}  // namespace mgsched
