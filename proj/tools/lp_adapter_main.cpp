// SPDX-License-Identifier: Apache-2.0

// Subprocess solver adapter: reads an LP-format model, solves it with the
// embedded branch-and-bound, writes the solution-file contract. Usage:
//   lp_solve_adapter <model.lp> <solution.out> [gap_tol]

#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <string>

#include "mgsched/lp_format.hpp"
#include "mgsched/solver.hpp"

int main(int argc, char** argv) {
    if (argc < 3) {
        std::fprintf(stderr, "usage: %s <model.lp> <solution.out> [gap_tol]\n", argv[0]);
        return 2;
    }
    try {
        mgsched::MilpModel model = mgsched::parse_lp_file(argv[1]);
        mgsched::SolverConfig cfg;
        if (argc > 3) cfg.gap_tol = std::max(std::atof(argv[3]), 1e-9);
        mgsched::MilpSolution sol = mgsched::solve_milp(model, cfg);

        mgsched::SolutionFile out;
        switch (sol.status) {
            case mgsched::MilpStatus::Optimal:
                out.status = "optimal";
                break;
            case mgsched::MilpStatus::Infeasible:
                out.status = "infeasible";
                break;
            default:
                out.status = "limit";
                break;
        }
        if (sol.has_incumbent()) {
            out.has_objective = true;
            out.objective = sol.objective;
            for (int j = 0; j < model.n_cols(); ++j)
                out.values.emplace_back(model.variables[j].name, sol.x[j]);
        }
        std::ofstream os(argv[2]);
        if (!os) {
            std::fprintf(stderr, "cannot open %s for writing\n", argv[2]);
            return 2;
        }
        mgsched::write_solution_file(out, os);
        return 0;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "adapter error: %s\n", e.what());
        return 1;
    }
}
