// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "mgsched/simplex.hpp"
#include "support/lp_oracle.hpp"

using namespace mgsched;
using mgsched::testing::enumerate_vertices;

namespace {

double inner(const MilpModel& m, const std::vector<double>& x) {
    double v = 0.0;
    for (int j = 0; j < m.n_cols(); ++j) v += m.variables[j].objective * x[j];
    return v;
}

double max_residual(const MilpModel& m, const std::vector<double>& x) {
    double worst = 0.0;
    for (const auto& row : m.constraints) {
        double lhs = 0.0;
        for (const auto& e : row.entries) lhs += e.coeff * x[e.column];
        double r = 0.0;
        if (row.sense == RowSense::LessEqual) r = std::max(0.0, lhs - row.rhs);
        else if (row.sense == RowSense::GreaterEqual) r = std::max(0.0, row.rhs - lhs);
        else r = std::abs(lhs - row.rhs);
        worst = std::max(worst, r);
    }
    for (int j = 0; j < m.n_cols(); ++j) {
        worst = std::max(worst, m.variables[j].lower - x[j]);
        worst = std::max(worst, x[j] - m.variables[j].upper);
    }
    return worst;
}

}  // namespace

TEST_CASE("bound-attained minimum with no rows") {
    MilpModel m;
    m.add_variable("x", VarKind::Continuous, 3.0, 10.0, 1.0);
    auto sol = solve_lp(m);
    REQUIRE(sol.status == LpStatus::Optimal);
    CHECK(sol.x[0] == Catch::Approx(3.0));
    CHECK(sol.objective == Catch::Approx(3.0));
}

TEST_CASE("bound-attained minimum encoded as rows") {
    MilpModel m;
    int x = m.add_variable("x", VarKind::Continuous, -kInf, kInf, 1.0);
    m.add_constraint("lo", {{x, 1.0}}, RowSense::GreaterEqual, 3.0);
    m.add_constraint("hi", {{x, 1.0}}, RowSense::LessEqual, 10.0);
    auto sol = solve_lp(m);
    REQUIRE(sol.status == LpStatus::Optimal);
    CHECK(sol.objective == Catch::Approx(3.0));
}

TEST_CASE("contradictory rows are infeasible") {
    MilpModel m;
    int x = m.add_variable("x", VarKind::Continuous, 0.0, kInf, 1.0);
    m.add_constraint("ge", {{x, 1.0}}, RowSense::GreaterEqual, 5.0);
    m.add_constraint("le", {{x, 1.0}}, RowSense::LessEqual, 4.0);
    CHECK(solve_lp(m).status == LpStatus::Infeasible);
}

TEST_CASE("empty box is infeasible") {
    MilpModel m;
    m.add_variable("x", VarKind::Continuous, 2.0, 1.0, 1.0);
    CHECK(solve_lp(m).status == LpStatus::Infeasible);
}

TEST_CASE("two-variable polytope optimum") {
    // min -x - y st x + y <= 4, x <= 3, y <= 3; vertices of the feasible
    // polytope are (0,0),(3,0),(0,3),(3,1),(1,3); best objective is -4.
    MilpModel m;
    int x = m.add_variable("x", VarKind::Continuous, 0.0, 3.0, -1.0);
    int y = m.add_variable("y", VarKind::Continuous, 0.0, 3.0, -1.0);
    m.add_constraint("cap", {{x, 1.0}, {y, 1.0}}, RowSense::LessEqual, 4.0);
    auto oracle = enumerate_vertices(m);
    REQUIRE(oracle.feasible);
    REQUIRE(oracle.objective == Catch::Approx(-4.0));

    auto sol = solve_lp(m);
    REQUIRE(sol.status == LpStatus::Optimal);
    CHECK(sol.objective == Catch::Approx(oracle.objective));
}

TEST_CASE("equality row") {
    MilpModel m;
    int x = m.add_variable("x", VarKind::Continuous, 0.0, 2.0, 1.0);
    int y = m.add_variable("y", VarKind::Continuous, 0.0, 2.0, 2.0);
    m.add_constraint("sum", {{x, 1.0}, {y, 1.0}}, RowSense::Equal, 3.0);
    auto oracle = enumerate_vertices(m);
    auto sol = solve_lp(m);
    REQUIRE(sol.status == LpStatus::Optimal);
    CHECK(sol.objective == Catch::Approx(4.0));
    CHECK(sol.objective == Catch::Approx(oracle.objective));
}

TEST_CASE("unbounded ray is reported") {
    SECTION("free variable, no rows") {
        MilpModel m;
        m.add_variable("x", VarKind::Continuous, 0.0, kInf, -1.0);
        CHECK(solve_lp(m).status == LpStatus::Unbounded);
    }
    SECTION("ray inside a row system") {
        MilpModel m;
        int x = m.add_variable("x", VarKind::Continuous, 0.0, kInf, -1.0);
        int y = m.add_variable("y", VarKind::Continuous, 0.0, kInf, 0.0);
        m.add_constraint("tie", {{x, 1.0}, {y, -1.0}}, RowSense::LessEqual, 0.0);
        CHECK(solve_lp(m).status == LpStatus::Unbounded);
    }
}

TEST_CASE("free variables take negative values") {
    MilpModel m;
    int x = m.add_variable("x", VarKind::Continuous, -kInf, kInf, 1.0);
    int y = m.add_variable("y", VarKind::Continuous, 0.0, 1.0, 0.0);
    m.add_constraint("tie", {{x, 1.0}, {y, 1.0}}, RowSense::GreaterEqual, -5.0);
    auto sol = solve_lp(m);
    REQUIRE(sol.status == LpStatus::Optimal);
    CHECK(sol.objective == Catch::Approx(-6.0));  // x=-6, y=1
}

TEST_CASE("degenerate pivoting terminates (cycling guard)") {
    // Beale's cycling example; Dantzig pricing cycles without an anti-cycling
    // rule. Optimum is -1/20 at x3=1.
    MilpModel m;
    int x0 = m.add_variable("x0", VarKind::Continuous, 0.0, 1e6, -0.75);
    int x1 = m.add_variable("x1", VarKind::Continuous, 0.0, 1e6, 150.0);
    int x2 = m.add_variable("x2", VarKind::Continuous, 0.0, 1e6, -0.02);
    int x3 = m.add_variable("x3", VarKind::Continuous, 0.0, 1e6, 6.0);
    m.add_constraint("r0", {{x0, 0.25}, {x1, -60.0}, {x2, -0.04}, {x3, 9.0}},
                     RowSense::LessEqual, 0.0);
    m.add_constraint("r1", {{x0, 0.5}, {x1, -90.0}, {x2, -0.02}, {x3, 3.0}},
                     RowSense::LessEqual, 0.0);
    m.add_constraint("r2", {{x2, 1.0}}, RowSense::LessEqual, 1.0);
    auto sol = solve_lp(m);
    REQUIRE(sol.status == LpStatus::Optimal);
    CHECK(sol.objective == Catch::Approx(-0.05));
}

TEST_CASE("optimal solutions satisfy rows tightly and match cost inner product") {
    MilpModel m;
    int x = m.add_variable("x", VarKind::Continuous, 0.0, 100.0, 3.0);
    int y = m.add_variable("y", VarKind::Continuous, 0.0, 100.0, -5.0);
    int z = m.add_variable("z", VarKind::Continuous, -10.0, 10.0, 0.5);
    m.add_constraint("r0", {{x, 1.0}, {y, 2.0}, {z, -1.0}}, RowSense::LessEqual, 40.0);
    m.add_constraint("r1", {{x, -1.0}, {y, 1.0}}, RowSense::LessEqual, 10.0);
    m.add_constraint("r2", {{x, 1.0}, {z, 1.0}}, RowSense::GreaterEqual, -5.0);
    auto sol = solve_lp(m);
    REQUIRE(sol.status == LpStatus::Optimal);
    CHECK(max_residual(m, sol.x) <= 1e-8);
    CHECK(sol.objective == Catch::Approx(inner(m, sol.x)).epsilon(1e-8));
    auto oracle = enumerate_vertices(m);
    CHECK(sol.objective == Catch::Approx(oracle.objective));
}

TEST_CASE("malformed model throws ModelError, never reports infeasible") {
    MilpModel m;
    m.add_variable("x", VarKind::Continuous, 0.0, 1.0, 1.0);
    m.add_constraint("bad", {{5, 1.0}}, RowSense::Equal, 0.0);
    CHECK_THROWS_AS(solve_lp(m), ModelError);
}

TEST_CASE("badly scaled rows still solve cleanly") {
    // kW-scale row mixed with a $-scale row, magnitudes 1e6 apart.
    MilpModel m;
    int x = m.add_variable("x", VarKind::Continuous, 0.0, 1e6, 1e-4);
    int y = m.add_variable("y", VarKind::Continuous, 0.0, 1e6, 2.0);
    m.add_constraint("big", {{x, 1e5}, {y, 2e5}}, RowSense::GreaterEqual, 3e5);
    m.add_constraint("small", {{x, 1e-3}, {y, 1e-3}}, RowSense::LessEqual, 5.0);
    auto sol = solve_lp(m);
    REQUIRE(sol.status == LpStatus::Optimal);
    // x carries the load: x = 3, objective 3e-4.
    CHECK(sol.objective == Catch::Approx(3e-4).epsilon(1e-6));
}

TEST_CASE("solver agrees with the vertex oracle on random boxes") {
    std::mt19937_64 rng(20260815);
    std::uniform_int_distribution<int> n_dist(2, 6), m_dist(1, 6), sense_dist(0, 2);
    std::uniform_real_distribution<double> coeff(-5.0, 5.0), width(0.5, 8.0), shift(-4.0, 4.0);

    int optimal_seen = 0, infeasible_seen = 0;
    for (int trial = 0; trial < 250; ++trial) {
        const int n = n_dist(rng), rows = m_dist(rng);
        MilpModel m;
        for (int j = 0; j < n; ++j) {
            double lo = shift(rng);
            m.add_variable("x" + std::to_string(j), VarKind::Continuous, lo, lo + width(rng),
                           coeff(rng));
        }
        for (int r = 0; r < rows; ++r) {
            std::vector<RowEntry> entries;
            for (int j = 0; j < n; ++j) {
                double c = coeff(rng);
                if (std::abs(c) > 1.0) entries.push_back({j, c});
            }
            if (entries.empty()) entries.push_back({0, 1.0});
            auto sense = static_cast<RowSense>(sense_dist(rng));
            // Anchor equality rows near a feasible interior point so a decent
            // fraction of trials stays feasible.
            double anchor = 0.0;
            for (const auto& e : entries) {
                const auto& v = m.variables[e.column];
                anchor += e.coeff * 0.5 * (v.lower + v.upper);
            }
            m.add_constraint("r" + std::to_string(r), std::move(entries), sense,
                             anchor + (sense == RowSense::Equal ? 0.0 : shift(rng)));
        }

        auto oracle = enumerate_vertices(m);
        auto sol = solve_lp(m);
        INFO("trial " << trial);
        if (oracle.feasible) {
            ++optimal_seen;
            REQUIRE(sol.status == LpStatus::Optimal);
            REQUIRE_THAT(sol.objective, Catch::Matchers::WithinRel(oracle.objective, 1e-7) ||
                                            Catch::Matchers::WithinAbs(oracle.objective, 1e-7));
            REQUIRE(max_residual(m, sol.x) <= 1e-7);
        } else {
            ++infeasible_seen;
            REQUIRE(sol.status == LpStatus::Infeasible);
        }
    }
    // The generator must exercise both outcomes to mean anything.
    CHECK(optimal_seen >= 50);
    CHECK(infeasible_seen >= 20);
}

TEST_CASE("repeat solves are bit-identical") {
    MilpModel m;
    int x = m.add_variable("x", VarKind::Continuous, 0.0, 9.0, -1.0);
    int y = m.add_variable("y", VarKind::Continuous, 0.0, 9.0, -2.0);
    int z = m.add_variable("z", VarKind::Continuous, 0.0, 9.0, 1.0);
    m.add_constraint("r0", {{x, 1.0}, {y, 1.0}, {z, 1.0}}, RowSense::LessEqual, 11.0);
    m.add_constraint("r1", {{x, 2.0}, {y, -1.0}}, RowSense::LessEqual, 5.0);
    auto a = solve_lp(m);
    auto b = solve_lp(m);
    REQUIRE(a.status == LpStatus::Optimal);
    REQUIRE(b.status == LpStatus::Optimal);
    CHECK(a.iterations == b.iterations);
    CHECK(std::memcmp(a.x.data(), b.x.data(), a.x.size() * sizeof(double)) == 0);
    CHECK(a.objective == b.objective);
}

TEST_CASE("warm start from a parent basis reaches the same optimum") {
    MilpModel m;
    int x = m.add_variable("x", VarKind::Continuous, 0.0, 4.0, -2.0);
    int y = m.add_variable("y", VarKind::Continuous, 0.0, 4.0, -3.0);
    int b = m.add_variable("b", VarKind::Binary, 0.0, 1.0, 1.0);
    m.add_constraint("cap", {{x, 1.0}, {y, 1.0}, {b, 2.0}}, RowSense::LessEqual, 6.0);

    SimplexSolver solver(m);
    SimplexBasis basis;
    auto root = solver.solve(nullptr, &basis);
    REQUIRE(root.status == LpStatus::Optimal);

    // Branch: fix the binary to 1 and re-solve warm; verify against scratch.
    std::vector<double> lb = {0.0, 0.0, 1.0}, ub = {4.0, 4.0, 1.0};
    auto warm = solver.solve_with_bounds(lb, ub, &basis, nullptr);
    MilpModel fixed = m;
    fixed.variables[b].lower = 1.0;
    fixed.variables[b].upper = 1.0;
    auto cold = solve_lp(fixed);
    REQUIRE(warm.status == LpStatus::Optimal);
    REQUIRE(cold.status == LpStatus::Optimal);
    CHECK(warm.objective == Catch::Approx(cold.objective));
}

TEST_CASE("warm start detects child infeasibility") {
    MilpModel m;
    int x = m.add_variable("x", VarKind::Continuous, 0.0, 10.0, 1.0);
    int b = m.add_variable("b", VarKind::Binary, 0.0, 1.0, 0.0);
    m.add_constraint("need", {{x, 1.0}, {b, 20.0}}, RowSense::GreaterEqual, 15.0);
    m.add_constraint("cap", {{x, 1.0}}, RowSense::LessEqual, 10.0);

    SimplexSolver solver(m);
    SimplexBasis basis;
    auto root = solver.solve(nullptr, &basis);
    REQUIRE(root.status == LpStatus::Optimal);

    // b fixed to 0 leaves x >= 15 against x <= 10.
    std::vector<double> lb = {0.0, 0.0}, ub = {10.0, 0.0};
    auto child = solver.solve_with_bounds(lb, ub, &basis, nullptr);
    CHECK(child.status == LpStatus::Infeasible);
}
