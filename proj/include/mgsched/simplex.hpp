// SPDX-License-Identifier: Apache-2.0
#pragma once

// Bounded-variable revised simplex. Rows become equalities through one
// logical column each; phase 1 minimizes the sum of basic bound violations
// (no artificial columns), phase 2 the true cost. The basis inverse is kept
// as a sparse LU factorization plus product-form eta updates, refactorized
// periodically. Bland's rule engages after a stall and releases on strict
// progress, which keeps pivoting finite on degenerate models. All loops run
// in fixed index order; identical inputs give identical pivot sequences.

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "mgsched/milp.hpp"

namespace mgsched {

enum class LpStatus : std::uint8_t { Optimal, Infeasible, Unbounded };

struct LpSolution {
    LpStatus status = LpStatus::Infeasible;
    std::vector<double> x;  // structural columns, original units
    double objective = 0.0;
    int iterations = 0;
};

enum class ColStatus : std::uint8_t { Basic, AtLower, AtUpper, FreeNonbasic };

// Snapshot of a basis: per-column status plus the basic column per row
// position. Reusable across bound changes on the same model.
struct SimplexBasis {
    std::vector<ColStatus> status;
    std::vector<int> basic;
    bool empty() const { return status.empty(); }
};

class SimplexSolver {
public:
    explicit SimplexSolver(const MilpModel& model) : model_(model) {
        model.validate();
        build_scaled_form();
    }

    LpSolution solve(const SimplexBasis* warm = nullptr, SimplexBasis* basis_out = nullptr) {
        return solve_with_bounds(original_lower_, original_upper_, warm, basis_out);
    }

    // Bounds are structural-column overrides in original units; logical
    // bounds always come from the row senses.
    LpSolution solve_with_bounds(const std::vector<double>& lower,
                                 const std::vector<double>& upper,
                                 const SimplexBasis* warm = nullptr,
                                 SimplexBasis* basis_out = nullptr) {
        if (static_cast<int>(lower.size()) != n_struct_ ||
            static_cast<int>(upper.size()) != n_struct_)
            throw ModelError("bound override length mismatch");
        apply_bounds(lower, upper);

        LpSolution out;
        for (int j = 0; j < n_total_; ++j)
            if (lb_[j] > ub_[j] + kFeasTol) return out;  // empty box: infeasible

        if (m_ == 0) return solve_unconstrained(basis_out);

        iterations_ = 0;
        bool cold = (warm == nullptr || warm->empty());
        if (!cold) load_basis(*warm);
        if (cold) load_logical_basis();
        if (!refactorize()) {
            if (cold) throw std::runtime_error("singular identity basis");
            load_logical_basis();
            if (!refactorize()) throw std::runtime_error("singular identity basis");
        }
        recompute_basics();

        RunStatus st = run_phase(true);
        if (st == RunStatus::StillInfeasible) return out;  // status Infeasible
        st = run_phase(false);
        if (st == RunStatus::UnboundedRay) {
            out.status = LpStatus::Unbounded;
            out.iterations = iterations_;
            return out;
        }

        // Clean pass: fresh factorization, recomputed basics, then confirm no
        // direction remains. Guards eta-accumulated drift before declaring
        // optimality.
        for (int attempt = 0; attempt < 3; ++attempt) {
            if (!refactorize()) break;
            recompute_basics();
            if (max_basic_violation() > kFeasTol) {
                if (run_phase(true) == RunStatus::StillInfeasible) return out;
            }
            RunStatus again = run_phase(false);
            if (again == RunStatus::UnboundedRay) {
                out.status = LpStatus::Unbounded;
                out.iterations = iterations_;
                return out;
            }
            if (iterations_ == last_clean_iterations_) break;
            last_clean_iterations_ = iterations_;
        }

        out.status = LpStatus::Optimal;
        out.iterations = iterations_;
        out.x.resize(n_struct_);
        for (int j = 0; j < n_struct_; ++j) out.x[j] = x_[j] * col_scale_[j];
        out.objective = 0.0;
        for (int j = 0; j < n_struct_; ++j)
            out.objective += model_.variables[j].objective * out.x[j];
        if (basis_out) save_basis(*basis_out);
        return out;
    }

    // Worst scaled equality residual of the last optimal point; tests assert
    // the <= 1e-8 contract through this.
    double scaled_residual() const {
        std::vector<double> r(b_);
        for (int j = 0; j < n_total_; ++j)
            for (int k = col_ptr_[j]; k < col_ptr_[j + 1]; ++k)
                r[row_idx_[k]] -= val_[k] * x_[j];
        double worst = 0.0;
        for (double v : r) worst = std::max(worst, std::abs(v));
        return worst;
    }

private:
    static constexpr double kFeasTol = 1e-9;
    static constexpr double kDualTol = 1e-9;
    static constexpr double kPivotTol = 1e-10;
    static constexpr int kRefactorEvery = 64;
    static constexpr int kStallLimit = 50;

    enum class RunStatus { Done, StillInfeasible, UnboundedRay };

    const MilpModel& model_;
    int n_struct_ = 0, m_ = 0, n_total_ = 0;

    // Scaled computational form, CSC layout.
    std::vector<int> col_ptr_, row_idx_;
    std::vector<double> val_;
    std::vector<double> b_;
    std::vector<double> cost_;  // scaled phase-2 costs
    std::vector<double> lb_, ub_;
    std::vector<double> row_scale_, col_scale_;
    std::vector<double> original_lower_, original_upper_;

    // Pivoting state.
    std::vector<ColStatus> status_;
    std::vector<int> basic_;     // row position -> column
    std::vector<int> basic_of_;  // column -> row position or -1
    std::vector<double> x_;      // scaled values, all columns

    Eigen::SparseMatrix<double> basis_mat_;
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
    struct Eta {
        int r;
        std::vector<std::pair<int, double>> w;  // sparse w with w[r] included
        double pivot;
    };
    std::vector<Eta> etas_;

    int iterations_ = 0;
    int last_clean_iterations_ = -1;

    static double round_pow2(double s) {
        if (s <= 0.0 || !std::isfinite(s)) return 1.0;
        return std::ldexp(1.0, static_cast<int>(std::lround(std::log2(s))));
    }

    void build_scaled_form() {
        n_struct_ = model_.n_cols();
        m_ = model_.n_rows();
        n_total_ = n_struct_ + m_;

        // Geometric-mean equilibration on the structural matrix, two rounds,
        // rounded to powers of two so scaling never introduces rounding.
        row_scale_.assign(m_, 1.0);
        col_scale_.assign(n_struct_, 1.0);
        for (int round = 0; round < 2; ++round) {
            std::vector<double> rmin(m_, kInf), rmax(m_, 0.0);
            for (int i = 0; i < m_; ++i)
                for (const auto& e : model_.constraints[i].entries) {
                    double a = std::abs(e.coeff) * row_scale_[i] * col_scale_[e.column];
                    if (a == 0.0) continue;
                    rmin[i] = std::min(rmin[i], a);
                    rmax[i] = std::max(rmax[i], a);
                }
            for (int i = 0; i < m_; ++i)
                if (rmax[i] > 0.0) row_scale_[i] /= round_pow2(std::sqrt(rmin[i] * rmax[i]));
            std::vector<double> cmin(n_struct_, kInf), cmax(n_struct_, 0.0);
            for (int i = 0; i < m_; ++i)
                for (const auto& e : model_.constraints[i].entries) {
                    double a = std::abs(e.coeff) * row_scale_[i] * col_scale_[e.column];
                    if (a == 0.0) continue;
                    cmin[e.column] = std::min(cmin[e.column], a);
                    cmax[e.column] = std::max(cmax[e.column], a);
                }
            for (int j = 0; j < n_struct_; ++j)
                if (cmax[j] > 0.0) col_scale_[j] /= round_pow2(std::sqrt(cmin[j] * cmax[j]));
        }

        // CSC with duplicate row entries in one column merged.
        std::vector<std::vector<std::pair<int, double>>> cols(n_total_);
        for (int i = 0; i < m_; ++i)
            for (const auto& e : model_.constraints[i].entries)
                if (e.coeff != 0.0)
                    cols[e.column].push_back(
                        {i, e.coeff * row_scale_[i] * col_scale_[e.column]});
        for (int j = 0; j < n_struct_; ++j) {
            auto& c = cols[j];
            std::sort(c.begin(), c.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
            std::vector<std::pair<int, double>> merged;
            for (const auto& [i, a] : c) {
                if (!merged.empty() && merged.back().first == i) merged.back().second += a;
                else merged.push_back({i, a});
            }
            c = std::move(merged);
        }
        for (int i = 0; i < m_; ++i) cols[n_struct_ + i].push_back({i, 1.0});

        col_ptr_.assign(n_total_ + 1, 0);
        for (int j = 0; j < n_total_; ++j) col_ptr_[j + 1] = col_ptr_[j] + cols[j].size();
        row_idx_.resize(col_ptr_[n_total_]);
        val_.resize(col_ptr_[n_total_]);
        for (int j = 0; j < n_total_; ++j)
            for (std::size_t k = 0; k < cols[j].size(); ++k) {
                row_idx_[col_ptr_[j] + k] = cols[j][k].first;
                val_[col_ptr_[j] + k] = cols[j][k].second;
            }

        b_.resize(m_);
        for (int i = 0; i < m_; ++i) b_[i] = model_.constraints[i].rhs * row_scale_[i];

        cost_.assign(n_total_, 0.0);
        for (int j = 0; j < n_struct_; ++j)
            cost_[j] = model_.variables[j].objective * col_scale_[j];

        original_lower_.resize(n_struct_);
        original_upper_.resize(n_struct_);
        for (int j = 0; j < n_struct_; ++j) {
            original_lower_[j] = model_.variables[j].lower;
            original_upper_[j] = model_.variables[j].upper;
        }
        lb_.assign(n_total_, 0.0);
        ub_.assign(n_total_, 0.0);
        for (int i = 0; i < m_; ++i) {
            // Logical column turns the row into an equality: lhs + s = rhs.
            switch (model_.constraints[i].sense) {
                case RowSense::LessEqual:
                    lb_[n_struct_ + i] = 0.0;
                    ub_[n_struct_ + i] = kInf;
                    break;
                case RowSense::GreaterEqual:
                    lb_[n_struct_ + i] = -kInf;
                    ub_[n_struct_ + i] = 0.0;
                    break;
                case RowSense::Equal:
                    lb_[n_struct_ + i] = 0.0;
                    ub_[n_struct_ + i] = 0.0;
                    break;
            }
        }
    }

    void apply_bounds(const std::vector<double>& lower, const std::vector<double>& upper) {
        for (int j = 0; j < n_struct_; ++j) {
            lb_[j] = lower[j] / col_scale_[j];
            ub_[j] = upper[j] / col_scale_[j];
        }
    }

    LpSolution solve_unconstrained(SimplexBasis* basis_out) {
        LpSolution out;
        out.x.resize(n_struct_);
        out.objective = 0.0;
        for (int j = 0; j < n_struct_; ++j) {
            double c = model_.variables[j].objective;
            double lo = original_lower_[j], up = original_upper_[j];
            double v;
            if (c > 0.0) v = lo;
            else if (c < 0.0) v = up;
            else v = std::isfinite(lo) ? lo : (std::isfinite(up) ? up : 0.0);
            if (!std::isfinite(v)) {
                out.status = LpStatus::Unbounded;
                return out;
            }
            out.x[j] = v;
            out.objective += c * v;
        }
        out.status = LpStatus::Optimal;
        if (basis_out) {
            basis_out->status.assign(n_struct_, ColStatus::AtLower);
            basis_out->basic.clear();
        }
        return out;
    }

    void load_logical_basis() {
        status_.assign(n_total_, ColStatus::AtLower);
        basic_.resize(m_);
        basic_of_.assign(n_total_, -1);
        x_.assign(n_total_, 0.0);
        for (int j = 0; j < n_struct_; ++j) {
            set_nonbasic_start(j);
        }
        for (int i = 0; i < m_; ++i) {
            basic_[i] = n_struct_ + i;
            basic_of_[n_struct_ + i] = i;
            status_[n_struct_ + i] = ColStatus::Basic;
        }
    }

    void set_nonbasic_start(int j) {
        double lo = lb_[j], up = ub_[j];
        if (std::isfinite(lo) && (!std::isfinite(up) || std::abs(lo) <= std::abs(up))) {
            status_[j] = ColStatus::AtLower;
            x_[j] = lo;
        } else if (std::isfinite(up)) {
            status_[j] = ColStatus::AtUpper;
            x_[j] = up;
        } else {
            status_[j] = ColStatus::FreeNonbasic;
            x_[j] = 0.0;
        }
    }

    void load_basis(const SimplexBasis& warm) {
        status_ = warm.status;
        basic_ = warm.basic;
        basic_of_.assign(n_total_, -1);
        x_.assign(n_total_, 0.0);
        for (int i = 0; i < m_; ++i) basic_of_[basic_[i]] = i;
        // Snap nonbasics onto the (possibly changed) bounds.
        for (int j = 0; j < n_total_; ++j) {
            if (status_[j] == ColStatus::Basic) continue;
            if (status_[j] == ColStatus::AtLower && !std::isfinite(lb_[j])) set_nonbasic_start(j);
            else if (status_[j] == ColStatus::AtUpper && !std::isfinite(ub_[j]))
                set_nonbasic_start(j);
            else if (status_[j] == ColStatus::AtLower) x_[j] = lb_[j];
            else if (status_[j] == ColStatus::AtUpper) x_[j] = ub_[j];
            else x_[j] = 0.0;
        }
    }

    void save_basis(SimplexBasis& out) const {
        out.status = status_;
        out.basic = basic_;
    }

    bool refactorize() {
        etas_.clear();
        std::vector<Eigen::Triplet<double>> trip;
        for (int k = 0; k < m_; ++k) {
            int j = basic_[k];
            for (int p = col_ptr_[j]; p < col_ptr_[j + 1]; ++p)
                trip.emplace_back(row_idx_[p], k, val_[p]);
        }
        basis_mat_.resize(m_, m_);
        basis_mat_.setFromTriplets(trip.begin(), trip.end());
        basis_mat_.makeCompressed();
        lu_.compute(basis_mat_);
        return lu_.info() == Eigen::Success;
    }

    // z = B^{-1} v.
    void ftran(Eigen::VectorXd& v) {
        v = lu_.solve(v).eval();
        for (const auto& eta : etas_) {
            double zr = v[eta.r] / eta.pivot;
            for (const auto& [i, wi] : eta.w)
                if (i != eta.r) v[i] -= wi * zr;
            v[eta.r] = zr;
        }
    }

    // y = B^{-T} v.
    void btran(Eigen::VectorXd& v) {
        for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
            double acc = v[it->r];
            for (const auto& [i, wi] : it->w)
                if (i != it->r) acc -= wi * v[i];
            v[it->r] = acc / it->pivot;
        }
        v = lu_.transpose().solve(v).eval();
    }

    void recompute_basics() {
        Eigen::VectorXd r(m_);
        for (int i = 0; i < m_; ++i) r[i] = b_[i];
        for (int j = 0; j < n_total_; ++j) {
            if (status_[j] == ColStatus::Basic || x_[j] == 0.0) continue;
            for (int k = col_ptr_[j]; k < col_ptr_[j + 1]; ++k)
                r[row_idx_[k]] -= val_[k] * x_[j];
        }
        ftran(r);
        for (int i = 0; i < m_; ++i) x_[basic_[i]] = r[i];
    }

    double max_basic_violation() const {
        double worst = 0.0;
        for (int i = 0; i < m_; ++i) {
            int j = basic_[i];
            worst = std::max(worst, lb_[j] - x_[j]);
            worst = std::max(worst, x_[j] - ub_[j]);
        }
        return worst;
    }

    double infeasibility_sum() const {
        double sum = 0.0;
        for (int i = 0; i < m_; ++i) {
            int j = basic_[i];
            if (x_[j] < lb_[j]) sum += lb_[j] - x_[j];
            else if (x_[j] > ub_[j]) sum += x_[j] - ub_[j];
        }
        return sum;
    }

    // One simplex phase. phase1 minimizes the sum of basic violations with
    // costs recomputed from the violation pattern each iteration; phase 2
    // runs the true costs. Returns Done on success (phase-1 success = primal
    // feasible), StillInfeasible, or UnboundedRay (phase 2 only).
    RunStatus run_phase(bool phase1) {
        const int iter_cap = 2000 + 400 * (m_ + n_total_);
        int stall = 0;
        bool bland = false;
        int since_refactor = 0;
        Eigen::VectorXd y(m_), w(m_);

        while (true) {
            if (phase1 && infeasibility_sum() <= kFeasTol) return RunStatus::Done;

            // BTRAN pricing vector from the phase cost of the basic columns.
            for (int i = 0; i < m_; ++i) {
                int j = basic_[i];
                if (phase1)
                    y[i] = (x_[j] > ub_[j] + kFeasTol)   ? 1.0
                           : (x_[j] < lb_[j] - kFeasTol) ? -1.0
                                                         : 0.0;
                else
                    y[i] = cost_[j];
            }
            btran(y);

            // Entering column: most violating reduced cost (Dantzig), or
            // lowest eligible index under Bland.
            int enter = -1, dir = 0;
            double best = kDualTol;
            for (int j = 0; j < n_total_; ++j) {
                if (status_[j] == ColStatus::Basic) continue;
                if (lb_[j] == ub_[j]) continue;  // fixed, can never move
                double d = (phase1 ? 0.0 : cost_[j]);
                for (int k = col_ptr_[j]; k < col_ptr_[j + 1]; ++k)
                    d -= val_[k] * y[row_idx_[k]];
                int candidate_dir = 0;
                if (status_[j] == ColStatus::AtLower && d < -kDualTol) candidate_dir = +1;
                else if (status_[j] == ColStatus::AtUpper && d > kDualTol) candidate_dir = -1;
                else if (status_[j] == ColStatus::FreeNonbasic && std::abs(d) > kDualTol)
                    candidate_dir = d < 0.0 ? +1 : -1;
                if (candidate_dir == 0) continue;
                if (bland) {
                    enter = j;
                    dir = candidate_dir;
                    break;
                }
                if (std::abs(d) > best) {
                    best = std::abs(d);
                    enter = j;
                    dir = candidate_dir;
                }
            }
            if (enter < 0)
                return phase1 ? RunStatus::StillInfeasible : RunStatus::Done;

            // FTRAN the entering column.
            w.setZero();
            for (int k = col_ptr_[enter]; k < col_ptr_[enter + 1]; ++k)
                w[row_idx_[k]] = val_[k];
            ftran(w);

            // Ratio test: x_enter moves by dir*theta, basics by -dir*theta*w.
            double theta = kInf;
            int leave_pos = -1;
            double leave_target = 0.0;
            bool leave_at_upper = false;
            double best_pivot = 0.0;
            for (int i = 0; i < m_; ++i) {
                double g = dir * w[i];
                if (std::abs(g) <= kPivotTol) continue;
                int j = basic_[i];
                double v = x_[j];
                double cand = kInf, target = 0.0;
                bool at_upper = false;
                if (phase1 && v < lb_[j] - kFeasTol) {
                    // Infeasible-low basic blocks when climbing back to lb.
                    if (g < 0.0) {
                        cand = (v - lb_[j]) / g;
                        target = lb_[j];
                    }
                } else if (phase1 && v > ub_[j] + kFeasTol) {
                    if (g > 0.0) {
                        cand = (v - ub_[j]) / g;
                        target = ub_[j];
                        at_upper = true;
                    }
                } else if (g > 0.0) {
                    if (std::isfinite(lb_[j])) {
                        cand = (v - lb_[j]) / g;
                        target = lb_[j];
                    }
                } else {
                    if (std::isfinite(ub_[j])) {
                        cand = (v - ub_[j]) / g;
                        target = ub_[j];
                        at_upper = true;
                    }
                }
                if (cand == kInf) continue;
                cand = std::max(cand, 0.0);
                bool take;
                if (cand < theta - 1e-12) take = true;
                else if (cand <= theta + 1e-12) {
                    // Tie: Bland wants the lowest variable index; otherwise
                    // prefer the biggest pivot for stability, then lowest row.
                    if (bland) take = leave_pos < 0 || j < basic_[leave_pos];
                    else take = std::abs(g) > best_pivot + 1e-15;
                } else {
                    take = false;
                }
                if (take) {
                    theta = std::min(theta, cand);
                    leave_pos = i;
                    leave_target = target;
                    leave_at_upper = at_upper;
                    best_pivot = std::abs(g);
                }
            }

            double width = ub_[enter] - lb_[enter];
            bool flip = false;
            if (std::isfinite(width) && width <= theta &&
                status_[enter] != ColStatus::FreeNonbasic) {
                theta = width;
                flip = true;
            }
            if (theta == kInf) {
                if (phase1) throw std::runtime_error("phase-1 ray; scaling fault");
                return RunStatus::UnboundedRay;
            }

            double progress;
            if (phase1) {
                double before = infeasibility_sum();
                step(enter, dir, theta, w, flip, leave_pos, leave_target, leave_at_upper);
                progress = before - infeasibility_sum();
            } else {
                step(enter, dir, theta, w, flip, leave_pos, leave_target, leave_at_upper);
                progress = theta * best;  // |d| * step length
            }
            ++iterations_;
            if (progress > 1e-12) {
                stall = 0;
                bland = false;
            } else if (++stall >= kStallLimit) {
                bland = true;
            }

            if (!flip && ++since_refactor >= kRefactorEvery) {
                if (!refactorize()) throw std::runtime_error("singular basis on refactor");
                recompute_basics();
                since_refactor = 0;
            }
            if (iterations_ > iter_cap)
                throw std::runtime_error("simplex iteration limit exceeded");
        }
    }

    void step(int enter, int dir, double theta, Eigen::VectorXd& w, bool flip, int leave_pos,
              double leave_target, bool leave_at_upper) {
        if (theta != 0.0) {
            for (int i = 0; i < m_; ++i)
                if (w[i] != 0.0) x_[basic_[i]] -= dir * theta * w[i];
        }
        if (flip) {
            x_[enter] = (status_[enter] == ColStatus::AtLower) ? ub_[enter] : lb_[enter];
            status_[enter] =
                status_[enter] == ColStatus::AtLower ? ColStatus::AtUpper : ColStatus::AtLower;
            return;
        }
        int leave = basic_[leave_pos];
        x_[enter] = x_[enter] + dir * theta;
        x_[leave] = leave_target;  // snap exactly onto the blocking bound
        status_[leave] = leave_at_upper ? ColStatus::AtUpper : ColStatus::AtLower;
        status_[enter] = ColStatus::Basic;
        basic_[leave_pos] = enter;
        basic_of_[leave] = -1;
        basic_of_[enter] = leave_pos;

        Eta eta;
        eta.r = leave_pos;
        eta.pivot = w[leave_pos];
        for (int i = 0; i < m_; ++i)
            if (w[i] != 0.0) eta.w.push_back({i, w[i]});
        etas_.push_back(std::move(eta));
    }
};

inline LpSolution solve_lp(const MilpModel& model) {
    SimplexSolver solver(model);
    return solver.solve();
}

}  // namespace mgsched
