#pragma once

// Dense two-phase primal simplex.
//
// Problem form accepted by solve_lp():
//
//     min  c'x
//     s.t. A_eq x  = b_eq
//          A_ub x <= b_ub
//          lower <= x <= upper        (entries may be +-infinity)
//
// Internally every variable is mapped onto nonnegative columns (shift,
// reflection, or a +/- split for free variables), finite two-sided bounds
// become extra rows, rows are equilibrated, and the resulting standard form
// is solved on a dense tableau. Bland's rule is used for both the entering
// and the leaving variable so the method terminates on degenerate problems.
// The final basic solution is recomputed from the original standard-form
// data with an LU solve to wash out tableau round-off.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "dpmpqp/errors.hpp"
#include "dpmpqp/types.hpp"

namespace dpmpqp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class LpStatus { Optimal, Infeasible, Unbounded };

inline const char* to_string(LpStatus s) {
    switch (s) {
        case LpStatus::Optimal: return "optimal";
        case LpStatus::Infeasible: return "infeasible";
        case LpStatus::Unbounded: return "unbounded";
    }
    return "?";
}

struct LpProblem {
    Vector c;
    Matrix A_eq;
    Vector b_eq;
    Matrix A_ub;
    Vector b_ub;
    Vector lower;
    Vector upper;

    /// Creates an empty problem over `n` free variables.
    static LpProblem free_variables(Eigen::Index n) {
        LpProblem p;
        p.c = Vector::Zero(n);
        p.A_eq.resize(0, n);
        p.b_eq.resize(0);
        p.A_ub.resize(0, n);
        p.b_ub.resize(0);
        p.lower = Vector::Constant(n, -kInf);
        p.upper = Vector::Constant(n, kInf);
        return p;
    }

    Eigen::Index num_vars() const { return c.size(); }

    void validate() const {
        const auto n = num_vars();
        if (A_eq.cols() != n || A_ub.cols() != n || lower.size() != n || upper.size() != n ||
            A_eq.rows() != b_eq.size() || A_ub.rows() != b_ub.size()) {
            throw DimensionMismatch("LpProblem: inconsistent dimensions");
        }
        if (!c.allFinite() || !A_eq.allFinite() || !b_eq.allFinite() || !A_ub.allFinite() ||
            !b_ub.allFinite()) {
            throw InvalidInput("LpProblem: non-finite coefficient");
        }
        for (Eigen::Index j = 0; j < n; ++j) {
            if (std::isnan(lower[j]) || std::isnan(upper[j]) || lower[j] > upper[j] ||
                lower[j] == kInf || upper[j] == -kInf) {
                throw InvalidInput("LpProblem: invalid bounds on variable " + std::to_string(j));
            }
        }
    }
};

struct LpOutcome {
    LpStatus status = LpStatus::Infeasible;
    Vector x;                    // valid when Optimal
    double objective = kInf;     // valid when Optimal
    double max_residual = 0.0;   // largest primal violation of the original rows/bounds
    int iterations = 0;
};

struct LpOptions {
    double feasibility_tol = 1e-9;
    double optimality_tol = 1e-9;
    double pivot_tol = 1e-11;
    int max_iterations = 100000;
};

/// Largest violation of the equality, inequality and bound constraints at x.
inline double primal_residual(const LpProblem& p, const Vector& x) {
    double r = 0.0;
    if (p.A_eq.rows() > 0) r = std::max(r, (p.A_eq * x - p.b_eq).cwiseAbs().maxCoeff());
    if (p.A_ub.rows() > 0) r = std::max(r, (p.A_ub * x - p.b_ub).maxCoeff());
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        r = std::max(r, p.lower[j] - x[j]);
        r = std::max(r, x[j] - p.upper[j]);
    }
    return r;
}

namespace detail {

// x_j = shift + sign * y[pos] - (neg >= 0 ? y[neg] : 0)
struct VarMap {
    double shift = 0.0;
    double sign = 1.0;
    int pos = -1;
    int neg = -1;
};

class Simplex {
public:
    Simplex(const LpProblem& p, const LpOptions& opt) : prob_(p), opt_(opt) { build(); }

    LpOutcome run() {
        LpOutcome out;
        if (!phase_one(out)) return out;
        phase_two(out);
        return out;
    }

private:
    const LpProblem& prob_;
    LpOptions opt_;

    std::vector<VarMap> map_;
    int n_struct_ = 0;   // structural standard-form columns
    int n_cols_ = 0;     // structural + slack + artificial
    int first_art_ = 0;
    int rows_ = 0;

    Matrix A0_;          // standard-form matrix (after scaling/flips), rows_ x n_cols_
    Vector b0_;
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> T_;
    std::vector<int> basis_;
    int iterations_ = 0;

    void build() {
        const auto n = static_cast<int>(prob_.num_vars());
        map_.resize(n);
        int col = 0;
        int bound_rows = 0;
        for (int j = 0; j < n; ++j) {
            const double l = prob_.lower[j], u = prob_.upper[j];
            VarMap& m = map_[j];
            if (std::isfinite(l)) {
                m.shift = l;
                m.pos = col++;
                if (std::isfinite(u)) ++bound_rows;
            } else if (std::isfinite(u)) {
                m.shift = u;
                m.sign = -1.0;
                m.pos = col++;
            } else {
                m.pos = col++;
                m.neg = col++;
            }
        }
        n_struct_ = col;

        const int m_eq = static_cast<int>(prob_.A_eq.rows());
        const int m_ub = static_cast<int>(prob_.A_ub.rows());
        rows_ = m_eq + m_ub + bound_rows;
        const int n_slack = m_ub + bound_rows;

        // Row data before slacks/artificials.
        Matrix S = Matrix::Zero(rows_, n_struct_);
        Vector rhs(rows_);
        std::vector<bool> has_slack(rows_, false);
        auto fill = [&](int r, const auto& arow, double b) {
            double shift_sum = 0.0;
            for (int j = 0; j < n; ++j) {
                const double a = arow(j);
                if (a == 0.0) continue;
                const VarMap& m = map_[j];
                shift_sum += a * m.shift;
                S(r, m.pos) += a * m.sign;
                if (m.neg >= 0) S(r, m.neg) -= a;
            }
            rhs[r] = b - shift_sum;
        };
        int r = 0;
        for (int i = 0; i < m_eq; ++i, ++r) fill(r, prob_.A_eq.row(i), prob_.b_eq[i]);
        for (int i = 0; i < m_ub; ++i, ++r) {
            fill(r, prob_.A_ub.row(i), prob_.b_ub[i]);
            has_slack[r] = true;
        }
        for (int j = 0; j < n; ++j) {
            const double l = prob_.lower[j], u = prob_.upper[j];
            if (std::isfinite(l) && std::isfinite(u)) {
                S(r, map_[j].pos) = 1.0;
                rhs[r] = u - l;
                has_slack[r] = true;
                ++r;
            }
        }

        // Equilibrate and orient rows so that rhs >= 0.
        std::vector<double> slack_sign(rows_, 0.0);
        for (int i = 0; i < rows_; ++i) {
            double scale = n_struct_ > 0 ? S.row(i).cwiseAbs().maxCoeff() : 1.0;
            if (scale < 1e-300) scale = 1.0;
            double s = 1.0 / scale;
            if (rhs[i] < 0.0) s = -s;
            S.row(i) *= s;
            rhs[i] *= s;
            if (has_slack[i]) slack_sign[i] = s > 0.0 ? 1.0 : -1.0;
        }

        // Rows whose slack enters with +1 start with the slack basic; every
        // other row gets an artificial.
        int n_art = 0;
        for (int i = 0; i < rows_; ++i)
            if (slack_sign[i] <= 0.0) ++n_art;
        first_art_ = n_struct_ + n_slack;
        n_cols_ = first_art_ + n_art;

        A0_ = Matrix::Zero(rows_, n_cols_);
        A0_.leftCols(n_struct_) = S;
        b0_ = rhs;
        basis_.assign(rows_, -1);
        int slack_col = n_struct_;
        int art_col = first_art_;
        for (int i = 0; i < rows_; ++i) {
            if (has_slack[i]) {
                A0_(i, slack_col) = slack_sign[i];
                if (slack_sign[i] > 0.0) basis_[i] = slack_col;
                ++slack_col;
            }
            if (basis_[i] < 0) {
                A0_(i, art_col) = 1.0;
                basis_[i] = art_col++;
            }
        }

        T_.resize(rows_ + 1, n_cols_ + 1);
        T_.topLeftCorner(rows_, n_cols_) = A0_;
        T_.topRightCorner(rows_, 1) = b0_;
        T_.row(rows_).setZero();
    }

    bool is_artificial(int j) const { return j >= first_art_; }

    void pivot(int r, int c) {
        const double p = T_(r, c);
        T_.row(r) /= p;
        for (int i = 0; i <= rows_; ++i) {
            if (i == r) continue;
            const double f = T_(i, c);
            if (f != 0.0) T_.row(i).noalias() -= f * T_.row(r);
            T_(i, c) = 0.0;
        }
        basis_[r] = c;
        ++iterations_;
        if (iterations_ > opt_.max_iterations)
            throw NumericalFailure("simplex: iteration limit exceeded");
    }

    // Objective row holds reduced costs; T_(rows_, n_cols_) holds -objective.
    void set_objective(const Vector& cost) {
        T_.row(rows_).setZero();
        T_.block(rows_, 0, 1, n_cols_) = cost.transpose();
        for (int i = 0; i < rows_; ++i) {
            const double cb = cost[basis_[i]];
            if (cb != 0.0) T_.row(rows_).noalias() -= cb * T_.row(i);
        }
    }

    enum class Step { Optimal, Unbounded };

    Step iterate(bool allow_artificial) {
        for (;;) {
            int enter = -1;
            for (int j = 0; j < n_cols_; ++j) {
                if (!allow_artificial && is_artificial(j)) continue;
                if (T_(rows_, j) < -opt_.optimality_tol) {
                    enter = j;
                    break;
                }
            }
            if (enter < 0) return Step::Optimal;

            double best = kInf;
            double biggest = 0.0;
            for (int i = 0; i < rows_; ++i) {
                const double a = T_(i, enter);
                biggest = std::max(biggest, a);
                if (a <= opt_.pivot_tol) continue;
                best = std::min(best, std::max(T_(i, n_cols_), 0.0) / a);
            }
            int leave = -1;
            for (int i = 0; i < rows_ && best < kInf; ++i) {
                const double a = T_(i, enter);
                if (a <= opt_.pivot_tol) continue;
                const double ratio = std::max(T_(i, n_cols_), 0.0) / a;
                if (ratio <= best + 1e-12 * (1.0 + best) && (leave < 0 || basis_[i] < basis_[leave]))
                    leave = i;
            }
            if (leave < 0) {
                if (biggest > 0.0 && biggest > 1e-14)
                    throw NumericalFailure("simplex: pivot below tolerance with no admissible alternative");
                return Step::Unbounded;
            }
            pivot(leave, enter);
        }
    }

    // Solves B x_B = b with the original data for the current basis.
    Vector basic_solution() const {
        Matrix B(rows_, rows_);
        for (int i = 0; i < rows_; ++i) B.col(i) = A0_.col(basis_[i]);
        Eigen::FullPivLU<Matrix> lu(B);
        Vector xb;
        if (lu.isInvertible()) {
            xb = lu.solve(b0_);
        } else {
            xb = T_.topRightCorner(rows_, 1);
        }
        Vector y = Vector::Zero(n_cols_);
        for (int i = 0; i < rows_; ++i) y[basis_[i]] = xb[i];
        return y;
    }

    Vector to_original(const Vector& y) const {
        Vector x(map_.size());
        for (std::size_t j = 0; j < map_.size(); ++j) {
            const VarMap& m = map_[j];
            double v = m.shift + m.sign * std::max(y[m.pos], 0.0);
            if (m.neg >= 0) v -= std::max(y[m.neg], 0.0);
            x[static_cast<Eigen::Index>(j)] = v;
        }
        return x;
    }

    bool phase_one(LpOutcome& out) {
        if (first_art_ == n_cols_) return true;
        Vector cost = Vector::Zero(n_cols_);
        cost.tail(n_cols_ - first_art_).setOnes();
        set_objective(cost);
        iterate(true);
        const double infeas = -T_(rows_, n_cols_);
        if (infeas > opt_.feasibility_tol) {
            out.status = LpStatus::Infeasible;
            out.iterations = iterations_;
            return false;
        }
        // Drive zero-level artificials out of the basis where possible.
        for (int i = 0; i < rows_; ++i) {
            if (!is_artificial(basis_[i])) continue;
            int best = -1;
            double mag = opt_.pivot_tol;
            for (int j = 0; j < first_art_; ++j) {
                const double a = std::abs(T_(i, j));
                if (a > mag * 1e3) {
                    best = j;
                    break;
                }
            }
            if (best >= 0) pivot(i, best);
        }
        return true;
    }

    void phase_two(LpOutcome& out) {
        Vector cost = Vector::Zero(n_cols_);
        const auto n = map_.size();
        for (std::size_t j = 0; j < n; ++j) {
            const double cj = prob_.c[static_cast<Eigen::Index>(j)];
            const VarMap& m = map_[j];
            cost[m.pos] += cj * m.sign;
            if (m.neg >= 0) cost[m.neg] -= cj;
        }
        set_objective(cost);
        const Step s = iterate(false);
        out.iterations = iterations_;
        if (s == Step::Unbounded) {
            out.status = LpStatus::Unbounded;
            return;
        }
        out.status = LpStatus::Optimal;
        out.x = to_original(basic_solution());
        out.objective = prob_.c.dot(out.x);
        out.max_residual = primal_residual(prob_, out.x);
    }
};

}  // namespace detail

/// Solves `p` with the two-phase simplex method. Deterministic for fixed input.
inline LpOutcome solve_lp(const LpProblem& p, const LpOptions& opt = {}) {
    p.validate();
    detail::Simplex s(p, opt);
    return s.run();
}

}  // namespace dpmpqp
