#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <utility>
#include <vector>

#include "dpmpqp/errors.hpp"
#include "dpmpqp/lp.hpp"
#include "dpmpqp/types.hpp"

namespace dpmpqp {

/// H-representation {z : C z <= d} with unit-norm rows.
///
/// Rows whose norm falls below `kZeroRow` are not directions; they are
/// dropped when 0 <= d holds and otherwise collapse the polytope to the
/// canonical empty set (a single row 0'z <= -1).
class Polytope {
public:
    static constexpr double kZeroRow = 1e-12;

    Polytope() = default;

    Polytope(const Matrix& C, const Vector& d) {
        if (C.rows() != d.size()) throw DimensionMismatch("Polytope: rows(C) != size(d)");
        dim_ = C.cols();
        std::vector<Eigen::Index> keep;
        bool empty = false;
        Vector norms(C.rows());
        for (Eigen::Index i = 0; i < C.rows(); ++i) {
            norms[i] = C.row(i).norm();
            if (norms[i] < kZeroRow) {
                if (d[i] < -kZeroRow) empty = true;
            } else {
                keep.push_back(i);
            }
        }
        if (empty) {
            C_ = Matrix::Zero(1, dim_);
            d_ = Vector::Constant(1, -1.0);
            empty_ = true;
            return;
        }
        C_.resize(static_cast<Eigen::Index>(keep.size()), dim_);
        d_.resize(static_cast<Eigen::Index>(keep.size()));
        for (std::size_t k = 0; k < keep.size(); ++k) {
            const auto i = keep[k];
            const auto r = static_cast<Eigen::Index>(k);
            C_.row(r) = C.row(i) / norms[i];
            d_[r] = d[i] / norms[i];
        }
    }

    /// Takes (C, d) as given; used when reloading rows that are already normalized.
    static Polytope trusted(const Matrix& C, const Vector& d) {
        if (C.rows() != d.size()) throw DimensionMismatch("Polytope: rows(C) != size(d)");
        Polytope p;
        p.C_ = C;
        p.d_ = d;
        p.dim_ = C.cols();
        return p;
    }

    /// Axis-aligned box lo <= z <= hi, rows ordered [I; -I].
    static Polytope box(const Vector& lo, const Vector& hi) {
        const auto n = lo.size();
        Matrix C(2 * n, n);
        C << Matrix::Identity(n, n), -Matrix::Identity(n, n);
        Vector d(2 * n);
        d << hi, -lo;
        return Polytope(C, d);
    }

    const Matrix& C() const { return C_; }
    const Vector& d() const { return d_; }
    Eigen::Index dim() const { return dim_; }
    Eigen::Index rows() const { return C_.rows(); }
    bool trivially_empty() const { return empty_; }

    /// min_i (d_i - c_i' z); nonnegative iff z is inside.
    double margin(const Vector& z) const {
        if (rows() == 0) return kInf;
        return (d_ - C_ * z).minCoeff();
    }

    bool contains(const Vector& z, double tol = 1e-9) const { return margin(z) >= -tol; }

    Polytope intersect(const Polytope& other) const {
        if (other.dim() != dim_) throw DimensionMismatch("Polytope::intersect: dimension mismatch");
        Matrix C(rows() + other.rows(), dim_);
        C << C_, other.C_;
        Vector d(rows() + other.rows());
        d << d_, other.d_;
        return Polytope(C, d);
    }

    /// Rows in `keep`, in the given order.
    Polytope select(const std::vector<Eigen::Index>& keep) const {
        Polytope p;
        p.dim_ = dim_;
        p.empty_ = empty_;
        p.C_.resize(static_cast<Eigen::Index>(keep.size()), dim_);
        p.d_.resize(static_cast<Eigen::Index>(keep.size()));
        for (std::size_t k = 0; k < keep.size(); ++k) {
            p.C_.row(static_cast<Eigen::Index>(k)) = C_.row(keep[k]);
            p.d_[static_cast<Eigen::Index>(k)] = d_[keep[k]];
        }
        return p;
    }

private:
    Matrix C_;
    Vector d_;
    Eigen::Index dim_ = 0;
    bool empty_ = false;
};

struct ChebyshevBall {
    Vector center;
    double radius = -kInf;  // negative when the polytope is empty
};

/// Largest inscribed ball. The radius is capped at `cap` for unbounded sets.
inline ChebyshevBall chebyshev_ball(const Polytope& P, double cap = 1e6) {
    ChebyshevBall ball;
    if (P.trivially_empty()) return ball;
    const auto n = P.dim();
    LpProblem lp = LpProblem::free_variables(n + 1);
    lp.c[n] = -1.0;
    lp.upper[n] = cap;
    lp.lower[n] = -cap;
    lp.A_ub.resize(P.rows(), n + 1);
    lp.A_ub.leftCols(n) = P.C();
    lp.A_ub.col(n).setOnes();
    lp.b_ub = P.d();
    const LpOutcome out = solve_lp(lp);
    if (out.status != LpStatus::Optimal) return ball;
    ball.center = out.x.head(n);
    ball.radius = out.x[n];
    return ball;
}

/// Maximizes `c'z` over P. Returns +inf when unbounded, -inf when empty.
inline double support(const Polytope& P, const Vector& c, Vector* argmax = nullptr) {
    LpProblem lp = LpProblem::free_variables(P.dim());
    lp.c = -c;
    lp.A_ub = P.C();
    lp.b_ub = P.d();
    const LpOutcome out = solve_lp(lp);
    if (out.status == LpStatus::Infeasible) return -kInf;
    if (out.status == LpStatus::Unbounded) return kInf;
    if (argmax) *argmax = out.x;
    return -out.objective;
}

/// Removes redundant rows, one LP per row.
///
/// Row i is dropped when max c_i'z over the remaining rows (row i relaxed by
/// one unit to keep the LP bounded) is at most d_i + tol. A negative `tol`
/// keeps rows that are only marginally redundant.
inline Polytope remove_redundant(const Polytope& P, double tol = 1e-9) {
    if (P.trivially_empty() || P.rows() == 0) return P;
    const auto m = P.rows();
    std::vector<bool> alive(static_cast<std::size_t>(m), true);

    // Exact duplicates first; they would otherwise be decided by round-off.
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < i; ++j) {
            if (!alive[static_cast<std::size_t>(j)]) continue;
            if ((P.C().row(i) - P.C().row(j)).cwiseAbs().maxCoeff() < 1e-12) {
                if (P.d()[i] >= P.d()[j]) {
                    alive[static_cast<std::size_t>(i)] = false;
                } else {
                    alive[static_cast<std::size_t>(j)] = false;
                }
                break;
            }
        }
    }

    for (Eigen::Index i = 0; i < m; ++i) {
        if (!alive[static_cast<std::size_t>(i)]) continue;
        std::vector<Eigen::Index> others;
        for (Eigen::Index j = 0; j < m; ++j)
            if (j != i && alive[static_cast<std::size_t>(j)]) others.push_back(j);
        const auto k = static_cast<Eigen::Index>(others.size());
        LpProblem lp = LpProblem::free_variables(P.dim());
        lp.c = -P.C().row(i).transpose();
        lp.A_ub.resize(k + 1, P.dim());
        lp.b_ub.resize(k + 1);
        for (Eigen::Index r = 0; r < k; ++r) {
            lp.A_ub.row(r) = P.C().row(others[static_cast<std::size_t>(r)]);
            lp.b_ub[r] = P.d()[others[static_cast<std::size_t>(r)]];
        }
        lp.A_ub.row(k) = P.C().row(i);
        lp.b_ub[k] = P.d()[i] + 1.0;
        const LpOutcome out = solve_lp(lp);
        if (out.status == LpStatus::Infeasible) return Polytope(Matrix::Zero(1, P.dim()), Vector::Constant(1, -1.0));
        if (out.status == LpStatus::Optimal && -out.objective <= P.d()[i] + tol)
            alive[static_cast<std::size_t>(i)] = false;
    }
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < m; ++i)
        if (alive[static_cast<std::size_t>(i)]) keep.push_back(i);
    return P.select(keep);
}

/// Tight axis-aligned bounds. Throws if P is empty or unbounded.
inline std::pair<Vector, Vector> bounding_box(const Polytope& P) {
    const auto n = P.dim();
    Vector lo(n), hi(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const Vector e = Vector::Unit(n, j);
        hi[j] = support(P, e);
        lo[j] = -support(P, -e);
        if (!std::isfinite(hi[j]) || !std::isfinite(lo[j]))
            throw InvalidInput("bounding_box: polytope is empty or unbounded");
    }
    return {lo, hi};
}

/// Uniform samples by rejection from the bounding box.
template <class Rng>
std::vector<Vector> sample_uniform(const Polytope& P, std::size_t count, Rng& rng,
                                   std::size_t max_tries = 10000000) {
    const auto [lo, hi] = bounding_box(P);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Vector> out;
    out.reserve(count);
    std::size_t tries = 0;
    while (out.size() < count && tries++ < max_tries) {
        Vector z(P.dim());
        for (Eigen::Index j = 0; j < z.size(); ++j) z[j] = lo[j] + (hi[j] - lo[j]) * unit(rng);
        if (P.contains(z, 0.0)) out.push_back(std::move(z));
    }
    return out;
}

}  // namespace dpmpqp
