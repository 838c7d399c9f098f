#pragma once

// Dense primal active-set solver for the condensed QP at a fixed x0.
// Independent of the enumeration code; the tests use it as a reference.

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "dpmpqp/condense.hpp"
#include "dpmpqp/lp.hpp"

namespace dpmpqp {

struct QpSolution {
    Vector U;
    std::vector<int> working;  // 1-based rows of the final working set
    Vector lambda;             // multipliers of `working`
    int iterations = 0;
};

/// Starting point: the most interior U of {G U <= E x0 + w} (capped slack).
inline std::optional<Vector> feasible_input(const CondensedQP& qp, const Vector& x0) {
    const auto nu = qp.H.rows();
    LpProblem lp = LpProblem::free_variables(static_cast<int>(nu) + 1);
    lp.c[nu] = -1.0;
    lp.lower[nu] = 0.0;
    lp.upper[nu] = 1.0;
    lp.A_ub = Matrix::Zero(qp.q, nu + 1);
    lp.A_ub.leftCols(nu) = qp.G;
    lp.A_ub.col(nu).setOnes();
    // Parameter-only rows (G_i = 0) get no slack term, so that a state on the
    // boundary of X is still accepted.
    for (int i = 0; i < qp.q; ++i)
        if (qp.G.row(i).cwiseAbs().maxCoeff() == 0.0) lp.A_ub(i, nu) = 0.0;
    lp.b_ub = qp.E * x0 + qp.w;
    const LpOutcome out = solve_lp(lp);
    if (out.status != LpStatus::Optimal) return std::nullopt;
    return Vector(out.x.head(nu));
}

/// Optimal U at x0, or nullopt when x0 is infeasible.
inline std::optional<QpSolution> solve_qp(const CondensedQP& qp, const Vector& x0, int max_iter = 5000) {
    if (x0.size() != qp.n) throw DimensionMismatch("solve_qp: state has wrong dimension");
    const Vector b = qp.E * x0 + qp.w;
    for (int i = 0; i < qp.q; ++i)
        if (qp.G.row(i).cwiseAbs().maxCoeff() == 0.0 && b[i] < -1e-9) return std::nullopt;
    auto start = feasible_input(qp, x0);
    if (!start) return std::nullopt;

    const auto nu = qp.H.rows();
    QpSolution sol;
    sol.U = *start;
    std::vector<int> W;  // 0-based
    const Vector f = qp.F.transpose() * x0;

    for (sol.iterations = 0; sol.iterations < max_iter; ++sol.iterations) {
        const auto nw = static_cast<Eigen::Index>(W.size());
        Matrix K = Matrix::Zero(nu + nw, nu + nw);
        Vector rhs = Vector::Zero(nu + nw);
        K.topLeftCorner(nu, nu) = qp.H;
        for (Eigen::Index r = 0; r < nw; ++r) {
            K.block(nu + r, 0, 1, nu) = qp.G.row(W[static_cast<std::size_t>(r)]);
            K.block(0, nu + r, nu, 1) = qp.G.row(W[static_cast<std::size_t>(r)]).transpose();
        }
        rhs.head(nu) = -(qp.H * sol.U + f);
        const Vector z = K.fullPivLu().solve(rhs);
        const Vector p = z.head(nu);

        if (p.norm() <= 1e-10 * (1.0 + sol.U.norm())) {
            // Lowest-index negative multiplier (Bland) avoids cycling at
            // degenerate vertices.
            const Vector mu = z.tail(nw);
            const double tol = 1e-10 * (1.0 + (nw ? mu.cwiseAbs().maxCoeff() : 0.0));
            Eigen::Index drop = -1;
            for (Eigen::Index r = 0; r < nw; ++r)
                if (mu[r] < -tol && (drop < 0 || W[static_cast<std::size_t>(r)] < W[static_cast<std::size_t>(drop)]))
                    drop = r;
            if (drop < 0) {
                sol.working.clear();
                for (int i : W) sol.working.push_back(i + 1);
                sol.lambda = mu;
                return sol;
            }
            W.erase(W.begin() + drop);
            continue;
        }

        double alpha = 1.0;
        int blocking = -1;
        for (int i = 0; i < qp.q; ++i) {
            if (std::find(W.begin(), W.end(), i) != W.end()) continue;
            const double gp = qp.G.row(i).dot(p);
            if (gp <= 1e-12 * p.norm()) continue;
            const double step = std::max(0.0, b[i] - qp.G.row(i).dot(sol.U)) / gp;
            if (step < alpha - 1e-14) {
                alpha = step;
                blocking = i;
            }
        }
        sol.U += alpha * p;
        if (blocking >= 0) W.push_back(blocking);
    }
    throw NonConvergence("solve_qp: iteration limit reached");
}

}  // namespace dpmpqp
