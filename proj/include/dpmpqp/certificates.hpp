#pragma once

// LP certificates for candidate active sets.
//
// A candidate A is *optimal* when the LP
//
//     max t  s.t.  F'x0 + H U + G_A' lambda_A = 0,    t e <= lambda_A,
//                  G_A U - E_A x0 - w_A = 0,
//                  G_I U - E_I x0 - w_I + s_I = 0,     t e <= s_I,
//                  0 <= t <= 1
//
// has a solution, and *feasible* when the same LP without the stationarity
// and multiplier rows has one. t* = 0 marks a degenerate set. The cap t <= 1
// keeps the LP bounded and does not change which sets are certified.
//
// build_optimality_lp() / build_feasibility_lp() produce the LP verbatim.
// CertificateTester solves algebraically reduced but equivalent LPs: the
// slacks are substituted out and, for the optimality test, U is eliminated
// through stationarity (H is positive definite), leaving (x0, lambda_A, t).

#include <vector>

#include "dpmpqp/active_set.hpp"
#include "dpmpqp/condense.hpp"
#include "dpmpqp/lp.hpp"

namespace dpmpqp {

inline void check_indices(const CondensedQP& qp, const ActiveSet& a) {
    if (!a.empty() && a.max() > qp.q)
        throw IndexOutOfRange("active set " + a.to_string() + " exceeds q = " + std::to_string(qp.q));
}

/// 0-based inactive rows, in increasing order.
inline std::vector<int> inactive_rows(const CondensedQP& qp, const ActiveSet& a) {
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(qp.q) - a.size());
    auto it = a.begin();
    for (int i = 1; i <= qp.q; ++i) {
        if (it != a.end() && *it == i) {
            ++it;
            continue;
        }
        out.push_back(i - 1);
    }
    return out;
}

/// Column layout of the verbatim optimality LP: [U | x0 | lambda_A | s_I | t].
struct OptimalityLayout {
    int U = 0, x0 = 0, lambda = 0, s = 0, t = 0, size = 0;
};

inline OptimalityLayout optimality_layout(const CondensedQP& qp, const ActiveSet& a) {
    OptimalityLayout L;
    const int nu = qp.N * qp.m;
    const int na = static_cast<int>(a.size());
    L.U = 0;
    L.x0 = nu;
    L.lambda = nu + qp.n;
    L.s = L.lambda + na;
    L.t = L.s + (qp.q - na);
    L.size = L.t + 1;
    return L;
}

inline LpProblem build_optimality_lp(const CondensedQP& qp, const ActiveSet& a) {
    check_indices(qp, a);
    const auto L = optimality_layout(qp, a);
    const int nu = qp.N * qp.m;
    const int na = static_cast<int>(a.size());
    const auto inactive = inactive_rows(qp, a);
    const int ni = static_cast<int>(inactive.size());

    LpProblem lp = LpProblem::free_variables(L.size);
    lp.c[L.t] = -1.0;
    lp.lower[L.t] = 0.0;
    lp.upper[L.t] = 1.0;

    lp.A_eq = Matrix::Zero(nu + na + ni, L.size);
    lp.b_eq = Vector::Zero(nu + na + ni);
    // Stationarity.
    lp.A_eq.block(0, L.U, nu, nu) = qp.H;
    lp.A_eq.block(0, L.x0, nu, qp.n) = qp.F.transpose();
    int k = 0;
    for (int i : a) {
        lp.A_eq.block(0, L.lambda + k, nu, 1) = qp.G.row(i - 1).transpose();
        ++k;
    }
    // Active rows.
    k = 0;
    for (int i : a) {
        const int r = nu + k;
        lp.A_eq.block(r, L.U, 1, nu) = qp.G.row(i - 1);
        lp.A_eq.block(r, L.x0, 1, qp.n) = -qp.E.row(i - 1);
        lp.b_eq[r] = qp.w[i - 1];
        ++k;
    }
    // Inactive rows with slacks.
    for (int j = 0; j < ni; ++j) {
        const int r = nu + na + j;
        const int i = inactive[static_cast<std::size_t>(j)];
        lp.A_eq.block(r, L.U, 1, nu) = qp.G.row(i);
        lp.A_eq.block(r, L.x0, 1, qp.n) = -qp.E.row(i);
        lp.A_eq(r, L.s + j) = 1.0;
        lp.b_eq[r] = qp.w[i];
    }

    // t - lambda <= 0, t - s <= 0.
    lp.A_ub = Matrix::Zero(na + ni, L.size);
    lp.b_ub = Vector::Zero(na + ni);
    for (int j = 0; j < na; ++j) {
        lp.A_ub(j, L.t) = 1.0;
        lp.A_ub(j, L.lambda + j) = -1.0;
    }
    for (int j = 0; j < ni; ++j) {
        lp.A_ub(na + j, L.t) = 1.0;
        lp.A_ub(na + j, L.s + j) = -1.0;
    }
    return lp;
}

/// Column layout of the verbatim feasibility LP: [U | x0 | s_I | t].
inline LpProblem build_feasibility_lp(const CondensedQP& qp, const ActiveSet& a) {
    check_indices(qp, a);
    const int nu = qp.N * qp.m;
    const int na = static_cast<int>(a.size());
    const auto inactive = inactive_rows(qp, a);
    const int ni = static_cast<int>(inactive.size());
    const int cx = nu, cs = nu + qp.n, ct = cs + ni, size = ct + 1;

    LpProblem lp = LpProblem::free_variables(size);
    lp.c[ct] = -1.0;
    lp.lower[ct] = 0.0;
    lp.upper[ct] = 1.0;
    lp.A_eq = Matrix::Zero(na + ni, size);
    lp.b_eq = Vector::Zero(na + ni);
    int k = 0;
    for (int i : a) {
        lp.A_eq.block(k, 0, 1, nu) = qp.G.row(i - 1);
        lp.A_eq.block(k, cx, 1, qp.n) = -qp.E.row(i - 1);
        lp.b_eq[k] = qp.w[i - 1];
        ++k;
    }
    for (int j = 0; j < ni; ++j) {
        const int r = na + j;
        const int i = inactive[static_cast<std::size_t>(j)];
        lp.A_eq.block(r, 0, 1, nu) = qp.G.row(i);
        lp.A_eq.block(r, cx, 1, qp.n) = -qp.E.row(i);
        lp.A_eq(r, cs + j) = 1.0;
        lp.b_eq[r] = qp.w[i];
    }
    lp.A_ub = Matrix::Zero(ni, size);
    lp.b_ub = Vector::Zero(ni);
    for (int j = 0; j < ni; ++j) {
        lp.A_ub(j, ct) = 1.0;
        lp.A_ub(j, cs + j) = -1.0;
    }
    return lp;
}

/// Outcome of one certificate LP.
struct Certificate {
    bool solvable = false;
    double t = 0.0;
    Vector x0;  // parameter attaining t (when solvable)
};

/// Solves the optimality and feasibility LPs for one condensed QP.
class CertificateTester {
public:
    explicit CertificateTester(const CondensedQP& qp) : qp_(&qp) {
        Eigen::LLT<Matrix> llt(qp.H);
        if (llt.info() != Eigen::Success) throw NumericalFailure("CertificateTester: H is not positive definite");
        const Matrix HinvGt = llt.solve(qp.G.transpose());
        const Matrix HinvFt = llt.solve(qp.F.transpose());
        M_ = qp.G * HinvGt;
        M_ = 0.5 * (M_ + M_.transpose()).eval();
        // Row i of the U-eliminated constraint: G_i U - E_i x0 = -M_i lambda - W_i x0.
        W_ = qp.G * HinvFt + qp.E;
    }

    const CondensedQP& qp() const { return *qp_; }

    Certificate optimality(const ActiveSet& a) const {
        check_indices(*qp_, a);
        const auto& qp = *qp_;
        const int n = qp.n;
        const int na = static_cast<int>(a.size());
        const auto inactive = inactive_rows(qp, a);
        const int ni = static_cast<int>(inactive.size());
        const int cl = n, ct = n + na, size = ct + 1;

        LpProblem lp = LpProblem::free_variables(size);
        lp.c[ct] = -1.0;
        lp.lower[ct] = 0.0;
        lp.upper[ct] = 1.0;
        for (int j = 0; j < na; ++j) lp.lower[cl + j] = 0.0;  // implied by lambda >= t >= 0

        lp.A_eq = Matrix::Zero(na, size);
        lp.b_eq = Vector::Zero(na);
        std::vector<int> act(a.begin(), a.end());
        for (int r = 0; r < na; ++r) {
            const int i = act[static_cast<std::size_t>(r)] - 1;
            lp.A_eq.block(r, 0, 1, n) = -W_.row(i);
            for (int c = 0; c < na; ++c) lp.A_eq(r, cl + c) = -M_(i, act[static_cast<std::size_t>(c)] - 1);
            lp.b_eq[r] = qp.w[i];
        }
        lp.A_ub = Matrix::Zero(ni + na, size);
        lp.b_ub = Vector::Zero(ni + na);
        for (int r = 0; r < ni; ++r) {
            const int i = inactive[static_cast<std::size_t>(r)];
            lp.A_ub.block(r, 0, 1, n) = -W_.row(i);
            for (int c = 0; c < na; ++c) lp.A_ub(r, cl + c) = -M_(i, act[static_cast<std::size_t>(c)] - 1);
            lp.A_ub(r, ct) = 1.0;
            lp.b_ub[r] = qp.w[i];
        }
        for (int j = 0; j < na; ++j) {
            lp.A_ub(ni + j, ct) = 1.0;
            lp.A_ub(ni + j, cl + j) = -1.0;
        }
        return finish(solve_lp(lp), ct, n);
    }

    Certificate feasibility(const ActiveSet& a) const {
        check_indices(*qp_, a);
        const auto& qp = *qp_;
        const int nu = qp.N * qp.m, n = qp.n;
        const int na = static_cast<int>(a.size());
        const auto inactive = inactive_rows(qp, a);
        const int ni = static_cast<int>(inactive.size());
        const int cx = nu, ct = nu + n, size = ct + 1;

        LpProblem lp = LpProblem::free_variables(size);
        lp.c[ct] = -1.0;
        lp.lower[ct] = 0.0;
        lp.upper[ct] = 1.0;
        lp.A_eq = Matrix::Zero(na, size);
        lp.b_eq = Vector::Zero(na);
        int r = 0;
        for (int i : a) {
            lp.A_eq.block(r, 0, 1, nu) = qp.G.row(i - 1);
            lp.A_eq.block(r, cx, 1, n) = -qp.E.row(i - 1);
            lp.b_eq[r] = qp.w[i - 1];
            ++r;
        }
        lp.A_ub = Matrix::Zero(ni, size);
        lp.b_ub = Vector::Zero(ni);
        for (int j = 0; j < ni; ++j) {
            const int i = inactive[static_cast<std::size_t>(j)];
            lp.A_ub.block(j, 0, 1, nu) = qp.G.row(i);
            lp.A_ub.block(j, cx, 1, n) = -qp.E.row(i);
            lp.A_ub(j, ct) = 1.0;
            lp.b_ub[j] = qp.w[i];
        }
        Certificate c = finish(solve_lp(lp), ct, n, cx);
        return c;
    }

private:
    const CondensedQP* qp_;
    Matrix M_;
    Matrix W_;

    static Certificate finish(const LpOutcome& out, int ct, int n, int cx = 0) {
        Certificate c;
        if (out.status != LpStatus::Optimal) return c;
        c.solvable = true;
        c.t = out.x[ct];
        c.x0 = out.x.segment(cx, n);
        return c;
    }
};

}  // namespace dpmpqp
