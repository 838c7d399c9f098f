#pragma once

#include <string>
#include <utility>

#include "dpmpqp/errors.hpp"
#include "dpmpqp/model.hpp"
#include "dpmpqp/types.hpp"

namespace dpmpqp {

/// Condensed QP
///
///     min_U  1/2 x0' Y x0 + x0' F U + 1/2 U' H U   s.t.  G U <= E x0 + w
///
/// Quadratic blocks carry the factor 2 of the OCP cost, i.e. H = 2(S'QS + R)
/// for the stacked prediction matrices.
///
/// Constraint rows follow the stagewise order: for k = 0..N-1 the q_UX rows
/// of stage k are u(k) in U followed by x(k) in X; the last q_T rows are
/// x(N) in T. Rows of x(0) in X have a zero G block. Indices exposed to the
/// enumeration code are 1-based.
struct CondensedQP {
    Matrix Y, F, H, G, E;
    Vector w;
    int N = 0;
    int q = 0;
    int q_UX = 0;
    int q_T = 0;
    int n = 0;
    int m = 0;

    /// Stage of the 1-based constraint index i (N for terminal rows).
    int stage_of(int i) const {
        if (i < 1 || i > q) throw IndexOutOfRange("stage_of: index " + std::to_string(i) + " out of range");
        if (i <= N * q_UX) return (i - 1) / q_UX;
        return N;
    }

    /// Objective value at (x0, U).
    double objective(const Vector& x0, const Vector& U) const {
        return 0.5 * x0.dot(Y * x0) + x0.dot(F * U) + 0.5 * U.dot(H * U);
    }

    /// Largest violation of G U <= E x0 + w.
    double violation(const Vector& x0, const Vector& U) const {
        return (G * U - E * x0 - w).maxCoeff();
    }
};

/// 1-based closed index range [first, last].
struct IndexRange {
    int first = 0;
    int last = -1;
    int size() const { return last - first + 1; }
    bool contains(int i) const { return i >= first && i <= last; }
    bool operator==(const IndexRange&) const = default;
};

/// Rows of stage k (k = N gives the terminal block).
inline IndexRange stage_indices(const CondensedQP& qp, int k) {
    if (k < 0 || k > qp.N) throw StageOutOfRange("stage_indices: stage " + std::to_string(k) + " out of range");
    if (k < qp.N) return {k * qp.q_UX + 1, (k + 1) * qp.q_UX};
    return {qp.N * qp.q_UX + 1, qp.q};
}

/// Eliminates the dynamics of the OCP for horizon N.
inline CondensedQP condense(const Ocp& ocp, int N) {
    if (N < 1) throw InvalidInput("condense: horizon must be >= 1");
    const Matrix& A = ocp.sys.A();
    const Matrix& B = ocp.sys.B();
    const auto n = ocp.n(), m = ocp.m();
    const Weights& wt = ocp.weights;
    if (wt.Q.rows() != n || wt.P.rows() != n || wt.R.rows() != m)
        throw DimensionMismatch("condense: weight dimensions do not match the system");

    // x(k) = Apow[k] x0 + Sblk[k] U for k = 0..N.
    std::vector<Matrix> Apow(N + 1), Sblk(N + 1);
    Apow[0] = Matrix::Identity(n, n);
    Sblk[0] = Matrix::Zero(n, N * m);
    for (int k = 1; k <= N; ++k) {
        Apow[k] = A * Apow[k - 1];
        Sblk[k] = A * Sblk[k - 1];
        Sblk[k].block(0, (k - 1) * m, n, m) += B;
    }

    CondensedQP qp;
    qp.N = N;
    qp.n = static_cast<int>(n);
    qp.m = static_cast<int>(m);
    qp.q_UX = static_cast<int>(ocp.q_UX());
    qp.q_T = static_cast<int>(ocp.q_T());
    qp.q = N * qp.q_UX + qp.q_T;

    qp.H = Matrix::Zero(N * m, N * m);
    qp.F = Matrix::Zero(n, N * m);
    qp.Y = wt.Q;
    for (int k = 1; k <= N; ++k) {
        const Matrix& Wk = (k == N) ? wt.P : wt.Q;
        qp.H += Sblk[k].transpose() * Wk * Sblk[k];
        qp.F += Apow[k].transpose() * Wk * Sblk[k];
        qp.Y += Apow[k].transpose() * Wk * Apow[k];
    }
    for (int k = 0; k < N; ++k) qp.H.block(k * m, k * m, m, m) += wt.R;
    qp.H = (qp.H + qp.H.transpose()).eval();
    qp.F *= 2.0;
    qp.Y = (qp.Y + qp.Y.transpose()).eval();

    const Polytope& U = ocp.U_set;
    const Polytope& X = ocp.X_set;
    const Polytope& T = ocp.T_set;
    qp.G = Matrix::Zero(qp.q, N * m);
    qp.E = Matrix::Zero(qp.q, n);
    qp.w = Vector::Zero(qp.q);
    Eigen::Index row = 0;
    for (int k = 0; k < N; ++k) {
        qp.G.block(row, k * m, U.rows(), m) = U.C();
        qp.w.segment(row, U.rows()) = U.d();
        row += U.rows();
        qp.G.middleRows(row, X.rows()) = X.C() * Sblk[k];
        qp.E.middleRows(row, X.rows()) = -X.C() * Apow[k];
        qp.w.segment(row, X.rows()) = X.d();
        row += X.rows();
    }
    qp.G.middleRows(row, T.rows()) = T.C() * Sblk[N];
    qp.E.middleRows(row, T.rows()) = -T.C() * Apow[N];
    qp.w.segment(row, T.rows()) = T.d();
    return qp;
}

}  // namespace dpmpqp
