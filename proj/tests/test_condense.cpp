#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"

using namespace dpmpqp;
using fixtures::vec;

namespace {

// H = 2 (S' Qbar S + Rbar) with explicitly stacked prediction matrices.
Matrix naive_hessian(const Ocp& ocp, int N) {
    const auto n = ocp.n(), m = ocp.m();
    Matrix S = Matrix::Zero(N * n, N * m);  // rows x(1..N)
    for (int k = 1; k <= N; ++k)
        for (int j = 0; j < k; ++j) {
            Matrix Apow = Matrix::Identity(n, n);
            for (int p = 0; p < k - 1 - j; ++p) Apow = Apow * ocp.sys.A();
            S.block((k - 1) * n, j * m, n, m) = Apow * ocp.sys.B();
        }
    Matrix Qbar = Matrix::Zero(N * n, N * n), Rbar = Matrix::Zero(N * m, N * m);
    for (int k = 0; k < N; ++k) {
        Qbar.block(k * n, k * n, n, n) = (k == N - 1) ? ocp.weights.P : ocp.weights.Q;
        Rbar.block(k * m, k * m, m, m) = ocp.weights.R;
    }
    return 2.0 * (S.transpose() * Qbar * S + Rbar);
}

// Stagewise residuals c'z - d of all OCP constraints by forward simulation.
Vector simulated_residuals(const Ocp& ocp, const Vector& x0, const Vector& U, int N) {
    const auto m = ocp.m();
    const auto qux = ocp.q_UX();
    Vector r(N * qux + ocp.q_T());
    Vector x = x0;
    Eigen::Index row = 0;
    for (int k = 0; k < N; ++k) {
        const Vector u = U.segment(k * m, m);
        r.segment(row, ocp.U_set.rows()) = ocp.U_set.C() * u - ocp.U_set.d();
        row += ocp.U_set.rows();
        r.segment(row, ocp.X_set.rows()) = ocp.X_set.C() * x - ocp.X_set.d();
        row += ocp.X_set.rows();
        x = ocp.sys.A() * x + ocp.sys.B() * u;
    }
    r.tail(ocp.q_T()) = ocp.T_set.C() * x - ocp.T_set.d();
    return r;
}

}  // namespace

TEST(Condense, SizesAndSymmetry) {
    const Ocp& ocp = fixtures::double_integrator();
    for (int N : {1, 2, 5}) {
        const CondensedQP qp = condense(ocp, N);
        EXPECT_EQ(qp.q_UX, 6);
        EXPECT_EQ(qp.q, N * qp.q_UX + qp.q_T);
        EXPECT_EQ(qp.G.rows(), qp.q);
        EXPECT_EQ(qp.G.cols(), N);
        EXPECT_EQ(qp.E.rows(), qp.q);
        EXPECT_LT((qp.H - qp.H.transpose()).norm(), 1e-12);
        EXPECT_GT(Eigen::SelfAdjointEigenSolver<Matrix>(qp.H).eigenvalues().minCoeff(), 1e-10);
    }
    EXPECT_EQ(condense(ocp, 1).q, 6 + static_cast<int>(ocp.q_T()));
    EXPECT_THROW(condense(ocp, 0), InvalidInput);
}

TEST(Condense, HessianMatchesNaiveStacking) {
    const Ocp& ocp = fixtures::double_integrator();
    for (int N : {1, 3, 7}) {
        const CondensedQP qp = condense(ocp, N);
        const Matrix Hn = naive_hessian(ocp, N);
        EXPECT_LT((qp.H - Hn).norm(), 1e-10 * Hn.norm()) << "N = " << N;
    }
}

TEST(Condense, ObjectiveMatchesForwardSimulation) {
    const Ocp& ocp = fixtures::double_integrator();
    std::mt19937_64 rng(1);
    std::normal_distribution<double> g(0.0, 3.0);
    for (int N : {1, 4}) {
        const CondensedQP qp = condense(ocp, N);
        for (int s = 0; s < 100; ++s) {
            Vector x0(2), U(N);
            for (auto& v : x0) v = g(rng);
            for (auto& v : U) v = g(rng);
            const double J = fixtures::simulated_cost(ocp, x0, U, N);
            EXPECT_NEAR(qp.objective(x0, U), J, 1e-8 * std::max(1.0, std::abs(J)));
        }
    }
}

TEST(Condense, ConstraintsMatchForwardSimulation) {
    const Ocp& ocp = fixtures::double_integrator();
    std::mt19937_64 rng(2);
    for (int N : {1, 3}) {
        const CondensedQP qp = condense(ocp, N);
        int inside = 0;
        for (int s = 0; s < 100; ++s) {
            // small scales make both outcomes occur
            const double scale = (s % 2) ? 0.2 : 2.0;
            std::uniform_real_distribution<double> uni(-scale, scale);
            Vector x0(2), U(N);
            for (auto& v : x0) v = uni(rng);
            for (auto& v : U) v = uni(rng) / 2.0;
            const Vector sim = simulated_residuals(ocp, x0, U, N);
            const Vector cond = qp.G * U - qp.E * x0 - qp.w;
            EXPECT_LT((sim - cond).cwiseAbs().maxCoeff(), 1e-9);
            const bool ok_sim = sim.maxCoeff() <= 1e-9;
            const bool ok_cond = qp.violation(x0, U) <= 1e-9;
            EXPECT_EQ(ok_sim, ok_cond);
            inside += ok_sim;
        }
        EXPECT_GT(inside, 0);
        EXPECT_LT(inside, 100);
    }
}

TEST(Condense, StagewiseOrder) {
    const Ocp& ocp = fixtures::double_integrator();
    const CondensedQP qp = condense(ocp, 3);
    // row 1: u(0) <= 1, row 2: -u(0) <= 1, rows 3..6: x(0) in X, no U dependence
    EXPECT_DOUBLE_EQ(qp.G(0, 0), 1.0);
    EXPECT_DOUBLE_EQ(qp.G(1, 0), -1.0);
    EXPECT_EQ(qp.G.middleRows(2, 4).norm(), 0.0);
    EXPECT_LT((qp.E.middleRows(2, 4) + ocp.X_set.C()).norm(), 1e-15);
    // stage 1 input rows select u(1)
    EXPECT_DOUBLE_EQ(qp.G(6, 1), 1.0);
    EXPECT_DOUBLE_EQ(qp.G(7, 1), -1.0);
    EXPECT_EQ(qp.stage_of(1), 0);
    EXPECT_EQ(qp.stage_of(6), 0);
    EXPECT_EQ(qp.stage_of(7), 1);
    EXPECT_EQ(qp.stage_of(18), 2);
    EXPECT_EQ(qp.stage_of(19), 3);
    EXPECT_EQ(qp.stage_of(qp.q), 3);
    EXPECT_THROW(qp.stage_of(0), IndexOutOfRange);
    EXPECT_THROW(qp.stage_of(qp.q + 1), IndexOutOfRange);
}

TEST(Condense, PrefixStableAcrossHorizons) {
    const Ocp& ocp = fixtures::double_integrator();
    const CondensedQP q1 = condense(ocp, 1), q2 = condense(ocp, 2);
    const int r = q1.q_UX;
    EXPECT_EQ(q1.w.head(r), q2.w.head(r));
    EXPECT_EQ(q1.E.topRows(r), q2.E.topRows(r));
    EXPECT_EQ(q1.G.topRows(r), q2.G.topLeftCorner(r, 1));
    EXPECT_EQ(q2.G.block(0, 1, r, 1).norm(), 0.0);
}

TEST(Condense, StageIndices) {
    const Ocp& ocp = fixtures::double_integrator();
    const CondensedQP qp = condense(ocp, 6);
    EXPECT_EQ(stage_indices(qp, 0), (IndexRange{1, 6}));
    EXPECT_EQ(stage_indices(qp, 1), (IndexRange{7, 12}));
    EXPECT_EQ(stage_indices(qp, 6), (IndexRange{37, qp.q}));
    EXPECT_THROW(stage_indices(qp, 7), StageOutOfRange);
    EXPECT_THROW(stage_indices(qp, -1), StageOutOfRange);

    CondensedQP shape;  // bookkeeping only
    shape.N = 3;
    shape.q_UX = 6;
    shape.q_T = 8;
    shape.q = 26;
    EXPECT_EQ(stage_indices(shape, 3), (IndexRange{19, 26}));
    EXPECT_EQ(stage_indices(shape, 3).size(), 8);
}
