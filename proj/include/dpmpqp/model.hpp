#pragma once

#include <cmath>
#include <complex>
#include <string>

#include "dpmpqp/errors.hpp"
#include "dpmpqp/polytope.hpp"
#include "dpmpqp/types.hpp"

namespace dpmpqp {

/// Discrete-time plant x(k+1) = A x(k) + B u(k).
class LinearSystem {
public:
    LinearSystem(Matrix A, Matrix B) : A_(std::move(A)), B_(std::move(B)) {
        if (A_.rows() < 1 || A_.rows() != A_.cols())
            throw DimensionMismatch("LinearSystem: A must be square and nonempty");
        if (B_.rows() != A_.rows() || B_.cols() < 1)
            throw DimensionMismatch("LinearSystem: B must have n rows and m >= 1 columns");
        if (!A_.allFinite() || !B_.allFinite()) throw InvalidInput("LinearSystem: non-finite entry");
        if (!is_stabilizable(A_, B_)) throw NotStabilizable("LinearSystem: (A, B) is not stabilizable");
    }

    const Matrix& A() const { return A_; }
    const Matrix& B() const { return B_; }
    Eigen::Index n() const { return A_.rows(); }
    Eigen::Index m() const { return B_.cols(); }

    /// Hautus test: rank [A - lambda I, B] = n for every eigenvalue with |lambda| >= 1.
    static bool is_stabilizable(const Matrix& A, const Matrix& B, double tol = 1e-8) {
        using Complex = Eigen::MatrixXcd;
        const auto n = A.rows();
        Eigen::ComplexEigenSolver<Complex> es(A.cast<std::complex<double>>());
        for (Eigen::Index i = 0; i < n; ++i) {
            const std::complex<double> lambda = es.eigenvalues()[i];
            if (std::abs(lambda) < 1.0) continue;
            Complex M(n, n + B.cols());
            M.leftCols(n) = A.cast<std::complex<double>>() - lambda * Complex::Identity(n, n);
            M.rightCols(B.cols()) = B.cast<std::complex<double>>();
            Eigen::JacobiSVD<Complex> svd(M);
            const auto& s = svd.singularValues();
            const double smax = std::max(s.maxCoeff(), 1.0);
            if (s[n - 1] <= tol * smax) return false;
        }
        return true;
    }

private:
    Matrix A_;
    Matrix B_;
};

/// Stage and terminal weights together with the unconstrained LQR gain (u = K x).
struct Weights {
    Matrix Q;
    Matrix R;
    Matrix P;
    Matrix K;
};

inline double riccati_residual(const LinearSystem& sys, const Weights& w) {
    const Matrix& A = sys.A();
    const Matrix& B = sys.B();
    const Matrix& P = w.P;
    const Matrix S = w.R + B.transpose() * P * B;
    const Matrix rhs = w.Q + A.transpose() * P * A -
                       A.transpose() * P * B * S.ldlt().solve(B.transpose() * P * A);
    return (P - rhs).norm();
}

/// Discrete algebraic Riccati equation by fixed-point iteration from P = Q.
inline Weights solve_dare(const LinearSystem& sys, const Matrix& Q, const Matrix& R,
                          int max_iterations = 100000) {
    const auto n = sys.n(), m = sys.m();
    if (Q.rows() != n || Q.cols() != n || R.rows() != m || R.cols() != m)
        throw DimensionMismatch("solve_dare: weight dimensions do not match the system");
    if ((Q - Q.transpose()).norm() > 1e-12 * std::max(1.0, Q.norm()) ||
        (R - R.transpose()).norm() > 1e-12 * std::max(1.0, R.norm()))
        throw InvalidInput("solve_dare: Q and R must be symmetric");
    Eigen::SelfAdjointEigenSolver<Matrix> eq(Q), er(R);
    if (eq.eigenvalues().minCoeff() < -1e-12 * std::max(1.0, Q.norm()))
        throw InvalidInput("solve_dare: Q must be positive semidefinite");
    if (er.eigenvalues().minCoeff() <= 0.0) throw InvalidInput("solve_dare: R must be positive definite");

    const Matrix& A = sys.A();
    const Matrix& B = sys.B();
    Matrix P = Q;
    bool converged = false;
    for (int k = 0; k < max_iterations; ++k) {
        const Matrix BtP = B.transpose() * P;
        const Matrix S = R + BtP * B;
        Matrix next = Q + A.transpose() * P * A - (BtP * A).transpose() * S.ldlt().solve(BtP * A);
        next = 0.5 * (next + next.transpose());
        const double step = (next - P).norm();
        const double scale = std::max(1.0, P.norm());
        P = std::move(next);
        if (!P.allFinite()) break;
        if (step <= 1e-12 * scale) {
            converged = true;
            break;
        }
    }
    if (!converged) throw NonConvergence("solve_dare: Riccati iteration did not converge");

    Weights w{Q, R, P, Matrix()};
    const Matrix S = R + B.transpose() * P * B;
    w.K = -S.ldlt().solve(B.transpose() * P * A);
    if (riccati_residual(sys, w) > 1e-9 * std::max(P.norm(), 1e-300))
        throw NonConvergence("solve_dare: Riccati residual above tolerance");
    return w;
}

inline double spectral_radius(const Matrix& M) {
    Eigen::EigenSolver<Matrix> es(M);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

/// Maximal positively invariant set of x(k+1) = (A + B K) x(k) inside
/// {x in X : K x in U}.
///
/// Iterates Omega_{k+1} = Omega_k ∩ {x : C_k (A+BK) x <= d_k} and stops
/// once every new row is redundant.
inline Polytope terminal_set(const LinearSystem& sys, const Matrix& K, const Polytope& X,
                             const Polytope& U, int max_iterations = 500) {
    const auto n = sys.n();
    if (K.rows() != sys.m() || K.cols() != n || X.dim() != n || U.dim() != sys.m())
        throw DimensionMismatch("terminal_set: dimensions do not match the system");
    const Matrix AK = sys.A() + sys.B() * K;
    if (spectral_radius(AK) >= 1.0) throw InvalidInput("terminal_set: A + B K is not Schur stable");

    Polytope omega = remove_redundant(X.intersect(Polytope(U.C() * K, U.d())));
    for (int it = 0; it < max_iterations; ++it) {
        if (omega.trivially_empty() || chebyshev_ball(omega).radius <= 0.0)
            throw EmptyTerminalSet("terminal_set: admissible set is empty");
        const Polytope pre(omega.C() * AK, omega.d());
        const Polytope joint = omega.intersect(pre);

        bool all_redundant = true;
        for (Eigen::Index i = 0; i < pre.rows(); ++i) {
            const double best = support(omega, pre.C().row(i).transpose());
            if (best > pre.d()[i] + 1e-9) {
                all_redundant = false;
                break;
            }
        }
        if (all_redundant) return omega;
        omega = remove_redundant(joint);
    }
    throw NoFiniteDetermination("terminal_set: no finite determination within " +
                                std::to_string(max_iterations) + " iterations");
}

/// Constrained LQR problem data.
struct Ocp {
    LinearSystem sys;
    Polytope U_set;
    Polytope X_set;
    Polytope T_set;
    Weights weights;

    Eigen::Index q_UX() const { return U_set.rows() + X_set.rows(); }
    Eigen::Index q_T() const { return T_set.rows(); }
    Eigen::Index n() const { return sys.n(); }
    Eigen::Index m() const { return sys.m(); }
};

/// Checks that a constraint set is bounded, full-dimensional and has the origin strictly inside.
inline void validate_constraint_set(const Polytope& P, const std::string& name) {
    if (P.trivially_empty() || P.rows() == 0) throw InvalidInput(name + ": empty description");
    if ((P.d().array() <= 0.0).any()) throw InvalidInput(name + ": origin is not strictly interior");
    for (Eigen::Index j = 0; j < P.dim(); ++j) {
        const Vector e = Vector::Unit(P.dim(), j);
        if (!std::isfinite(support(P, e)) || !std::isfinite(support(P, -e)))
            throw InvalidInput(name + ": set is unbounded");
    }
    if (chebyshev_ball(P).radius <= 0.0) throw InvalidInput(name + ": set is not full-dimensional");
}

/// Assembles the OCP: Riccati solution for P and K and the maximal invariant terminal set.
inline Ocp make_ocp(const LinearSystem& sys, const Polytope& U, const Polytope& X, const Matrix& Q,
                    const Matrix& R) {
    if (U.dim() != sys.m() || X.dim() != sys.n())
        throw DimensionMismatch("make_ocp: constraint set dimensions do not match the system");
    validate_constraint_set(U, "U");
    validate_constraint_set(X, "X");
    Weights w = solve_dare(sys, Q, R);
    Polytope T = terminal_set(sys, w.K, X, U);
    return Ocp{sys, U, X, std::move(T), std::move(w)};
}

}  // namespace dpmpqp
