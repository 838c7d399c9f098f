#pragma once

#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "dpmpqp.hpp"

namespace fixtures {

using namespace dpmpqp;

inline Matrix mat(int r, int c, std::initializer_list<double> v) {
    Matrix M(r, c);
    auto it = v.begin();
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) M(i, j) = *it++;
    return M;
}

inline Vector vec(std::initializer_list<double> v) {
    Vector x(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double d : v) x[i++] = d;
    return x;
}

// |u| <= 1, |x1| <= 25, |x2| <= 5, Q = I, R = 0.1.
inline const Ocp& double_integrator() {
    static const Ocp ocp = [] {
        LinearSystem sys(mat(2, 2, {1, 1, 0, 1}), mat(2, 1, {0.5, 1}));
        return make_ocp(sys, Polytope::box(vec({-1}), vec({1})), Polytope::box(vec({-25, -5}), vec({25, 5})),
                        Matrix::Identity(2, 2), mat(1, 1, {0.1}));
    }();
    return ocp;
}


/// Uniform samples of X that the QP oracle reports feasible at horizon N.
inline std::vector<Vector> feasible_states(const Ocp& ocp, const CondensedQP& qp, std::size_t count,
                                           std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const auto [lo, hi] = bounding_box(ocp.X_set);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::vector<Vector> out;
    while (out.size() < count) {
        Vector x(lo.size());
        for (Eigen::Index j = 0; j < x.size(); ++j) x[j] = lo[j] + (hi[j] - lo[j]) * uni(rng);
        if (solve_qp(qp, x)) out.push_back(x);
    }
    return out;
}

/// Naive forward simulation of the OCP cost.
inline double simulated_cost(const Ocp& ocp, const Vector& x0, const Vector& U, int N) {
    const auto m = ocp.m();
    Vector x = x0;
    double J = 0.0;
    for (int k = 0; k < N; ++k) {
        const Vector u = U.segment(k * m, m);
        J += x.dot(ocp.weights.Q * x) + u.dot(ocp.weights.R * u);
        x = ocp.sys.A() * x + ocp.sys.B() * u;
    }
    return J + x.dot(ocp.weights.P * x);
}

}  // namespace fixtures

namespace fixtures {

struct ContinuityReport {
    int pairs = 0;
    int points = 0;
    double worst = 0.0;
};

/// Walks from random interior points of random regions to a facet, finds the
/// region across it and compares both affine laws along the shared segment.
/// Two-dimensional partitions only.
inline ContinuityReport facet_continuity(const PwaLaw& law, int want_pairs, int points_per_pair,
                                         std::uint64_t seed, int max_tries = 200000) {
    ContinuityReport rep;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, law.regions.size() - 1);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (int tries = 0; tries < max_tries && rep.pairs < want_pairs; ++tries) {
        const std::size_t i = pick(rng);
        const Region& ri = law.regions[i];
        const double ang = 2.0 * M_PI * uni(rng), rad = 0.9 * ri.radius * std::sqrt(uni(rng));
        const Vector p0 = ri.center + rad * vec({std::cos(ang), std::sin(ang)});
        const double phi = 2.0 * M_PI * uni(rng);
        const Vector dir = vec({std::cos(phi), std::sin(phi)});
        const Matrix& C = ri.polytope.C();
        const Vector& d = ri.polytope.d();
        double step = kInf;
        Eigen::Index row = -1;
        for (Eigen::Index r = 0; r < C.rows(); ++r) {
            const double cd = C.row(r).dot(dir);
            if (cd <= 1e-12) continue;
            const double s = (d[r] - C.row(r).dot(p0)) / cd;
            if (s < step) step = s, row = r;
        }
        if (row < 0) continue;
        const Vector b = p0 + step * dir;
        const auto j = locate(law, b + 1e-6 * dir);
        if (!j || *j == i) continue;
        const auto key = std::minmax(i, *j);
        if (seen.count(key)) continue;

        // shared segment on the line c_row' x = d_row
        const Vector t = vec({-C(row, 1), C(row, 0)});
        double lo = -kInf, hi = kInf;
        bool on_line = true;
        for (const Polytope* P : {&ri.polytope, &law.regions[*j].polytope}) {
            for (Eigen::Index r = 0; r < P->rows(); ++r) {
                const double ct = P->C().row(r).dot(t);
                const double room = P->d()[r] - P->C().row(r).dot(b);
                if (std::abs(ct) < 1e-12) {
                    on_line = on_line && room >= -1e-7;
                } else if (ct > 0) {
                    hi = std::min(hi, room / ct);
                } else {
                    lo = std::max(lo, room / ct);
                }
            }
        }
        if (!on_line || !(hi - lo > 1e-6)) continue;
        seen.insert(key);
        ++rep.pairs;
        const Region& rj = law.regions[*j];
        for (int k = 0; k < points_per_pair; ++k) {
            const Vector x = b + (lo + (hi - lo) * (k + 0.5) / points_per_pair) * t;
            rep.worst = std::max(rep.worst, (ri.input(x) - rj.input(x)).cwiseAbs().maxCoeff());
            ++rep.points;
        }
    }
    return rep;
}

}  // namespace fixtures
