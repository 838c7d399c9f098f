#pragma once

// Critical regions and the explicit piecewise-affine control law.
//
// For an active set A with full row rank G_A the KKT conditions give
//
//     lambda(x) = -(G_A H^-1 G_A')^-1 (w_A + (E_A + G_A H^-1 F') x)
//     U(x)      = -H^-1 (F' x + G_A' lambda(x))
//
// and the region {x : G_I U(x) <= w_I + E_I x, lambda(x) >= 0}.

#include <optional>
#include <string>
#include <vector>

#include "dpmpqp/active_set.hpp"
#include "dpmpqp/condense.hpp"
#include "dpmpqp/polytope.hpp"

namespace dpmpqp {

struct RegionOptions {
    double rank_tol = 1e-8;          // relative singular value cutoff
    double min_radius = 1e-7;        // Chebyshev radius certifying full dimension
    double redundancy_tol = -1e-9;   // rows marginal within 1e-9 are kept
};

/// Numerical row rank of G_A (singular values below tol * sigma_max count as zero).
inline int row_rank(const CondensedQP& qp, const ActiveSet& a, double tol = 1e-8) {
    if (a.empty()) return 0;
    Matrix GA(static_cast<Eigen::Index>(a.size()), qp.G.cols());
    Eigen::Index r = 0;
    for (int i : a) GA.row(r++) = qp.G.row(i - 1);
    Eigen::JacobiSVD<Matrix> svd(GA);
    const Vector& s = svd.singularValues();
    if (s.size() == 0 || s[0] <= 0.0) return 0;
    int rank = 0;
    for (Eigen::Index k = 0; k < s.size(); ++k)
        if (s[k] > tol * s[0]) ++rank;
    return rank;
}

inline bool has_full_row_rank(const CondensedQP& qp, const ActiveSet& a, double tol = 1e-8) {
    return row_rank(qp, a, tol) == static_cast<int>(a.size());
}

/// Coloring used for 2-D plots of the partition.
enum class StageClass { TerminalActive, LastStageActive, Interior };

inline const char* to_string(StageClass c) {
    switch (c) {
        case StageClass::TerminalActive: return "terminal_active";
        case StageClass::LastStageActive: return "last_stage_active";
        case StageClass::Interior: return "interior";
    }
    return "?";
}

inline StageClass classify_stages(const ActiveSet& a, int N, int q_UX) {
    if (!a.within(N * q_UX)) return StageClass::TerminalActive;
    if (!a.within((N - 1) * q_UX)) return StageClass::LastStageActive;
    return StageClass::Interior;
}

/// Affine solution U(x) = U_gain x + U_offset and multipliers on one active set.
struct AffineKkt {
    Matrix U_gain;
    Vector U_offset;
    Matrix lambda_gain;
    Vector lambda_offset;
};

inline AffineKkt affine_kkt(const CondensedQP& qp, const ActiveSet& a, double rank_tol = 1e-8) {
    if (!has_full_row_rank(qp, a, rank_tol))
        throw RankDeficient("active set " + a.to_string() + " has rank-deficient G_A");
    const auto na = static_cast<Eigen::Index>(a.size());
    const Eigen::LLT<Matrix> llt(qp.H);
    const Matrix HinvFt = llt.solve(qp.F.transpose());
    AffineKkt k;
    if (na == 0) {
        k.U_gain = -HinvFt;
        k.U_offset = Vector::Zero(qp.H.rows());
        k.lambda_gain.resize(0, qp.n);
        k.lambda_offset.resize(0);
        return k;
    }
    Matrix GA(na, qp.G.cols()), EA(na, qp.n);
    Vector wA(na);
    Eigen::Index r = 0;
    for (int i : a) {
        GA.row(r) = qp.G.row(i - 1);
        EA.row(r) = qp.E.row(i - 1);
        wA[r] = qp.w[i - 1];
        ++r;
    }
    const Matrix HinvGAt = llt.solve(GA.transpose());
    const Matrix S = GA * HinvGAt;
    const Eigen::LDLT<Matrix> sl(S);
    k.lambda_gain = -sl.solve(EA + GA * HinvFt);
    k.lambda_offset = -sl.solve(wA);
    k.U_gain = -HinvFt - HinvGAt * k.lambda_gain;
    k.U_offset = -HinvGAt * k.lambda_offset;
    return k;
}

/// Raw H-representation of the region of `a` (no redundancy removal).
inline Polytope raw_region(const CondensedQP& qp, const ActiveSet& a, const AffineKkt& k) {
    std::vector<int> inactive;
    for (int i = 1; i <= qp.q; ++i)
        if (!a.contains(i)) inactive.push_back(i - 1);
    const auto ni = static_cast<Eigen::Index>(inactive.size());
    const auto na = static_cast<Eigen::Index>(a.size());
    Matrix C(ni + na, qp.n);
    Vector d(ni + na);
    for (Eigen::Index r = 0; r < ni; ++r) {
        const int i = inactive[static_cast<std::size_t>(r)];
        C.row(r) = qp.G.row(i) * k.U_gain - qp.E.row(i);
        d[r] = qp.w[i] - qp.G.row(i).dot(k.U_offset);
    }
    C.bottomRows(na) = -k.lambda_gain;
    d.tail(na) = k.lambda_offset;
    return Polytope(C, d);
}

/// Full-dimensionality of the region defined by `a` via its Chebyshev radius.
inline bool is_full_dimensional(const CondensedQP& qp, const ActiveSet& a, const RegionOptions& opt = {}) {
    const AffineKkt k = affine_kkt(qp, a, opt.rank_tol);
    return chebyshev_ball(raw_region(qp, a, k)).radius > opt.min_radius;
}

struct Region {
    ActiveSet aset;
    Polytope polytope;     // in x(0)-space
    Matrix gain;           // first input: u = gain x + offset
    Vector offset;
    AffineKkt kkt;         // full sequence and multipliers
    Vector center;         // Chebyshev center
    double radius = 0.0;
    StageClass stage_class = StageClass::Interior;

    Vector input(const Vector& x) const { return gain * x + offset; }
};

inline Region region_from_active_set(const CondensedQP& qp, const ActiveSet& a, const RegionOptions& opt = {}) {
    Region reg;
    reg.aset = a;
    reg.kkt = affine_kkt(qp, a, opt.rank_tol);
    const Polytope raw = raw_region(qp, a, reg.kkt);
    const ChebyshevBall ball = chebyshev_ball(raw);
    if (!(ball.radius > opt.min_radius))
        throw EmptyRegion("region of " + a.to_string() + " is empty or lower-dimensional");
    reg.polytope = remove_redundant(raw, opt.redundancy_tol);
    reg.center = ball.center;
    reg.radius = ball.radius;
    reg.gain = reg.kkt.U_gain.topRows(qp.m);
    reg.offset = reg.kkt.U_offset.head(qp.m);
    reg.stage_class = classify_stages(a, qp.N, qp.q_UX);
    return reg;
}

/// Explicit control law on the feasible set.
struct PwaLaw {
    int horizon = 0;
    int n = 0;
    int m = 0;
    std::vector<Region> regions;
    bool finitely_determined = false;
    std::vector<ActiveSet> dropped;  // optimal sets whose regions collapsed
};

inline PwaLaw build_pwa(const CondensedQP& qp, const std::vector<ActiveSet>& sets, const RegionOptions& opt = {}) {
    PwaLaw law;
    law.horizon = qp.N;
    law.n = qp.n;
    law.m = qp.m;
    for (const ActiveSet& a : sets) {
        try {
            law.regions.push_back(region_from_active_set(qp, a, opt));
        } catch (const EmptyRegion&) {
            law.dropped.push_back(a);
        }
    }
    return law;
}

/// Index of the region containing x with the largest margin, if any.
inline std::optional<std::size_t> locate(const PwaLaw& law, const Vector& x, double tol = 1e-8) {
    std::optional<std::size_t> best;
    double best_margin = -kInf;
    for (std::size_t k = 0; k < law.regions.size(); ++k) {
        const double mg = law.regions[k].polytope.margin(x);
        if (mg >= -tol && mg > best_margin) {
            best_margin = mg;
            best = k;
        }
    }
    return best;
}

/// Optimal first input at x, or nullopt when x lies outside every region.
inline std::optional<Vector> evaluate(const PwaLaw& law, const Vector& x, double tol = 1e-8) {
    if (x.size() != law.n) throw DimensionMismatch("evaluate: state has wrong dimension");
    const auto k = locate(law, x, tol);
    if (!k) return std::nullopt;
    return law.regions[*k].input(x);
}

}  // namespace dpmpqp
