// Acceptance checks on the double integrator. One PASS/FAIL line per criterion;
// the exit code is the number of failed criteria.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include "fixtures.hpp"

using namespace dpmpqp;
using fixtures::vec;

namespace {

int failures = 0;

void report(int id, const std::string& name, bool ok, const std::string& detail) {
    std::cout << (ok ? "PASS" : "FAIL") << "  [" << id << "] " << name << ": " << detail << std::endl;
    failures += !ok;
}

template <class F>
void criterion(int id, const std::string& name, F&& body) {
    const auto t0 = std::chrono::steady_clock::now();
    std::ostringstream detail;
    bool ok = false;
    try {
        ok = body(detail);
    } catch (const std::exception& e) {
        detail << "exception: " << e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    detail << " (" << std::fixed;
    detail.precision(1);
    detail << secs << " s)";
    report(id, name, ok, detail.str());
}

struct Shared {
    DpResult dp30;                         // N_max = 30 with history
    std::map<int, BaselineResult> base;    // N = 1..8
};

Shared& shared() {
    static Shared s;
    return s;
}

const BaselineResult& baseline(int N) {
    auto& b = shared().base;
    auto it = b.find(N);
    if (it == b.end()) it = b.emplace(N, alg1_baseline(condense(fixtures::double_integrator(), N))).first;
    return it->second;
}

const HorizonRecord& dp_record(int N) {
    for (const auto& h : shared().dp30.history)
        if (h.N == N) return h;
    throw std::out_of_range("no dp record for N = " + std::to_string(N));
}

}  // namespace

int main() {
    const Ocp& ocp = fixtures::double_integrator();

    criterion(1, "finite determination", [&](std::ostream& d) {
        const auto t0 = std::chrono::steady_clock::now();
        shared().dp30 = alg4_dp(ocp, 30);
        const DpResult& r = shared().dp30;
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        // shortest horizon: S~_N must be nonempty for every N < N_reached
        bool shortest = true;
        for (const auto& h : r.history)
            if (h.N < r.N_reached) shortest = shortest && !h.finitely_determined;
        const DpResult r15 = alg4_dp(ocp, 15, {}, false);
        const int q15 = 15 * static_cast<int>(ocp.q_UX());
        bool no_terminal = !r15.M.empty();
        for (const auto& a : r15.M) no_terminal = no_terminal && a.within(q15);
        d << "N_reached = " << r.N_reached << ", finitely_determined = " << r.finitely_determined
          << ", shortest = " << shortest << ", |M_15| = " << r15.M.size()
          << " all without terminal rows = " << no_terminal << ", dp time " << secs << " s";
        return r.N_reached == 16 && r.finitely_determined && shortest && no_terminal && secs < 600.0;
    });

    criterion(2, "oracle equivalence N = 1..4", [&](std::ostream& d) {
        bool ok = true;
        for (int N = 1; N <= 4; ++N) {
            const DpResult r = alg4_dp(ocp, N, {}, false);
            const bool eq = r.N_reached == N && r.M == baseline(N).M;
            d << "N=" << N << ": |M| " << r.M.size() << "/" << baseline(N).M.size() << (eq ? " equal; " : " DIFFER; ");
            ok = ok && eq;
        }
        return ok;
    });

    criterion(3, "QP cross-validation N = 2, 6, 16", [&](std::ostream& d) {
        bool ok = true;
        for (int N : {2, 6, 16}) {
            const DpResult r = alg4_dp(ocp, N, {}, false);
            const CondensedQP qp = condense(ocp, N);
            const PwaLaw law = build_pwa(qp, r.M);
            const auto xs = fixtures::feasible_states(ocp, qp, 1000, 100 + static_cast<std::uint64_t>(N));
            double worst = 0.0;
            int missing = 0;
            for (const auto& x : xs) {
                const auto u = evaluate(law, x);
                if (!u) {
                    ++missing;
                    continue;
                }
                worst = std::max(worst, (*u - solve_qp(qp, x)->U.head(qp.m)).cwiseAbs().maxCoeff());
            }
            d << "N=" << N << ": max |du| = " << worst << ", uncovered " << missing << "; ";
            ok = ok && missing == 0 && worst <= 1e-6;
        }
        return ok;
    });

    criterion(4, "shifted-set index arithmetic", [&](std::ostream& d) {
        const CondensedQP q5 = condense(ocp, 5), q6 = condense(ocp, 6);
        const ActiveSet shifted = shift(ActiveSet{6, 7, 13, 19, 25}, 6);
        const Certificate c6 = CertificateTester(q6).optimality(shifted);
        const bool rank6 = has_full_row_rank(q6, shifted);
        const bool fd6 = rank6 && is_full_dimensional(q6, shifted);
        const ActiveSet b{1, 6, 7, 13, 19, 25};
        const Certificate c5 = CertificateTester(q5).optimality(b);
        const bool rank5 = has_full_row_rank(q5, b);
        d << shifted.to_string() << " optimal=" << c6.solvable << " t=" << c6.t << " full rank=" << rank6
          << " full-dimensional=" << fd6 << "; " << b.to_string() << " at N=5 optimal=" << c5.solvable
          << " full rank=" << rank5;
        return shifted == ActiveSet{12, 13, 19, 25, 31} && c6.solvable && c6.t > 1e-9 && fd6 && c5.solvable &&
               !rank5;
    });

    criterion(5, "counter ordering", [&](std::ostream& d) {
        bool ok = true;
        const int q_UX = static_cast<int>(ocp.q_UX()), q_T = static_cast<int>(ocp.q_T());
        // baseline candidate counts: measured up to N = 8, |P'(Q)| beyond
        auto base_candidates = [&](int N) -> std::uint64_t {
            if (N <= 8) return baseline(N).counters.candidates_generated;
            return detail::bounded_subsets(N * q_UX + q_T, N * static_cast<int>(ocp.m()));
        };
        // extend past the fixed point to N = 30 and record cumulative dp candidates
        std::map<int, std::uint64_t> dp_cand;
        for (const auto& h : shared().dp30.history) dp_cand[h.N] = h.counters.candidates_generated;
        SolutionFamily fam = shared().dp30.family;
        std::uint64_t running = dp_cand.at(16);
        for (int N = 16; N < 30; ++N) {
            fam = alg2_extend(fam, condense(ocp, N + 1));
            running += fam.counters.candidates_generated;
            dp_cand[N + 1] = running;
        }
        bool below = true;
        for (int N = 6; N <= 30; ++N) below = below && dp_cand.at(N) < base_candidates(N);
        bool plateau = true;
        for (int N = 16; N <= 30; ++N) plateau = plateau && dp_cand.at(N) == dp_cand.at(16);
        bool crossover = true;
        for (int N = 1; N <= 2; ++N) crossover = crossover && base_candidates(N) <= dp_cand.at(N);
        const Counters& b8 = baseline(8).counters;
        const Counters& d8 = dp_record(8).counters;
        const bool all8 = b8.optimality_lps > d8.optimality_lps && b8.feasibility_lps > d8.feasibility_lps &&
                          b8.rank_tests > d8.rank_tests && b8.pruning_tests > d8.pruning_tests;
        d << "dp < baseline candidates for N=6..30: " << below << ", plateau N>=16 at " << dp_cand.at(16) << ": "
          << plateau << ", baseline <= dp for N<=2 (" << base_candidates(1) << "<=" << dp_cand.at(1) << ", "
          << base_candidates(2) << "<=" << dp_cand.at(2) << "): " << crossover << ", N=8 baseline/dp opt "
          << b8.optimality_lps << "/" << d8.optimality_lps << " feas " << b8.feasibility_lps << "/"
          << d8.feasibility_lps << " rank " << b8.rank_tests << "/" << d8.rank_tests << " prune "
          << b8.pruning_tests << "/" << d8.pruning_tests;
        ok = below && plateau && crossover && all8;
        return ok;
    });

    criterion(6, "fixed point at N = 16", [&](std::ostream& d) {
        const SolutionFamily& s16 = shared().dp30.family;
        const CondensedQP q16 = condense(ocp, 16), q17 = condense(ocp, 17);
        const SolutionFamily s17 = alg2_extend(s16, q17);
        const bool same = s16.horizon == 16 && s17.sets == s16.sets && s17.degen == s16.degen;
        Counters scratch;
        const PwaLaw law16 = build_pwa(q16, shared().dp30.M);
        const PwaLaw law17 = build_pwa(q17, final_filter(s17, q17, scratch));
        std::mt19937_64 rng(17);
        std::uniform_real_distribution<double> ux(-25, 25), uy(-5, 5);
        double worst = 0.0;
        int mismatched = 0, feasible = 0;
        for (int k = 0; k < 1000; ++k) {
            const Vector x = vec({ux(rng), uy(rng)});
            const auto a = evaluate(law16, x), b = evaluate(law17, x);
            if (a.has_value() != b.has_value()) {
                ++mismatched;
                continue;
            }
            if (!a) continue;
            ++feasible;
            worst = std::max(worst, (*a - *b).cwiseAbs().maxCoeff());
        }
        d << "S_17 == S_16: " << same << " (" << s17.sets.size() << " sets, " << s17.counters.optimality_lps
          << " LPs), feasible samples " << feasible << ", max |u16 - u17| = " << worst << ", mismatched "
          << mismatched;
        return same && mismatched == 0 && worst <= 1e-8 && feasible > 0;
    });

    criterion(7, "invariant suites", [&](std::ostream& d) {
        // pruning monotonicity on 200 random supersets of infeasible sets (N = 2)
        const CondensedQP q2 = condense(ocp, 2);
        const CertificateTester t2(q2);
        std::mt19937_64 rng(7);
        std::uniform_int_distribution<int> idx(1, q2.q), sz(1, 4);
        int tested = 0, violations = 0;
        while (tested < 200) {
            std::set<int> s;
            const int k = sz(rng);
            while (static_cast<int>(s.size()) < k) s.insert(idx(rng));
            const ActiveSet a(std::vector<int>(s.begin(), s.end()));
            if (t2.feasibility(a).solvable) continue;
            int j = idx(rng);
            while (a.contains(j)) j = idx(rng);
            violations += t2.feasibility(a.united(ActiveSet{j})).solvable;
            ++tested;
        }
        // continuity over 200 adjacent pairs
        const PwaLaw law16 = build_pwa(condense(ocp, 16), shared().dp30.M);
        const auto cont = fixtures::facet_continuity(law16, 200, 10, 5);
        // terminal set invariance
        const Matrix AK = ocp.sys.A() + ocp.sys.B() * ocp.weights.K;
        const auto pts = sample_uniform(ocp.T_set, 1000, rng);
        int bad_T = 0;
        for (const auto& x : pts)
            bad_T += !(ocp.X_set.contains(x, 1e-9) && ocp.U_set.contains(ocp.weights.K * x, 1e-9) &&
                       ocp.T_set.contains(AK * x, 1e-9));
        const double res = riccati_residual(ocp.sys, ocp.weights);
        const double tol = 1e-9 * ocp.weights.P.norm();
        d << "monotonicity violations " << violations << "/" << tested << ", continuity pairs " << cont.pairs
          << " worst " << cont.worst << ", terminal samples " << pts.size() << " bad " << bad_T
          << ", Riccati residual " << res;
        return violations == 0 && cont.pairs >= 200 && cont.worst <= 1e-6 && pts.size() == 1000 && bad_T == 0 &&
               res <= tol;
    });

    std::cout << (failures ? "acceptance: FAILED " : "acceptance: all passed") << (failures ? std::to_string(failures) : "")
              << std::endl;
    return failures;
}
