#pragma once

// Combinatorial enumeration of optimal active sets.
//
//   alg1_baseline  all candidates with |A| <= mN, by increasing cardinality,
//                  with superset pruning and a row-rank filter
//   alg3_init      all optimal active sets S_1 for horizon 1
//   alg2_extend    S_N -> S_{N+1}: copy the sets without stage-N or terminal
//                  constraints, extend the sets touching stages N-1, N by
//                  every subset of the new first stage
//   alg4_dp        horizon recursion with early stop once no optimal set
//                  touches the last two stages
//
// Candidates of one cardinality layer are tested against the pruned store as
// it stood at the start of the layer, and infeasible sets found in the layer
// are merged afterwards. Results and counters therefore do not depend on the
// number of worker threads.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <thread>
#include <vector>

#include "dpmpqp/active_set.hpp"
#include "dpmpqp/certificates.hpp"
#include "dpmpqp/condense.hpp"
#include "dpmpqp/model.hpp"
#include "dpmpqp/regions.hpp"

namespace dpmpqp {

struct Counters {
    std::uint64_t candidates_generated = 0;
    std::uint64_t pruning_tests = 0;
    std::uint64_t pruned_skips = 0;  // candidates dismissed by a pruning test
    std::uint64_t rank_tests = 0;
    std::uint64_t optimality_lps = 0;
    std::uint64_t feasibility_lps = 0;

    Counters& operator+=(const Counters& o) {
        auto sat = [](std::uint64_t a, std::uint64_t b) {
            return a > std::numeric_limits<std::uint64_t>::max() - b ? std::numeric_limits<std::uint64_t>::max()
                                                                      : a + b;
        };
        candidates_generated = sat(candidates_generated, o.candidates_generated);
        pruning_tests += o.pruning_tests;
        pruned_skips += o.pruned_skips;
        rank_tests += o.rank_tests;
        optimality_lps += o.optimality_lps;
        feasibility_lps += o.feasibility_lps;
        return *this;
    }
    friend Counters operator+(Counters a, const Counters& b) { return a += b; }
    bool operator==(const Counters&) const = default;
};

struct EnumerationOptions {
    double degenerate_tol = 1e-9;  // t* at or below this counts as t = 0
    RegionOptions region;
    int threads = 1;
};

/// Optimal active sets of one horizon with their bookkeeping.
struct SolutionFamily {
    int horizon = 0;
    int q_UX = 0;
    std::vector<ActiveSet> sets;     // S_N, sorted
    std::vector<ActiveSet> degen;    // S_N^degen, sorted
    std::vector<ActiveSet> pruned;   // minimal infeasible sets found while building S_N
    Counters counters;

    bool contains(const ActiveSet& a) const { return std::binary_search(sets.begin(), sets.end(), a); }
    bool is_degenerate(const ActiveSet& a) const { return std::binary_search(degen.begin(), degen.end(), a); }

    /// Members with at least one active constraint in stage N-1, N or the terminal block.
    std::vector<ActiveSet> tail_active() const {
        std::vector<ActiveSet> out;
        for (const auto& a : sets)
            if (!a.within((horizon - 1) * q_UX)) out.push_back(a);
        return out;
    }
};

/// True iff no member touches stage N-1, N or the terminal block.
inline bool is_finitely_determined(const SolutionFamily& f) {
    return std::all_of(f.sets.begin(), f.sets.end(),
                       [&](const ActiveSet& a) { return a.within((f.horizon - 1) * f.q_UX); });
}

namespace detail {

inline std::uint64_t saturating(long double v) {
    const auto cap = static_cast<long double>(std::numeric_limits<std::uint64_t>::max());
    return v >= cap ? std::numeric_limits<std::uint64_t>::max() : static_cast<std::uint64_t>(std::llround(v));
}

// sum_{k=0}^{kmax} C(q, k)
inline std::uint64_t bounded_subsets(int q, int kmax) {
    long double total = 0.0L, term = 1.0L;
    for (int k = 0; k <= std::min(q, kmax); ++k) {
        if (k > 0) term = term * static_cast<long double>(q - k + 1) / static_cast<long double>(k);
        total += term;
    }
    return saturating(total);
}

template <class F>
void parallel_for(std::size_t count, int threads, F&& f) {
    const auto workers = static_cast<std::size_t>(std::max(1, threads));
    if (workers == 1 || count < 2) {
        for (std::size_t k = 0; k < count; ++k) f(k);
        return;
    }
    std::vector<std::thread> pool;
    const std::size_t used = std::min(workers, count);
    for (std::size_t w = 0; w < used; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t k = w; k < count; k += used) f(k);
        });
    }
    for (auto& t : pool) t.join();
}

enum class Verdict { Skipped, RankDeficient, Optimal, Degenerate, Feasible, Infeasible };

struct Outcome {
    Verdict verdict = Verdict::Skipped;
    bool optimality_lp = false;
    bool feasibility_lp = false;
    bool rank_test = false;
    bool full_dimensional = false;  // only set for degenerate sets when requested
};

struct TestPlan {
    bool rank_filter = false;       // dismiss rank-deficient candidates before any LP
    bool fulldim_on_degen = false;  // decide full dimension for degenerate sets
};

inline Outcome test_candidate(const CertificateTester& tester, const PrunedStore& store, const ActiveSet& a,
                              const TestPlan& plan, const EnumerationOptions& opt) {
    Outcome o;
    if (store.covers(a)) return o;
    if (plan.rank_filter) {
        o.rank_test = true;
        if (!has_full_row_rank(tester.qp(), a, opt.region.rank_tol)) {
            o.verdict = Verdict::RankDeficient;
            return o;
        }
    }
    o.optimality_lp = true;
    const Certificate c = tester.optimality(a);
    if (c.solvable) {
        if (c.t > opt.degenerate_tol) {
            o.verdict = Verdict::Optimal;
        } else {
            o.verdict = Verdict::Degenerate;
            if (plan.fulldim_on_degen) o.full_dimensional = is_full_dimensional(tester.qp(), a, opt.region);
        }
        return o;
    }
    o.feasibility_lp = true;
    o.verdict = tester.feasibility(a).solvable ? Verdict::Feasible : Verdict::Infeasible;
    return o;
}

inline void tally(Counters& c, const Outcome& o) {
    ++c.pruning_tests;
    if (o.verdict == Verdict::Skipped) ++c.pruned_skips;
    if (o.rank_test) ++c.rank_tests;
    if (o.optimality_lp) ++c.optimality_lps;
    if (o.feasibility_lp) ++c.feasibility_lps;
}

inline std::vector<Outcome> test_layer(const CertificateTester& tester, const PrunedStore& store,
                                       const std::vector<ActiveSet>& layer, const TestPlan& plan,
                                       const EnumerationOptions& opt) {
    std::vector<Outcome> out(layer.size());
    parallel_for(layer.size(), opt.threads,
                 [&](std::size_t k) { out[k] = test_candidate(tester, store, layer[k], plan, opt); });
    return out;
}

inline void sort_unique(std::vector<ActiveSet>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
}

}  // namespace detail

/// A_j ∪ (a_l ⊕ {q_UX}) for every A_j ⊆ {1..q_UX}, by |A_j| then lexicographically.
inline std::vector<ActiveSet> extend_candidates(const ActiveSet& a_l, int q_UX) {
    if (q_UX < 1 || q_UX > 30) throw InvalidInput("extend_candidates: q_UX out of range");
    const ActiveSet tail = a_l.shifted(q_UX);
    std::vector<ActiveSet> heads;
    heads.reserve(std::size_t{1} << q_UX);
    for (std::uint32_t bits = 0; bits < (std::uint32_t{1} << q_UX); ++bits) {
        std::vector<int> idx;
        for (int i = 0; i < q_UX; ++i)
            if (bits & (std::uint32_t{1} << i)) idx.push_back(i + 1);
        heads.emplace_back(std::move(idx));
    }
    std::sort(heads.begin(), heads.end());
    std::vector<ActiveSet> out;
    out.reserve(heads.size());
    for (const auto& h : heads) out.push_back(h.united(tail));
    return out;
}

struct BaselineResult {
    std::vector<ActiveSet> M;
    Counters counters;
};

/// Combinatorial baseline over P'(Q) = {A : |A| <= mN}.
///
/// Candidates are materialized by appending indices to the non-dismissed
/// sets of the previous layer. A set whose prefix was pruned, rank-deficient
/// or infeasible is covered by the same test, so no optimal set is lost.
/// candidates_generated reports |P'(Q)|.
inline BaselineResult alg1_baseline(const CondensedQP& qp, const EnumerationOptions& opt = {}) {
    BaselineResult res;
    const CertificateTester tester(qp);
    const int kmax = qp.N * qp.m;
    PrunedStore store;
    const detail::TestPlan plan{true, true};
    std::vector<ActiveSet> layer{ActiveSet{}};
    for (int k = 0; !layer.empty(); ++k) {
        const auto outcomes = detail::test_layer(tester, store, layer, plan, opt);
        std::vector<ActiveSet> next;
        std::vector<ActiveSet> infeasible;
        for (std::size_t c = 0; c < layer.size(); ++c) {
            const auto& o = outcomes[c];
            detail::tally(res.counters, o);
            using detail::Verdict;
            bool alive = false;
            switch (o.verdict) {
                case Verdict::Optimal: res.M.push_back(layer[c]); alive = true; break;
                case Verdict::Degenerate:
                    if (o.full_dimensional) res.M.push_back(layer[c]);
                    alive = true;
                    break;
                case Verdict::Feasible: alive = true; break;
                case Verdict::Infeasible: infeasible.push_back(layer[c]); break;
                default: break;
            }
            if (alive && k < kmax)
                for (int j = layer[c].max() + 1; j <= qp.q; ++j) next.push_back(layer[c].appended(j));
        }
        for (const auto& a : infeasible) store.add(a);
        layer = std::move(next);
    }
    res.counters.candidates_generated = detail::bounded_subsets(qp.q, kmax);
    detail::sort_unique(res.M);
    return res;
}

/// All optimal active sets for horizon 1 (no rank filter).
inline SolutionFamily alg3_init(const CondensedQP& qp1, const EnumerationOptions& opt = {}) {
    if (qp1.N != 1) throw HorizonMismatch("alg3_init: expects the horizon-1 QP");
    SolutionFamily fam;
    fam.horizon = 1;
    fam.q_UX = qp1.q_UX;
    const CertificateTester tester(qp1);
    PrunedStore store;
    const detail::TestPlan plan{false, false};
    std::vector<ActiveSet> layer{ActiveSet{}};
    while (!layer.empty()) {
        const auto outcomes = detail::test_layer(tester, store, layer, plan, opt);
        std::vector<ActiveSet> next;
        std::vector<ActiveSet> infeasible;
        for (std::size_t c = 0; c < layer.size(); ++c) {
            const auto& o = outcomes[c];
            detail::tally(fam.counters, o);
            using detail::Verdict;
            bool alive = false;
            switch (o.verdict) {
                case Verdict::Optimal: fam.sets.push_back(layer[c]); alive = true; break;
                case Verdict::Degenerate:
                    fam.sets.push_back(layer[c]);
                    fam.degen.push_back(layer[c]);
                    alive = true;
                    break;
                case Verdict::Feasible: alive = true; break;
                case Verdict::Infeasible: infeasible.push_back(layer[c]); break;
                default: break;
            }
            if (alive)
                for (int j = layer[c].max() + 1; j <= qp1.q; ++j) next.push_back(layer[c].appended(j));
        }
        for (const auto& a : infeasible) store.add(a);
        layer = std::move(next);
    }
    fam.counters.candidates_generated = detail::saturating(std::ldexp(1.0L, qp1.q));
    fam.pruned = store.sets();
    detail::sort_unique(fam.sets);
    detail::sort_unique(fam.degen);
    return fam;
}

/// S_{N+1} from S_N.
inline SolutionFamily alg2_extend(const SolutionFamily& prev, const CondensedQP& qp_next,
                                  const EnumerationOptions& opt = {}) {
    const int N = prev.horizon;
    if (qp_next.N != N + 1 || qp_next.q_UX != prev.q_UX)
        throw HorizonMismatch("alg2_extend: QP horizon must be N + 1 for the same OCP");
    const int q_UX = prev.q_UX;
    SolutionFamily fam;
    fam.horizon = N + 1;
    fam.q_UX = q_UX;

    // Copy step and candidate generation.
    std::vector<ActiveSet> candidates;
    for (const auto& a : prev.sets) {
        if (a.within(N * q_UX)) {
            fam.sets.push_back(a);
            if (prev.is_degenerate(a)) fam.degen.push_back(a);
        }
        if (!a.within((N - 1) * q_UX)) {
            auto ext = extend_candidates(a, q_UX);
            candidates.insert(candidates.end(), std::make_move_iterator(ext.begin()),
                              std::make_move_iterator(ext.end()));
        }
    }
    fam.counters.candidates_generated = candidates.size();
    if (candidates.empty()) {
        detail::sort_unique(fam.sets);
        detail::sort_unique(fam.degen);
        return fam;
    }

    // Extension step, one cardinality layer at a time.
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const ActiveSet& a, const ActiveSet& b) { return a.size() < b.size(); });
    const CertificateTester tester(qp_next);
    PrunedStore store;
    const detail::TestPlan plan{false, false};
    std::size_t begin = 0;
    while (begin < candidates.size()) {
        std::size_t end = begin;
        while (end < candidates.size() && candidates[end].size() == candidates[begin].size()) ++end;
        const std::vector<ActiveSet> layer(candidates.begin() + static_cast<std::ptrdiff_t>(begin),
                                           candidates.begin() + static_cast<std::ptrdiff_t>(end));
        const auto outcomes = detail::test_layer(tester, store, layer, plan, opt);
        std::vector<ActiveSet> infeasible;
        for (std::size_t c = 0; c < layer.size(); ++c) {
            const auto& o = outcomes[c];
            detail::tally(fam.counters, o);
            using detail::Verdict;
            switch (o.verdict) {
                case Verdict::Optimal: fam.sets.push_back(layer[c]); break;
                case Verdict::Degenerate:
                    fam.sets.push_back(layer[c]);
                    fam.degen.push_back(layer[c]);
                    break;
                case Verdict::Infeasible: infeasible.push_back(layer[c]); break;
                default: break;
            }
        }
        for (const auto& a : infeasible) store.add(a);
        begin = end;
    }
    fam.pruned = store.sets();
    detail::sort_unique(fam.sets);
    detail::sort_unique(fam.degen);
    return fam;
}

/// M_N from S_N: full row rank, and a full-dimensional region for degenerate members.
inline std::vector<ActiveSet> final_filter(const SolutionFamily& fam, const CondensedQP& qp, Counters& counters,
                                           const EnumerationOptions& opt = {}) {
    if (qp.N != fam.horizon) throw HorizonMismatch("final_filter: QP horizon differs from the family");
    std::vector<char> keep(fam.sets.size(), 0);
    detail::parallel_for(fam.sets.size(), opt.threads, [&](std::size_t k) {
        const ActiveSet& a = fam.sets[k];
        if (!has_full_row_rank(qp, a, opt.region.rank_tol)) return;
        if (fam.is_degenerate(a) && !is_full_dimensional(qp, a, opt.region)) return;
        keep[k] = 1;
    });
    counters.rank_tests += fam.sets.size();
    std::vector<ActiveSet> M;
    for (std::size_t k = 0; k < fam.sets.size(); ++k)
        if (keep[k]) M.push_back(fam.sets[k]);
    return M;
}

/// Counters accumulated to reach M_N, and the sizes of S_N and M_N.
struct HorizonRecord {
    int N = 0;
    Counters counters;
    std::size_t S_size = 0;
    std::size_t M_size = 0;
    bool finitely_determined = false;
};

struct DpResult {
    std::vector<ActiveSet> M;
    int N_reached = 0;
    bool finitely_determined = false;
    SolutionFamily family;               // S_N at N_reached
    std::vector<HorizonRecord> history;  // one row per computed horizon
};

/// Horizon recursion from N = 1 up to N_max with the early stop.
///
/// With `record_history` the final filter is also run at every intermediate
/// horizon so that |M_N| and the cost of reaching M_N are known per N.
inline DpResult alg4_dp(const Ocp& ocp, int N_max, const EnumerationOptions& opt = {},
                        bool record_history = true) {
    if (N_max < 1) throw InvalidInput("alg4_dp: N_max must be >= 1");
    DpResult res;
    CondensedQP qp = condense(ocp, 1);
    SolutionFamily fam = alg3_init(qp, opt);
    Counters running = fam.counters;

    auto record = [&](const SolutionFamily& f, const CondensedQP& q) {
        HorizonRecord rec;
        rec.N = f.horizon;
        rec.counters = running;
        rec.M_size = final_filter(f, q, rec.counters, opt).size();
        rec.S_size = f.sets.size();
        rec.finitely_determined = is_finitely_determined(f);
        res.history.push_back(rec);
    };

    // S_{N+1} ⊆ P({1..N q_UX}) is tested as soon as S_{N+1} exists; for N = 1
    // the same test on S_1 is applied before any extension.
    bool stopped = false;
    while (true) {
        if (is_finitely_determined(fam)) {
            stopped = true;
            break;
        }
        if (fam.horizon >= N_max) break;
        if (record_history) record(fam, qp);
        CondensedQP qp_next = condense(ocp, fam.horizon + 1);
        SolutionFamily next = alg2_extend(fam, qp_next, opt);
        running += next.counters;
        fam = std::move(next);
        qp = std::move(qp_next);
    }

    res.N_reached = fam.horizon;
    res.finitely_determined = stopped || is_finitely_determined(fam);
    Counters final_counters = running;
    res.M = final_filter(fam, qp, final_counters, opt);
    if (record_history) {
        HorizonRecord rec;
        rec.N = fam.horizon;
        rec.counters = final_counters;
        rec.S_size = fam.sets.size();
        rec.M_size = res.M.size();
        rec.finitely_determined = res.finitely_determined;
        res.history.push_back(rec);
    }
    res.family = std::move(fam);
    return res;
}

}  // namespace dpmpqp
