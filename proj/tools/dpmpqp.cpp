// dpmpqp: explicit constrained LQR by active-set enumeration.
//
//   dpmpqp solve --input problem.json --algorithm dp|baseline|both --n-max 30
//                --out-partition part.json --out-counters counters.csv
//   dpmpqp eval  --partition part.json --x "1.5,-0.2"
//   dpmpqp plot  --partition part.json --counters counters.csv --out fig
//
// Exit codes: 0 ok, 1 other errors, 2 bad input, 3 numerical failure,
// 4 SVG requested for a partition with n != 2.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "dpmpqp.hpp"
#include "dpmpqp/io.hpp"

namespace {

using namespace dpmpqp;

struct RunConfig {
    std::string input;
    std::string algorithm = "dp";
    int n_max = 30;
    int baseline_n_max = 8;
    std::string out_partition = "partition.json";
    std::string out_counters = "counters.csv";
    int threads = 1;
    int check_samples = 0;
    std::uint64_t seed = 0;
    double degenerate_tol = 1e-9;
    double rank_tol = 1e-8;
    double min_radius = 1e-7;
};

std::uint64_t seed_from_env(std::uint64_t fallback) {
    const char* s = std::getenv("DPMPQP_SEED");
    if (!s || !*s) return fallback;
    try {
        return std::stoull(s);
    } catch (const std::logic_error&) {
        throw SchemaError("DPMPQP_SEED must be a non-negative integer");
    }
}

std::string join(const Vector& v) {
    std::ostringstream os;
    os.precision(17);
    for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
    return os.str();
}

std::string set_list(const std::vector<ActiveSet>& sets) {
    std::string s;
    for (const auto& a : sets) s += (s.empty() ? "" : " ") + a.to_string();
    return s;
}

// Largest |u_law - u_qp| over samples of the feasible set drawn in X.
double cross_check(const Ocp& ocp, const CondensedQP& qp, const PwaLaw& law, int samples, std::uint64_t seed,
                   int& feasible) {
    std::mt19937_64 rng(seed);
    const auto [lo, hi] = bounding_box(ocp.X_set);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    double worst = 0.0;
    feasible = 0;
    for (int tries = 0; feasible < samples && tries < 100 * samples; ++tries) {
        Vector x(lo.size());
        for (Eigen::Index j = 0; j < x.size(); ++j) x[j] = lo[j] + (hi[j] - lo[j]) * uni(rng);
        const auto sol = solve_qp(qp, x);
        if (!sol) continue;
        ++feasible;
        const auto u = evaluate(law, x);
        if (!u) return kInf;
        worst = std::max(worst, (*u - sol->U.head(qp.m)).cwiseAbs().maxCoeff());
    }
    return worst;
}

int cmd_solve(RunConfig cfg) {
    if (cfg.n_max < 1) throw InvalidInput("--n-max must be >= 1");
    if (cfg.baseline_n_max < 1) throw InvalidInput("--baseline-n-max must be >= 1");
    cfg.seed = seed_from_env(cfg.seed);
    const Ocp ocp = io::load_problem(cfg.input);

    EnumerationOptions opt;
    opt.threads = cfg.threads;
    opt.degenerate_tol = cfg.degenerate_tol;
    opt.region.rank_tol = cfg.rank_tol;
    opt.region.min_radius = cfg.min_radius;

    const bool run_dp = cfg.algorithm != "baseline";
    const bool run_base = cfg.algorithm != "dp";
    std::vector<io::CounterRow> rows;
    std::optional<DpResult> dp;
    std::vector<BaselineResult> base;

    if (run_dp) {
        dp = alg4_dp(ocp, cfg.n_max, opt, true);
        for (const auto& h : dp->history)
            rows.push_back({"dp", h.N, h.counters, static_cast<long long>(h.S_size),
                            static_cast<long long>(h.M_size)});
        // Past the fixed point every further extension step copies S_N and
        // solves nothing, so the curves stay flat up to n-max.
        const io::CounterRow last = rows.back();
        for (int N = last.N + 1; dp->finitely_determined && N <= cfg.n_max; ++N) {
            io::CounterRow r = last;
            r.N = N;
            rows.push_back(r);
        }
        std::cout << "N_reached = " << dp->N_reached << "\n";
        std::cout << "finitely_determined = " << (dp->finitely_determined ? "true" : "false") << "\n";
        std::cout << "|S_N| = " << dp->family.sets.size() << ", |M_N| = " << dp->M.size() << "\n";
    }
    if (run_base) {
        const int top = std::min(cfg.n_max, cfg.baseline_n_max);
        if (top < cfg.n_max) std::cout << "baseline capped at N = " << top << " (--baseline-n-max)\n";
        for (int N = 1; N <= top; ++N) {
            base.push_back(alg1_baseline(condense(ocp, N), opt));
            rows.push_back({"baseline", N, base.back().counters, -1, static_cast<long long>(base.back().M.size())});
        }
        std::cout << "baseline N = " << top << ": |M_N| = " << base.back().M.size() << "\n";
    }
    if (run_dp && run_base) {
        const int common = std::min(dp->N_reached, static_cast<int>(base.size()));
        const std::vector<ActiveSet> M_dp =
            common == dp->N_reached ? dp->M : alg4_dp(ocp, common, opt, false).M;
        const auto& M_b = base[static_cast<std::size_t>(common - 1)].M;
        std::cout << "M_" << common << " identical across algorithms: " << (M_dp == M_b ? "yes" : "no") << "\n";
        if (M_dp != M_b) {
            std::vector<ActiveSet> only_dp, only_b;
            std::set_difference(M_dp.begin(), M_dp.end(), M_b.begin(), M_b.end(), std::back_inserter(only_dp));
            std::set_difference(M_b.begin(), M_b.end(), M_dp.begin(), M_dp.end(), std::back_inserter(only_b));
            std::cout << "  only dp: " << set_list(only_dp) << "\n  only baseline: " << set_list(only_b) << "\n";
        }
    }

    const int horizon = run_dp ? dp->N_reached : static_cast<int>(base.size());
    const CondensedQP qp = condense(ocp, horizon);
    PwaLaw law = build_pwa(qp, run_dp ? dp->M : base.back().M, opt.region);
    law.finitely_determined = run_dp && dp->finitely_determined;
    const Counters counters = run_dp ? dp->history.back().counters : base.back().counters;
    if (!law.dropped.empty())
        std::cerr << "note: dropped " << law.dropped.size() << " collapsed region(s): " << set_list(law.dropped)
                  << "\n";
    io::save_partition(cfg.out_partition, law, counters, run_dp ? "dp" : "baseline");
    io::write_text(cfg.out_counters, io::counters_csv(rows));
    std::cout << "regions = " << law.regions.size() << "\n";

    if (cfg.check_samples > 0) {
        int feasible = 0;
        const double err = cross_check(ocp, qp, law, cfg.check_samples, cfg.seed, feasible);
        std::cout << "qp cross-check: " << feasible << " feasible samples, max |du| = " << err << "\n";
    }
    return 0;
}

int cmd_eval(const std::string& partition, const std::string& xs) {
    std::vector<double> vals;
    std::stringstream ss(xs);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(tok, &used);
        } catch (const std::logic_error&) {
            throw SchemaError("--x: cannot parse '" + tok + "'");
        }
        if (tok.find_first_not_of(" \t", used) != std::string::npos || !std::isfinite(v))
            throw SchemaError("--x: cannot parse '" + tok + "'");
        vals.push_back(v);
    }
    const PwaLaw law = io::load_partition(partition);
    if (static_cast<int>(vals.size()) != law.n)
        throw SchemaError("--x: expected " + std::to_string(law.n) + " comma-separated values");
    const Vector x = Eigen::Map<const Vector>(vals.data(), static_cast<Eigen::Index>(vals.size()));
    const auto u = evaluate(law, x);
    std::cout << (u ? join(*u) : std::string("infeasible")) << "\n";
    return 0;
}

int cmd_plot(const std::string& partition, const std::string& counters, std::string out, const std::string& format) {
    const PwaLaw law = io::load_partition(partition);
    std::ifstream in(counters);
    if (!in) throw SchemaError("cannot open " + counters);
    std::stringstream buf;
    buf << in.rdbuf();
    const auto rows = io::parse_counters_csv(buf.str());
    if (out.size() > 4 && out.compare(out.size() - 4, 4, ".svg") == 0) out.resize(out.size() - 4);

    const bool svg = format == "svg" || (format == "auto" && law.n == 2);
    if (svg && law.n != 2) {
        std::cerr << "error: SVG output needs a 2-D partition (n = " << law.n << ")\n";
        return 4;
    }
    if (svg) {
        io::write_text(out + ".svg", io::partition_svg(law));
        std::cout << "wrote " << out << ".svg\n";
    } else {
        io::write_text(out + "_regions.csv", io::regions_csv(law));
        std::cout << "wrote " << out << "_regions.csv\n";
    }
    io::write_text(out + "_curves.csv", io::curves_csv(rows));
    std::cout << "wrote " << out << "_curves.csv\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Explicit constrained LQR by active-set enumeration"};
    app.require_subcommand(1);

    RunConfig cfg;
    auto* solve = app.add_subcommand("solve", "enumerate optimal active sets and export the partition");
    solve->add_option("--input", cfg.input, "problem JSON")->required()->check(CLI::ExistingFile);
    solve->add_option("--algorithm", cfg.algorithm)->check(CLI::IsMember({"dp", "baseline", "both"}));
    solve->add_option("--n-max", cfg.n_max, "largest horizon");
    solve->add_option("--baseline-n-max", cfg.baseline_n_max, "largest horizon for the baseline");
    solve->add_option("--out-partition", cfg.out_partition);
    solve->add_option("--out-counters", cfg.out_counters);
    solve->add_option("--threads", cfg.threads)->check(CLI::PositiveNumber);
    solve->add_option("--check-samples", cfg.check_samples, "compare against QP solves at random states");
    solve->add_option("--seed", cfg.seed, "sampling seed (DPMPQP_SEED overrides)");
    solve->add_option("--degenerate-tol", cfg.degenerate_tol)->check(CLI::PositiveNumber);
    solve->add_option("--rank-tol", cfg.rank_tol)->check(CLI::PositiveNumber);
    solve->add_option("--min-radius", cfg.min_radius)->check(CLI::PositiveNumber);

    std::string partition, xs, counters, out = "plot", format = "auto";
    auto* eval = app.add_subcommand("eval", "evaluate the explicit law at a state");
    eval->add_option("--partition", partition)->required()->check(CLI::ExistingFile);
    eval->add_option("--x", xs, "state as comma-separated floats")->required();

    auto* plot = app.add_subcommand("plot", "write partition SVG (or region CSV) and counter curves");
    plot->add_option("--partition", partition)->required()->check(CLI::ExistingFile);
    plot->add_option("--counters", counters)->required()->check(CLI::ExistingFile);
    plot->add_option("--out", out, "output prefix");
    plot->add_option("--format", format)->check(CLI::IsMember({"auto", "svg", "csv"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*solve) return cmd_solve(cfg);
        if (*eval) return cmd_eval(partition, xs);
        if (*plot) return cmd_plot(partition, counters, out, format);
    } catch (const NumericalFailure& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const InvalidInput& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
