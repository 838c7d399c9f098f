#pragma once

// File formats.
//
// Problem (schema 1):
//   {"schema": 1, "A": [[..]], "B": [[..]], "Q": [[..]], "R": [[..]],
//    "U": {"C": [[..]], "d": [..]}, "X": {"C": [[..]], "d": [..]}}
// Matrices are row-major nested arrays. P, K and the terminal set are
// computed on load.
//
// Partition (schema 1): horizon, n, m, finitely_determined, counters and a
// list of regions {active_set, C, d, gain, offset, stage_classification}.
// Doubles are written in shortest round-trip form, so reloading is exact.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "dpmpqp/enumeration.hpp"
#include "dpmpqp/regions.hpp"

namespace dpmpqp::io {

using json = nlohmann::json;

inline constexpr int kSchema = 1;

// ---- matrices -------------------------------------------------------------

inline json to_json(const Matrix& M) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        json r = json::array();
        for (Eigen::Index j = 0; j < M.cols(); ++j) r.push_back(M(i, j));
        rows.push_back(std::move(r));
    }
    return rows;
}

inline json to_json(const Vector& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

inline double number(const json& j, const std::string& what) {
    if (!j.is_number()) throw SchemaError(what + ": expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw SchemaError(what + ": non-finite entry");
    return v;
}

/// `cols` < 0 accepts any column count (taken from the first row).
inline Matrix matrix_from(const json& j, const std::string& what, Eigen::Index cols = -1) {
    if (!j.is_array() || j.empty()) throw SchemaError(what + ": expected a non-empty array of rows");
    const auto r = static_cast<Eigen::Index>(j.size());
    if (!j[0].is_array()) throw SchemaError(what + ": rows must be arrays");
    const auto c = cols >= 0 ? cols : static_cast<Eigen::Index>(j[0].size());
    Matrix M(r, c);
    for (Eigen::Index i = 0; i < r; ++i) {
        const json& row = j[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != c)
            throw SchemaError(what + ": ragged or mis-sized row " + std::to_string(i));
        for (Eigen::Index k = 0; k < c; ++k) M(i, k) = number(row[static_cast<std::size_t>(k)], what);
    }
    return M;
}

inline Vector vector_from(const json& j, const std::string& what) {
    if (!j.is_array()) throw SchemaError(what + ": expected an array");
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = number(j[i], what);
    return v;
}

inline const json& field(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw SchemaError(std::string("missing field '") + key + "'");
    return j.at(key);
}

inline void check_schema(const json& j) {
    const json& s = field(j, "schema");
    if (!s.is_number_integer() || s.get<int>() != kSchema)
        throw SchemaError("unsupported schema version (expected " + std::to_string(kSchema) + ")");
}

inline json parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw SchemaError(path + ": " + e.what());
    }
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << text;
}

// ---- problem --------------------------------------------------------------

struct ProblemData {
    Matrix A, B, Q, R;
    Polytope U, X;
};

inline Polytope polytope_from(const json& j, Eigen::Index dim, const std::string& what) {
    const Matrix C = matrix_from(field(j, "C"), what + ".C", dim);
    const Vector d = vector_from(field(j, "d"), what + ".d");
    if (d.size() != C.rows()) throw SchemaError(what + ": C and d disagree in row count");
    return Polytope(C, d);
}

inline ProblemData problem_from_json(const json& j) {
    check_schema(j);
    ProblemData p;
    p.A = matrix_from(field(j, "A"), "A");
    const auto n = p.A.rows();
    if (p.A.cols() != n) throw SchemaError("A must be square");
    p.B = matrix_from(field(j, "B"), "B");
    if (p.B.rows() != n) throw SchemaError("B must have as many rows as A");
    const auto m = p.B.cols();
    p.Q = matrix_from(field(j, "Q"), "Q", n);
    p.R = matrix_from(field(j, "R"), "R", m);
    if (p.Q.rows() != n || p.R.rows() != m) throw SchemaError("Q must be n x n and R m x m");
    p.U = polytope_from(field(j, "U"), m, "U");
    p.X = polytope_from(field(j, "X"), n, "X");
    return p;
}

inline Ocp load_problem(const std::string& path) {
    const ProblemData p = problem_from_json(parse_file(path));
    return make_ocp(LinearSystem(p.A, p.B), p.U, p.X, p.Q, p.R);
}

// ---- partition ------------------------------------------------------------

inline json counters_to_json(const Counters& c) {
    return json{{"candidates_generated", c.candidates_generated},
                {"pruning_tests", c.pruning_tests},
                {"pruned_skips", c.pruned_skips},
                {"rank_tests", c.rank_tests},
                {"optimality_lps", c.optimality_lps},
                {"feasibility_lps", c.feasibility_lps}};
}

inline json partition_to_json(const PwaLaw& law, const Counters& counters, const std::string& algorithm) {
    json regions = json::array();
    for (const Region& r : law.regions) {
        regions.push_back(json{{"active_set", r.aset.indices()},
                               {"C", to_json(r.polytope.C())},
                               {"d", to_json(r.polytope.d())},
                               {"gain", to_json(r.gain)},
                               {"offset", to_json(r.offset)},
                               {"stage_classification", to_string(r.stage_class)}});
    }
    json dropped = json::array();
    for (const auto& a : law.dropped) dropped.push_back(a.indices());
    return json{{"schema", kSchema},
                {"algorithm", algorithm},
                {"horizon", law.horizon},
                {"n", law.n},
                {"m", law.m},
                {"finitely_determined", law.finitely_determined},
                {"counters", counters_to_json(counters)},
                {"dropped_active_sets", dropped},
                {"regions", regions}};
}

inline StageClass stage_class_from(const std::string& s) {
    if (s == "terminal_active") return StageClass::TerminalActive;
    if (s == "last_stage_active") return StageClass::LastStageActive;
    if (s == "interior") return StageClass::Interior;
    throw SchemaError("unknown stage_classification '" + s + "'");
}

inline PwaLaw partition_from_json(const json& j) {
    check_schema(j);
    PwaLaw law;
    law.horizon = field(j, "horizon").get<int>();
    law.n = field(j, "n").get<int>();
    law.m = field(j, "m").get<int>();
    law.finitely_determined = field(j, "finitely_determined").get<bool>();
    if (law.n < 1 || law.m < 1) throw SchemaError("partition: n and m must be positive");
    for (const json& r : field(j, "regions")) {
        Region reg;
        reg.aset = ActiveSet(field(r, "active_set").get<std::vector<int>>());
        const Matrix C = matrix_from(field(r, "C"), "region C", law.n);
        const Vector d = vector_from(field(r, "d"), "region d");
        if (d.size() != C.rows()) throw SchemaError("region: C and d disagree in row count");
        reg.polytope = Polytope::trusted(C, d);
        reg.gain = matrix_from(field(r, "gain"), "region gain", law.n);
        reg.offset = vector_from(field(r, "offset"), "region offset");
        if (reg.gain.rows() != law.m || reg.offset.size() != law.m) throw SchemaError("region: gain/offset size");
        reg.stage_class = stage_class_from(field(r, "stage_classification").get<std::string>());
        law.regions.push_back(std::move(reg));
    }
    return law;
}

inline PwaLaw load_partition(const std::string& path) {
    try {
        return partition_from_json(parse_file(path));
    } catch (const json::exception& e) {
        throw SchemaError(path + ": " + e.what());
    }
}

inline void save_partition(const std::string& path, const PwaLaw& law, const Counters& counters,
                           const std::string& algorithm) {
    write_text(path, partition_to_json(law, counters, algorithm).dump(1) + "\n");
}

// ---- counters CSV ---------------------------------------------------------

/// One row of the counter history. S_N is unknown (-1) for the baseline.
struct CounterRow {
    std::string algorithm;
    int N = 0;
    Counters counters;
    long long S_N = -1;
    long long M_N = 0;
};

inline const char* kCounterHeader =
    "algorithm,N,candidates,pruning_tests,rank_tests,optimality_lps,feasibility_lps,S_N,M_N";

inline std::string counters_csv(const std::vector<CounterRow>& rows) {
    std::ostringstream os;
    os << kCounterHeader << "\n";
    for (const auto& r : rows) {
        const Counters& c = r.counters;
        os << r.algorithm << ',' << r.N << ',' << c.candidates_generated << ',' << c.pruning_tests << ','
           << c.rank_tests << ',' << c.optimality_lps << ',' << c.feasibility_lps << ',';
        if (r.S_N >= 0) os << r.S_N;
        os << ',' << r.M_N << "\n";
    }
    return os.str();
}

inline std::vector<CounterRow> parse_counters_csv(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line) || line != kCounterHeader) throw SchemaError("counters CSV: unexpected header");
    std::vector<CounterRow> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (line.back() == ',') cells.emplace_back();
        if (cells.size() != 9) throw SchemaError("counters CSV: expected 9 columns");
        try {
            CounterRow r;
            r.algorithm = cells[0];
            r.N = std::stoi(cells[1]);
            r.counters.candidates_generated = std::stoull(cells[2]);
            r.counters.pruning_tests = std::stoull(cells[3]);
            r.counters.rank_tests = std::stoull(cells[4]);
            r.counters.optimality_lps = std::stoull(cells[5]);
            r.counters.feasibility_lps = std::stoull(cells[6]);
            r.S_N = cells[7].empty() ? -1 : std::stoll(cells[7]);
            r.M_N = std::stoll(cells[8]);
            rows.push_back(std::move(r));
        } catch (const std::logic_error&) {
            throw SchemaError("counters CSV: malformed number in '" + line + "'");
        }
    }
    return rows;
}

/// Long-format curves: one line per (N, metric) with a column per algorithm.
inline std::string curves_csv(const std::vector<CounterRow>& rows) {
    const char* metrics[] = {"candidates", "pruning_tests", "rank_tests", "optimality_lps", "feasibility_lps"};
    auto value = [](const Counters& c, int k) -> std::uint64_t {
        switch (k) {
            case 0: return c.candidates_generated;
            case 1: return c.pruning_tests;
            case 2: return c.rank_tests;
            case 3: return c.optimality_lps;
            default: return c.feasibility_lps;
        }
    };
    std::map<int, std::map<std::string, const Counters*>> by_n;
    for (const auto& r : rows) by_n[r.N][r.algorithm] = &r.counters;
    std::ostringstream os;
    os << "metric,N,baseline,dp\n";
    for (int k = 0; k < 5; ++k) {
        for (const auto& [N, algs] : by_n) {
            os << metrics[k] << ',' << N << ',';
            if (auto it = algs.find("baseline"); it != algs.end()) os << value(*it->second, k);
            os << ',';
            if (auto it = algs.find("dp"); it != algs.end()) os << value(*it->second, k);
            os << "\n";
        }
    }
    return os.str();
}

// ---- plots ----------------------------------------------------------------

/// Vertices of a bounded 2-D polytope in counter-clockwise order.
inline std::vector<Vector> polygon_vertices(const Polytope& P, double tol = 1e-9) {
    if (P.dim() != 2) throw DimensionMismatch("polygon_vertices: expects a 2-D polytope");
    std::vector<Vector> pts;
    for (Eigen::Index i = 0; i < P.rows(); ++i) {
        for (Eigen::Index j = i + 1; j < P.rows(); ++j) {
            Eigen::Matrix2d M;
            M << P.C().row(i), P.C().row(j);
            if (std::abs(M.determinant()) < 1e-12) continue;
            const Eigen::Vector2d v = M.partialPivLu().solve(Eigen::Vector2d(P.d()[i], P.d()[j]));
            if (!P.contains(v, tol * (1.0 + v.norm()))) continue;
            bool dup = false;
            for (const auto& p : pts) dup = dup || (p - v).norm() < 1e-9;
            if (!dup) pts.push_back(v);
        }
    }
    if (pts.size() < 3) return pts;
    Vector c = Vector::Zero(2);
    for (const auto& p : pts) c += p;
    c /= static_cast<double>(pts.size());
    std::sort(pts.begin(), pts.end(), [&](const Vector& a, const Vector& b) {
        return std::atan2(a[1] - c[1], a[0] - c[0]) < std::atan2(b[1] - c[1], b[0] - c[0]);
    });
    return pts;
}

inline const char* fill_color(StageClass s) {
    switch (s) {
        case StageClass::TerminalActive: return "#a6a6a6";
        case StageClass::LastStageActive: return "#6d9eeb";
        case StageClass::Interior: return "#ffffff";
    }
    return "#000000";
}

inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

inline std::string partition_svg(const PwaLaw& law, int width = 800, int height = 600) {
    if (law.n != 2) throw DimensionMismatch("partition_svg: only 2-D partitions can be drawn");
    std::vector<std::vector<Vector>> polys;
    double lo0 = kInf, hi0 = -kInf, lo1 = kInf, hi1 = -kInf;
    for (const auto& r : law.regions) {
        polys.push_back(polygon_vertices(r.polytope));
        for (const auto& v : polys.back()) {
            lo0 = std::min(lo0, v[0]);
            hi0 = std::max(hi0, v[0]);
            lo1 = std::min(lo1, v[1]);
            hi1 = std::max(hi1, v[1]);
        }
    }
    if (!(hi0 > lo0) || !(hi1 > lo1)) lo0 = lo1 = -1.0, hi0 = hi1 = 1.0;
    const double pad = 20.0;
    const double sx = (width - 2 * pad) / (hi0 - lo0), sy = (height - 2 * pad) / (hi1 - lo1);
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
       << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
    os << "<title>explicit solution, N = " << law.horizon << ", " << law.regions.size() << " regions</title>\n";
    for (std::size_t k = 0; k < polys.size(); ++k) {
        if (polys[k].size() < 3) continue;
        const Region& r = law.regions[k];
        os << "<polygon class=\"" << to_string(r.stage_class) << "\" data-active-set=\"" << r.aset.to_string()
           << "\" fill=\"" << fill_color(r.stage_class) << "\" stroke=\"#000000\" stroke-width=\"0.5\" points=\"";
        for (std::size_t v = 0; v < polys[k].size(); ++v) {
            const double px = pad + (polys[k][v][0] - lo0) * sx;
            const double py = height - pad - (polys[k][v][1] - lo1) * sy;
            os << (v ? " " : "") << fmt(px) << ',' << fmt(py);
        }
        os << "\"/>\n";
    }
    os << "</svg>\n";
    return os.str();
}

/// Region data for partitions that cannot be drawn: one line per halfspace.
inline std::string regions_csv(const PwaLaw& law) {
    std::ostringstream os;
    os << std::setprecision(17);
    os << "region,active_set,stage_classification,row";
    for (int j = 0; j < law.n; ++j) os << ",c" << j;
    os << ",d\n";
    for (std::size_t k = 0; k < law.regions.size(); ++k) {
        const Region& r = law.regions[k];
        std::string as = r.aset.to_string();
        std::replace(as.begin(), as.end(), ',', ' ');
        for (Eigen::Index i = 0; i < r.polytope.rows(); ++i) {
            os << k << ',' << as << ',' << to_string(r.stage_class) << ',' << i;
            for (Eigen::Index j = 0; j < law.n; ++j) os << ',' << r.polytope.C()(i, j);
            os << ',' << r.polytope.d()[i] << "\n";
        }
    }
    return os.str();
}

}  // namespace dpmpqp::io
