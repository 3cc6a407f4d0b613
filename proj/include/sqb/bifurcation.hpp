#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "sqb/common.hpp"
#include "sqb/manifolds.hpp"
#include "sqb/parallel.hpp"
#include "sqb/periodic.hpp"
#include "sqb/rootfind.hpp"
#include "sqb/series.hpp"

namespace sqb {

// lambda_2: unique root of h_lambda(lambda theta_lambda) = tan(theta_lambda);
// the left-minus-right side is strictly decreasing on (0,1).
inline RootResult solve_lambda2_root() {
    auto fn = [](double l) {
        Lambda lam(l);
        double tl = theta_fixed(lam);
        return h_lambda(l * tl, lam).value - std::tan(tl);
    };
    return find_root(fn, 0.5, 0.99, 1e-13);
}

inline double solve_lambda2() { return solve_lambda2_root().x; }

// lambda_1: unique solution of sum_i tan((pi/2) lambda^{i+1} (1-lambda)) = 1,
// i.e. sigma(pi lambda (1-lambda)/2) = 0: the curve S_infinity meets the
// limit line of the q_n angles exactly on s = 0.
inline RootResult solve_lambda1_root() {
    auto fn = [](double l) {
        Lambda lam(l);
        return -sigma_curve(kPi * l * (1.0 - l) / 2.0, lam).value;
    };
    return find_root(fn, 0.3, 0.9, 1e-13);
}

inline double solve_lambda1() { return solve_lambda1_root().x; }

struct SolverMeta {
    int iterations = 0;
    double residual = 0.0;
};

struct BifurcationConstants {
    std::pair<double, double> lambda0_bracket{0.0, 0.0};  // empty until estimated
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    std::vector<std::pair<int, double>> cn_table;
    SolverMeta lambda1_meta, lambda2_meta;
    std::vector<SolverMeta> cn_meta;

    bool has_lambda0() const { return lambda0_bracket.second > 0.0; }
    double lambda0_mid() const {
        return 0.5 * (lambda0_bracket.first + lambda0_bracket.second);
    }
};

inline BifurcationConstants compute_constants(int n_max) {
    BifurcationConstants out;
    RootResult r2 = solve_lambda2_root();
    out.lambda2 = r2.x;
    out.lambda2_meta = {r2.iterations, std::abs(r2.fx)};
    RootResult r1 = solve_lambda1_root();
    out.lambda1 = r1.x;
    out.lambda1_meta = {r1.iterations, std::abs(r1.fx)};
    for (int n = 1; n <= n_max; ++n) {
        RootResult rc = cn_threshold_root(n);
        out.cn_table.emplace_back(n, rc.x);
        out.cn_meta.push_back({rc.iterations, std::abs(rc.fx)});
    }
    return out;
}

// --- basin of the parabolic attractor ----------------------------------------

enum class BasinLabel : std::uint8_t { ToP = 0, Bounded = 1, Singular = 2 };

struct BasinGrid {
    std::size_t ns = 400;
    std::size_t ntheta = 400;
    double s_lo = 0.0, s_hi = 1.0;
    double theta_lo = 0.0, theta_hi = kHalfPi;

    std::size_t cells() const { return ns * ntheta; }
    double s_at(std::size_t i) const {
        return s_lo + (s_hi - s_lo) * (static_cast<double>(i) + 0.5) /
                          static_cast<double>(ns);
    }
    double theta_at(std::size_t j) const {
        return theta_lo + (theta_hi - theta_lo) * (static_cast<double>(j) + 0.5) /
                              static_cast<double>(ntheta);
    }
};

struct BasinReport {
    double lambda = 0.0;
    BasinGrid grid;
    long n_iter = 0;
    // row-major over (theta row, s column)
    std::vector<std::uint8_t> labels;
    // entry iterate into B per cell, -1 when the orbit never enters
    std::vector<std::int32_t> entry_iterate;
    std::vector<std::uint32_t> entry_histogram;  // counts by entry iterate
    double fraction_to_p = 0.0;
    double fraction_bounded = 0.0;
    double fraction_singular = 0.0;
    int max_entry = -1;
};

// Classifies every grid cell center: ToP once the orbit enters
// B = {s < sigma(theta)}, Singular if it dies on S+, Bounded if it survives
// n_iter steps outside B. Deterministic: cells are independent and fractions
// are reduced in a fixed serial pass.
inline BasinReport basin_of_p(Lambda lambda, const BasinGrid& grid, long n_iter,
                              unsigned threads = default_threads()) {
    lambda.require_contracting();
    BasinReport report;
    report.lambda = lambda.value();
    report.grid = grid;
    report.n_iter = n_iter;
    report.labels.assign(grid.cells(), 0);
    report.entry_iterate.assign(grid.cells(), -1);

    double l = lambda.value();
    parallel_for(grid.cells(), threads, [&](std::size_t idx) {
        std::size_t j = idx / grid.ns;  // theta row
        std::size_t i = idx % grid.ns;
        double s = grid.s_at(i);
        double theta = grid.theta_at(j);
        BasinLabel label = BasinLabel::Bounded;
        for (long k = 0; k <= n_iter; ++k) {
            if (in_basin_core(s, theta, l)) {
                label = BasinLabel::ToP;
                report.entry_iterate[idx] = static_cast<std::int32_t>(k);
                break;
            }
            if (k == n_iter) break;
            if (!reduced_step_fast(s, theta, l)) {
                label = BasinLabel::Singular;
                break;
            }
        }
        report.labels[idx] = static_cast<std::uint8_t>(label);
    });

    std::size_t counts[3] = {0, 0, 0};
    report.entry_histogram.assign(static_cast<std::size_t>(n_iter) + 1, 0);
    for (std::size_t idx = 0; idx < grid.cells(); ++idx) {
        counts[report.labels[idx]]++;
        std::int32_t e = report.entry_iterate[idx];
        if (e >= 0) {
            report.entry_histogram[static_cast<std::size_t>(e)]++;
            report.max_entry = std::max(report.max_entry, static_cast<int>(e));
        }
    }
    double total = static_cast<double>(grid.cells());
    report.fraction_to_p = static_cast<double>(counts[0]) / total;
    report.fraction_bounded = static_cast<double>(counts[1]) / total;
    report.fraction_singular = static_cast<double>(counts[2]) / total;
    return report;
}

// --- lambda_0 dichotomy -------------------------------------------------------

struct Lambda0Estimate {
    double lo = 0.0;
    double hi = 0.0;
    // every predicate evaluation (lambda, bounded fraction), in call order
    std::vector<std::pair<double, double>> evals;
};

// Bisects on the empirical dichotomy: below lambda_0 almost every cell is
// attracted to P, above it a positive fraction stays bounded (the hyperbolic
// attractor). Reported as a bracket, never a point value.
inline Lambda0Estimate estimate_lambda0(double lo, double hi,
                                        const BasinGrid& grid, long n_iter,
                                        double threshold = 0.001,
                                        double width = 1e-3,
                                        unsigned threads = default_threads()) {
    Lambda0Estimate est;
    auto bounded_fraction = [&](double l) {
        BasinReport rep = basin_of_p(Lambda(l), grid, n_iter, threads);
        est.evals.emplace_back(l, rep.fraction_bounded);
        return rep.fraction_bounded;
    };

    // widen-and-report: the dichotomy is empirical, so a bad endpoint is
    // retried a few times before giving up
    int attempts = 0;
    while (bounded_fraction(lo) > threshold) {
        lo -= 0.02;
        if (!(lo > 0.0) || ++attempts > 3)
            throw BracketError("estimate_lambda0: predicate true at the low end");
    }
    attempts = 0;
    while (bounded_fraction(hi) <= threshold) {
        hi += 0.02;
        if (!(hi < 1.0) || ++attempts > 3)
            throw BracketError("estimate_lambda0: predicate false at the high end");
    }
    while (hi - lo > width) {
        double mid = 0.5 * (lo + hi);
        (bounded_fraction(mid) > threshold ? hi : lo) = mid;
    }
    est.lo = lo;
    est.hi = hi;
    return est;
}

// --- heteroclinic probes ------------------------------------------------------

// s-extent of the horizontal unstable segment of q_n: at least [0, s_n]; the
// full width [0, 1] once theta_n clears the image height of the singular
// corner, theta_n > lambda pi/4.
inline std::pair<double, double> unstable_extent_qn(const PeriodicOrbitRecord& qn,
                                                    Lambda lambda) {
    double hi = qn.points[0].theta > lambda.value() * kPi / 4.0 ? 1.0
                                                                : qn.points[0].s;
    return {0.0, hi};
}

// W^u(q_n) meets B exactly when sigma is still positive at the height of q_n
// (the segment starts at s = 0+ and B is bounded above by sigma).
inline bool heteroclinic_probe_basin(Lambda lambda, int n) {
    OrbitSolveResult qn = solve_qn(n, lambda);
    if (!qn.exists())
        throw std::invalid_argument("heteroclinic_probe: q_" + std::to_string(n) +
                                    " does not exist at this lambda");
    return sigma_curve(qn.orbit->points[0].theta, lambda).value > 0.0;
}

// Crossing of the unstable segment of q_n with the local stable graph of q_m.
inline bool heteroclinic_probe(Lambda lambda, int n, int m) {
    OrbitSolveResult qn = solve_qn(n, lambda);
    if (!qn.exists())
        throw std::invalid_argument("heteroclinic_probe: q_" + std::to_string(n) +
                                    " does not exist at this lambda");
    if (m > 0 && !solve_qn(m, lambda).exists())
        throw std::invalid_argument("heteroclinic_probe: q_" + std::to_string(m) +
                                    " does not exist at this lambda");
    double theta_n = qn.orbit->points[0].theta;
    double height;
    if (m == 0) {
        height = h_lambda(theta_n, lambda).value;
    } else {
        Curve graph = stable_graph_qm(m, lambda);
        height = MonotoneCubic(graph.theta, graph.s)(theta_n);
    }
    auto [lo, hi] = unstable_extent_qn(*qn.orbit, lambda);
    return height > lo && height < hi;
}

// --- regime classification ----------------------------------------------------

enum class Regime { BelowL0, L0toL1, L1toL2, AboveL2 };

inline const char* to_string(Regime regime) {
    switch (regime) {
        case Regime::BelowL0: return "below_lambda0";
        case Regime::L0toL1: return "lambda0_to_lambda1";
        case Regime::L1toL2: return "lambda1_to_lambda2";
        case Regime::AboveL2: return "above_lambda2";
    }
    return "?";
}

struct RegimeResult {
    Regime regime = Regime::BelowL0;
    bool boundary = false;  // within 1e-6 of a computed constant
};

inline RegimeResult regime_classify(Lambda lambda,
                                    const BifurcationConstants& constants) {
    if (!constants.has_lambda0())
        throw std::invalid_argument("regime_classify: lambda0 bracket not computed");
    double l = lambda.value();
    double l0 = constants.lambda0_mid();
    RegimeResult out;
    if (l < l0)
        out.regime = Regime::BelowL0;
    else if (l < constants.lambda1)
        out.regime = Regime::L0toL1;
    else if (l < constants.lambda2)
        out.regime = Regime::L1toL2;
    else
        out.regime = Regime::AboveL2;
    out.boundary = std::abs(l - l0) < 1e-6 || std::abs(l - constants.lambda1) < 1e-6 ||
                   std::abs(l - constants.lambda2) < 1e-6;
    return out;
}

// --- binary raster of a basin map ---------------------------------------------

// Layout (little-endian): magic "SQBBASIN", u32 version, u32 theta rows,
// u32 s columns, f64 lambda, f64 s_lo, f64 s_hi, f64 theta_lo, f64 theta_hi,
// u64 n_iter, then rows*cols uint8 labels, row-major with s fastest.
inline void write_basin_raster(std::ostream& os, const BasinReport& report) {
    auto put32 = [&](std::uint32_t v) { os.write(reinterpret_cast<const char*>(&v), 4); };
    auto put64 = [&](std::uint64_t v) { os.write(reinterpret_cast<const char*>(&v), 8); };
    auto putf = [&](double v) { os.write(reinterpret_cast<const char*>(&v), 8); };
    os.write("SQBBASIN", 8);
    put32(1u);
    put32(static_cast<std::uint32_t>(report.grid.ntheta));
    put32(static_cast<std::uint32_t>(report.grid.ns));
    putf(report.lambda);
    putf(report.grid.s_lo);
    putf(report.grid.s_hi);
    putf(report.grid.theta_lo);
    putf(report.grid.theta_hi);
    put64(static_cast<std::uint64_t>(report.n_iter));
    os.write(reinterpret_cast<const char*>(report.labels.data()),
             static_cast<std::streamsize>(report.labels.size()));
}

inline BasinReport read_basin_raster(std::istream& is) {
    char magic[8];
    is.read(magic, 8);
    if (std::memcmp(magic, "SQBBASIN", 8) != 0)
        throw std::runtime_error("basin raster: bad magic");
    auto get32 = [&] {
        std::uint32_t v;
        is.read(reinterpret_cast<char*>(&v), 4);
        return v;
    };
    auto get64 = [&] {
        std::uint64_t v;
        is.read(reinterpret_cast<char*>(&v), 8);
        return v;
    };
    auto getf = [&] {
        double v;
        is.read(reinterpret_cast<char*>(&v), 8);
        return v;
    };
    if (get32() != 1u) throw std::runtime_error("basin raster: unknown version");
    BasinReport report;
    report.grid.ntheta = get32();
    report.grid.ns = get32();
    report.lambda = getf();
    report.grid.s_lo = getf();
    report.grid.s_hi = getf();
    report.grid.theta_lo = getf();
    report.grid.theta_hi = getf();
    report.n_iter = static_cast<long>(get64());
    report.labels.resize(report.grid.cells());
    is.read(reinterpret_cast<char*>(report.labels.data()),
            static_cast<std::streamsize>(report.labels.size()));
    if (!is) throw std::runtime_error("basin raster: truncated payload");
    return report;
}

}  // namespace sqb
