#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sqb/bifurcation.hpp"
#include "sqb/common.hpp"
#include "sqb/full_map.hpp"
#include "sqb/manifolds.hpp"
#include "sqb/parallel.hpp"
#include "sqb/periodic.hpp"
#include "sqb/reduced_map.hpp"
#include "sqb/rng.hpp"
#include "sqb/series.hpp"

namespace sqb {

// --- orbit traces -------------------------------------------------------------

struct OrbitTrace {
    struct Row {
        long index = 0;
        double s = 0.0;
        double theta = 0.0;
        const char* branch = "-";  // branch of the step that produced this row
    };
    std::vector<Row> rows;
    bool died = false;
    std::string death_reason;
};

inline OrbitTrace run_reduced_orbit(ReducedPoint p, Lambda lambda, long n) {
    OrbitTrace trace;
    trace.rows.push_back({0, p.s, p.theta, "-"});
    for (long k = 1; k <= n; ++k) {
        try {
            ReducedStep step = reduced_map(p, lambda);
            p = step.image;
            trace.rows.push_back({k, p.s, p.theta, to_string(step.branch)});
        } catch (const SingularPointError& e) {
            trace.died = true;
            trace.death_reason = e.what();
            break;
        }
    }
    return trace;
}

inline OrbitTrace run_full_orbit(FullPoint p, Lambda lambda, long n) {
    OrbitTrace trace;
    trace.rows.push_back({0, p.s, p.theta, "-"});
    for (long k = 1; k <= n; ++k) {
        try {
            FullStep step = full_map(p, lambda);
            p = step.image;
            trace.rows.push_back({k, p.s, p.theta, to_string(step.branch)});
        } catch (const SingularPointError& e) {
            trace.died = true;
            trace.death_reason = e.what();
            break;
        } catch (const std::range_error& e) {
            trace.died = true;
            trace.death_reason = e.what();
            break;
        }
    }
    return trace;
}

// --- attractor sampling -------------------------------------------------------

struct AttractorSample {
    double lambda = 0.0;
    std::uint64_t seed = 0;
    int n_init = 0;
    long n_iter = 0;
    long transient = 0;
    std::vector<ReducedPoint> points;  // post-transient iterates, in IC order
    int orbits_kept = 0;
    int orbits_captured = 0;  // entered B (the basin of P)
    int orbits_died = 0;      // hit the singular set
};

// Ensemble sampling of the chaotic attractor: random initial conditions, a
// transient discard, and rejection of every orbit that is captured by the
// parabolic basin or dies on S+. Each initial condition draws from its own
// split RNG stream and results are merged in IC order, so the output is
// reproducible for a given seed independently of the thread count.
inline AttractorSample sample_attractor(Lambda lambda, int n_init, long n_iter,
                                        long transient, std::uint64_t seed,
                                        unsigned threads = default_threads()) {
    lambda.require_contracting();
    AttractorSample sample;
    sample.lambda = lambda.value();
    sample.seed = seed;
    sample.n_init = n_init;
    sample.n_iter = n_iter;
    sample.transient = transient;

    const double l = lambda.value();
    std::vector<std::vector<ReducedPoint>> kept(n_init);
    std::vector<std::uint8_t> status(n_init, 0);  // 0 kept, 1 captured, 2 died
    SplitMix64 root(seed);
    parallel_for(static_cast<std::size_t>(n_init), threads, [&](std::size_t i) {
        SplitMix64 rng = root.split(i);
        double s = rng.uniform();
        double theta = rng.uniform() * (kHalfPi - 1e-9);
        std::vector<ReducedPoint> orbit;
        for (long k = 0; k < n_iter; ++k) {
            if (in_basin_core(s, theta, l)) {
                status[i] = 1;
                return;
            }
            if (!reduced_step_fast(s, theta, l)) {
                status[i] = 2;
                return;
            }
            if (k >= transient) orbit.push_back(ReducedPoint{s, theta});
        }
        kept[i] = std::move(orbit);
    });
    for (int i = 0; i < n_init; ++i) {
        switch (status[i]) {
            case 0:
                ++sample.orbits_kept;
                sample.points.insert(sample.points.end(), kept[i].begin(), kept[i].end());
                break;
            case 1: ++sample.orbits_captured; break;
            default: ++sample.orbits_died; break;
        }
    }
    return sample;
}

// --- lambda sweep ---------------------------------------------------------------

struct ScanRow {
    double lambda = 0.0;
    Regime regime = Regime::BelowL0;
    double fraction_to_p = 0.0;
    bool attractor_nonempty = false;
    bool homoclinic = false;
    int q_count = 0;  // existing q_n with 1 <= n <= n_max
    int p_count = 0;  // existing p_n with 1 <= n <= n_max
    std::string error;
};

struct ScanParams {
    double lambda_lo = 0.55;
    double lambda_hi = 0.95;
    double step = 0.005;
    int n_max = 10;
    BasinGrid grid{100, 100};
    long n_iter = 2000;
    int attractor_init = 64;
    long attractor_iter = 2000;
    long attractor_transient = 500;
    std::uint64_t seed = 1;
};

inline std::vector<ScanRow> run_scan(const ScanParams& params,
                                     const BifurcationConstants& constants,
                                     unsigned threads = default_threads()) {
    std::vector<double> lambdas;
    for (double l = params.lambda_lo; l <= params.lambda_hi + 1e-12; l += params.step)
        lambdas.push_back(l);
    std::vector<ScanRow> rows(lambdas.size());
    // parallel over lambda values; each row is written by index
    parallel_for(lambdas.size(), threads, [&](std::size_t i) {
        ScanRow& row = rows[i];
        row.lambda = lambdas[i];
        try {
            Lambda lam(row.lambda);
            row.regime = regime_classify(lam, constants).regime;
            row.homoclinic = homoclinic_test(lam).intersects;
            BasinReport basin = basin_of_p(lam, params.grid, params.n_iter, 1);
            row.fraction_to_p = basin.fraction_to_p;
            AttractorSample att = sample_attractor(
                lam, params.attractor_init, params.attractor_iter,
                params.attractor_transient, params.seed, 1);
            row.attractor_nonempty = !att.points.empty();
            for (int n = 1; n <= params.n_max; ++n) {
                if (solve_qn(n, lam).exists()) ++row.q_count;
                if (solve_pn(n, lam).exists()) ++row.p_count;
            }
        } catch (const std::exception& e) {
            row.error = e.what();
        }
    });
    return rows;
}

}  // namespace sqb
