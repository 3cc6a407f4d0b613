#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "sqb/bifurcation.hpp"
#include "sqb/explore.hpp"

using namespace sqb;

namespace frozen {
constexpr double lambda1 = 0.62186057199244589;
constexpr double lambda2 = 0.87365901353824121;
constexpr double c1 = 0.79640422993911763;
}  // namespace frozen

TEST_CASE("lambda_2 root: value, residual, bracket signs") {
    RootResult r = solve_lambda2_root();
    CHECK(std::abs(r.x - frozen::lambda2) < 1e-9);
    CHECK(std::abs(r.fx) < 1e-10);

    auto F = [](double l) {
        Lambda lam(l);
        return h_lambda(l * theta_fixed(lam), lam).value - std::tan(theta_fixed(lam));
    };
    CHECK(F(0.5) > 0.0);
    CHECK(F(0.95) < 0.0);
}

TEST_CASE("lambda_1 root: value, residual, cross-check with sigma") {
    RootResult r = solve_lambda1_root();
    CHECK(std::abs(r.x - frozen::lambda1) < 1e-9);
    CHECK(std::abs(r.fx) < 1e-10);

    Lambda lam(r.x);
    CHECK(std::abs(sigma_curve(kPi * r.x * (1.0 - r.x) / 2.0, lam).value) < 1e-9);

    // tiny angles at small lambda keep the sum below 1
    auto G = [](double l) {
        Lambda lam2(l);
        return -sigma_curve(kPi * l * (1.0 - l) / 2.0, lam2).value;
    };
    CHECK(G(0.3) < 0.0);
}

TEST_CASE("constants report is internally consistent") {
    BifurcationConstants constants = compute_constants(12);
    CHECK(constants.lambda1 < constants.lambda2);
    double prev = constants.lambda2;
    for (const auto& [n, c] : constants.cn_table) {
        CHECK(c < prev);
        CHECK(c > constants.lambda1);
        prev = c;
    }
    CHECK(std::abs(constants.cn_table[0].second - frozen::c1) < 1e-9);
    CHECK(constants.lambda2_meta.residual < 1e-10);
    CHECK(constants.lambda1_meta.residual < 1e-10);
    CHECK(!constants.has_lambda0());
}

TEST_CASE("basin classification at a glance") {
    BasinGrid grid{120, 120};

    // below lambda_0: everything falls into the parabolic basin
    BasinReport low = basin_of_p(Lambda(0.5), grid, 3000);
    CHECK(low.fraction_to_p > 0.999);
    CHECK(low.fraction_to_p + low.fraction_bounded + low.fraction_singular ==
          Catch::Approx(1.0).margin(1e-12));

    // above lambda_0: an open bounded set survives
    BasinReport mid = basin_of_p(Lambda(0.75), grid, 3000);
    CHECK(mid.fraction_bounded > 0.01);
    CHECK(mid.fraction_to_p < 1.0);

    // above lambda_1 the basin is B and its single preimage: entry <= 2
    BasinReport high = basin_of_p(Lambda(0.8), grid, 3000);
    CHECK(high.max_entry <= 2);
    long top_entries = 0;
    for (std::size_t k = 0; k < high.entry_histogram.size(); ++k)
        if (high.entry_histogram[k] > 0) top_entries = static_cast<long>(k);
    CHECK(top_entries <= 2);
}

TEST_CASE("basin report: deterministic and thread-count independent") {
    BasinGrid grid{64, 64};
    BasinReport a = basin_of_p(Lambda(0.63), grid, 500, 1);
    BasinReport b = basin_of_p(Lambda(0.63), grid, 500, 2);
    CHECK(a.labels == b.labels);
    CHECK(a.entry_iterate == b.entry_iterate);
}

TEST_CASE("basin raster round-trips through the binary layout") {
    BasinGrid grid{33, 17};
    BasinReport report = basin_of_p(Lambda(0.7), grid, 200);
    std::stringstream buf;
    write_basin_raster(buf, report);
    BasinReport back = read_basin_raster(buf);
    CHECK(back.lambda == report.lambda);
    CHECK(back.grid.ns == report.grid.ns);
    CHECK(back.grid.ntheta == report.grid.ntheta);
    CHECK(back.n_iter == report.n_iter);
    CHECK(back.labels == report.labels);

    std::stringstream bad("XXXXXXXXjunkjunkjunk");
    CHECK_THROWS_AS(read_basin_raster(bad), std::runtime_error);
}

TEST_CASE("the dichotomy predicate separates the two regimes") {
    BasinGrid grid{120, 120};
    BasinReport below = basin_of_p(Lambda(0.5), grid, 3000);
    CHECK(below.fraction_bounded <= 0.001);
    BasinReport above = basin_of_p(Lambda(0.615), grid, 3000);
    CHECK(above.fraction_bounded > 0.001);
}

TEST_CASE("heteroclinic probes against B") {
    // at lambda = 0.5 < lambda_1 the q_n heights eventually fall below sigma
    Lambda low(0.5);
    CHECK(heteroclinic_probe_basin(low, 8));
    CHECK(heteroclinic_probe_basin(low, 12));

    // above lambda_1 the unstable sets never reach B
    Lambda mid(0.7);
    CHECK(!heteroclinic_probe_basin(mid, 1));
    CHECK(!heteroclinic_probe_basin(mid, 2));
    CHECK_THROWS_AS(heteroclinic_probe_basin(mid, 5), std::invalid_argument);
}

TEST_CASE("heteroclinic probes against stable graphs") {
    // for small lambda the full-width unstable segments cross every graph
    Lambda small(0.3);
    for (int n = 1; n <= 3; ++n)
        for (int m = 0; m <= 3; ++m) CHECK(heteroclinic_probe(small, n, m));
}

TEST_CASE("regime classification against computed constants") {
    BifurcationConstants constants = compute_constants(3);
    constants.lambda0_bracket = {0.6104, 0.6114};  // documented default bracket
    CHECK(regime_classify(Lambda(0.5), constants).regime == Regime::BelowL0);
    CHECK(regime_classify(Lambda(0.615), constants).regime == Regime::L0toL1);
    CHECK(regime_classify(Lambda(0.75), constants).regime == Regime::L1toL2);
    CHECK(regime_classify(Lambda(0.88), constants).regime == Regime::AboveL2);
    CHECK(regime_classify(Lambda(constants.lambda1), constants).boundary);

    BifurcationConstants empty;
    CHECK_THROWS_AS(regime_classify(Lambda(0.5), empty), std::invalid_argument);
}

TEST_CASE("attractor sampling follows the regime structure") {
    // nonempty in the attractor regimes
    AttractorSample a615 = sample_attractor(Lambda(0.615), 100, 3000, 500, 42);
    CHECK(!a615.points.empty());
    AttractorSample a88 = sample_attractor(Lambda(0.88), 100, 3000, 500, 42);
    CHECK(!a88.points.empty());

    // essentially empty below lambda_0
    AttractorSample a4 = sample_attractor(Lambda(0.4), 100, 3000, 500, 42);
    CHECK(a4.orbits_kept <= 1);

    // determinism across thread counts
    AttractorSample t1 = sample_attractor(Lambda(0.75), 50, 1000, 200, 7, 1);
    AttractorSample t2 = sample_attractor(Lambda(0.75), 50, 1000, 200, 7, 2);
    REQUIRE(t1.points.size() == t2.points.size());
    for (std::size_t i = 0; i < t1.points.size(); i += 97) {
        CHECK(t1.points[i].s == t2.points[i].s);
        CHECK(t1.points[i].theta == t2.points[i].theta);
    }

    // no sampled point may lie in B
    Lambda lam(0.75);
    for (std::size_t i = 0; i < t1.points.size(); i += 11)
        CHECK(!in_basin_core(t1.points[i].s, t1.points[i].theta, 0.75));
}

TEST_CASE("attractor samples above lambda_2 stay inside Delta's closure") {
    Lambda lam(0.9);
    AttractorSample sample = sample_attractor(lam, 60, 4000, 1000, 9);
    REQUIRE(!sample.points.empty());
    for (std::size_t i = 0; i < sample.points.size(); i += 37)
        CHECK(in_delta_closure(sample.points[i], lam, 1e-6));
}

TEST_CASE("scan rows carry the per-lambda summary") {
    ScanParams params;
    params.lambda_lo = 0.60;
    params.lambda_hi = 0.80;
    params.step = 0.05;
    params.n_max = 3;
    params.grid = BasinGrid{40, 40};
    params.n_iter = 400;
    params.attractor_init = 16;
    params.attractor_iter = 500;
    params.attractor_transient = 100;

    BifurcationConstants constants = compute_constants(3);
    constants.lambda0_bracket = {0.6104, 0.6114};
    std::vector<ScanRow> rows = run_scan(params, constants);
    REQUIRE(rows.size() == 5);
    for (const ScanRow& row : rows) CHECK(row.error.empty());
    CHECK(rows[0].lambda == Catch::Approx(0.60));
    CHECK(rows[4].lambda == Catch::Approx(0.80));
    // q-counts shrink as lambda crosses the c_n ladder
    CHECK(rows[0].q_count >= rows[2].q_count);
    CHECK(rows[2].q_count >= rows[4].q_count);
    // homoclinic everywhere below lambda_2
    for (const ScanRow& row : rows) CHECK(row.homoclinic);
}
