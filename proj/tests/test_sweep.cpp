#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ctwist/cantor.hpp"
#include "ctwist/nulls.hpp"
#include "ctwist/sweep.hpp"
#include "test_support.hpp"

using namespace ctwist;
using Catch::Matchers::WithinAbs;

namespace {

CantorParams hexadic() {
    return validate_params(6, *Rational::parse("1/7"), *Rational::parse("0"), 1);
}

} // namespace

TEST_CASE("twist grid axes and values") {
    const auto grid = twist(hexadic(), 0.5, 0.02, 9.4115, 24, 10);
    REQUIRE(grid.width() == 24);
    REQUIRE(grid.height() == 10);
    REQUIRE(grid.values.size() == 240);

    REQUIRE(grid.phi_axis.front() == 0.02);
    REQUIRE_THAT(grid.phi_axis.back(), WithinAbs(9.4115, 1e-12));
    REQUIRE(grid.eps_axis.front() == 0.0);
    REQUIRE_THAT(grid.eps_axis.back(), WithinAbs(1.0 / 28.0, 1e-15));
    for (std::size_t i = 1; i < grid.phi_axis.size(); ++i)
        REQUIRE(grid.phi_axis[i] > grid.phi_axis[i - 1]);
    for (std::size_t i = 1; i < grid.eps_axis.size(); ++i)
        REQUIRE(grid.eps_axis[i] > grid.eps_axis[i - 1]);

    for (const double v : grid.values) {
        REQUIRE(v >= 0.0);
        REQUIRE(v <= 1.0 + 1e-12);
    }
}

TEST_CASE("twist is deterministic and thread-count independent") {
    const auto base = twist(hexadic(), 0.5, 0.5, 9.0, 16, 8, 1);
    const auto again = twist(hexadic(), 0.5, 0.5, 9.0, 16, 8, 1);
    REQUIRE(base.values == again.values);

    const auto threaded = twist(hexadic(), 0.5, 0.5, 9.0, 16, 8, 4);
    REQUIRE(base.values == threaded.values);
    REQUIRE(base.phi_axis == threaded.phi_axis);
    REQUIRE(base.eps_axis == threaded.eps_axis);
}

TEST_CASE("zero well depth gives an all-transparent grid") {
    const auto grid = twist(hexadic(), 0.0, 0.5, 9.0, 12, 6);
    for (const double v : grid.values) REQUIRE(v < 1e-28);
}

TEST_CASE("twist input validation") {
    REQUIRE_THROWS_AS(twist(hexadic(), 0.5, 0.5, 9.0, 1, 8), Error);
    REQUIRE_THROWS_AS(twist(hexadic(), 0.5, 0.0, 9.0, 8, 8), Error);
    REQUIRE_THROWS_AS(twist(hexadic(), 0.5, 9.0, 0.5, 8, 8), Error);
    // N = 3 has no finite eps_max to sweep
    const auto triadic = validate_params(3, 0.2, 0.0, 1);
    REQUIRE_THROWS_AS(twist(triadic, 0.5, 0.5, 9.0, 8, 8), ValidationError);
}

TEST_CASE("decibel display transform") {
    TwistGrid grid;
    grid.phi_axis = {1.0, 2.0, 3.0};
    grid.eps_axis = {0.0, 0.1};
    grid.values = {1.0, 1e-3, 0.0, 1e-6, 1.0, 1e-3};
    const auto v = to_decibels(grid, -60.0);
    REQUIRE_THAT(v[0], WithinAbs(1.0, 1e-15));  // R = 1 -> white
    REQUIRE_THAT(v[1], WithinAbs(0.5, 1e-15));  // -30 dB at a -60 floor
    REQUIRE_THAT(v[2], WithinAbs(0.0, 1e-15));  // R = 0 clips to the floor
    REQUIRE_THAT(v[3], WithinAbs(0.0, 1e-15));  // -60 dB exactly at the floor
    REQUIRE_THROWS_AS(to_decibels(grid, 0.0), Error);
    REQUIRE_THROWS_AS(to_decibels(grid, 10.0), Error);
}

TEST_CASE("verify_nulls pins the vertical null") {
    const auto params = validate_params(5, *Rational::parse("1/7"), *Rational::parse("0"), 1);
    const double phi1 = std::sqrt(M_PI * M_PI - 0.25);
    std::vector<NullPrediction> preds;
    for (const double eps : {0.0, 0.05, 1.0 / 7.0})
        preds.push_back({NullFamily::Vertical, 1, std::nullopt, eps, phi1, false});
    const auto rows = verify_nulls(params, 0.5, preds, 0.15);
    REQUIRE(rows.size() == preds.size());
    for (const auto& row : rows) {
        REQUIRE(row.r_min < 1e-10);
        REQUIRE(row.residual < 1e-8);
        // the reported minimum cannot exceed R at the prediction itself
        const auto p = with_eps(params, row.prediction.eps);
        const auto at_pred =
            scatter(build_stage(p), energy_point(p, row.prediction.phi, 0.5)).R;
        REQUIRE(row.r_min <= at_pred + 1e-18);
    }
}

TEST_CASE("verify_nulls window validation") {
    const auto params = hexadic();
    const std::vector<NullPrediction> low{
        {NullFamily::Vertical, 1, std::nullopt, 0.0, 0.1, false}};
    REQUIRE_THROWS_AS(verify_nulls(params, 0.5, low, 0.15), WindowOutOfRange);

    const std::vector<NullPrediction> high{
        {NullFamily::Vertical, 1, std::nullopt, 0.0, 5.0, false}};
    REQUIRE_THROWS_AS(verify_nulls(params, 0.5, high, 0.15, 201, 5.1), WindowOutOfRange);
    REQUIRE_THROWS_AS(verify_nulls(params, 0.5, high, 0.0), WindowOutOfRange);
    REQUIRE_NOTHROW(verify_nulls(params, 0.5, high, 0.15, 201, 5.15));
}

TEST_CASE("verify_nulls locates an even-N arc null interior to the window") {
    const auto params = hexadic();
    const auto arcs = arc_nulls(params, 0.5, 1.0 / 35.0, 9.4115);
    std::vector<NullPrediction> preds;
    for (const auto& p : arcs)
        if (p.phi > 3.0) preds.push_back(p);
    REQUIRE_FALSE(preds.empty());
    const auto rows = verify_nulls(params, 0.5, preds, 0.15);
    for (const auto& row : rows) {
        REQUIRE(row.r_min < 1e-6);
        REQUIRE(row.residual < 0.1);
    }
}

TEST_CASE("vertical nulls stay transparent at deeper stages") {
    // the normalization uses a = gamma^S, so a k1 = i pi holds at any stage
    for (const int stage : {1, 2, 3}) {
        const auto params = validate_params(5, *Rational::parse("1/7"),
                                            *Rational::parse("1/14"), stage);
        const auto stack = build_stage(params);
        for (int i = 1; i <= 3; ++i) {
            const double phi = std::sqrt(i * i * M_PI * M_PI - 0.25);
            REQUIRE(scatter(stack, energy_point(params, phi, 0.5)).R < 1e-10);
        }
    }
}

TEST_CASE("analytic curves land on grid minima for even N") {
    // overlay check: at least 95% of arc/striation polyline points above
    // phi = 3 must fall within one grid cell of a local minimum of R along
    // their grid row
    const auto params = hexadic();
    const auto grid = twist(params, 0.5, 0.02, std::sqrt(9 * M_PI * M_PI - 0.25), 301, 41);
    const auto curves = null_curves(params, 0.5, grid.eps_axis, grid.phi_axis.back());
    const double cell = grid.phi_axis[1] - grid.phi_axis[0];

    int total = 0, hits = 0;
    for (const auto& curve : curves) {
        if (curve.family == NullFamily::Vertical) continue;
        for (const auto& pt : curve.points) {
            if (pt.phi <= 3.0) continue;
            // locate the grid row carrying this lacunarity
            std::size_t row = 0;
            double best = 1e300;
            for (std::size_t r = 0; r < grid.height(); ++r) {
                const double d = std::abs(grid.eps_axis[r] - pt.eps);
                if (d < best) {
                    best = d;
                    row = r;
                }
            }
            ++total;
            bool near_minimum = false;
            for (std::size_t c = 1; c + 1 < grid.width() && !near_minimum; ++c) {
                if (grid.at(row, c) < grid.at(row, c - 1) &&
                    grid.at(row, c) < grid.at(row, c + 1) &&
                    std::abs(grid.phi_axis[c] - pt.phi) <= cell)
                    near_minimum = true;
            }
            if (near_minimum) ++hits;
        }
    }
    REQUIRE(total > 100);
    REQUIRE(hits >= (total * 95) / 100);
}

TEST_CASE("with_eps recovers exactness where possible") {
    const auto base = validate_params(6, *Rational::parse("1/7"), *Rational::parse("0"), 1);
    const auto at_max = with_eps(base, 1.0 / 28.0);
    REQUIRE(at_max.eps_exact == Rational(1, 28));
    const auto odd = with_eps(base, 0.021239581435);
    REQUIRE_FALSE(odd.eps_exact.has_value());
    REQUIRE(odd.eps == 0.021239581435);
}
