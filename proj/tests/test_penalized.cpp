#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "rbm/errors.hpp"
#include "rbm/penalized.hpp"
#include "rbm/rng.hpp"

using namespace rbm;

namespace {

// Frozen from 50-digit evaluations of 2/sinh(2) and 4 cosh(2)/sinh(2)^2.
constexpr double kMagnitudeAtA = 0.55144112954356642;
constexpr double kRateAtA = 1.14403600258033654;

}  // namespace

TEST_CASE("penalty magnitude and rate at R = a") {
    for (double a : {1.0, 0.1, 0.05, 0.0125}) {
        CHECK(penalty_magnitude(a, a) * a == doctest::Approx(kMagnitudeAtA).epsilon(1e-14));
        CHECK(penalty_rate(a, a) * a * a == doctest::Approx(kRateAtA).epsilon(1e-14));
    }
    CHECK(2.0 / std::sinh(2.0) == doctest::Approx(kMagnitudeAtA).epsilon(1e-15));
    CHECK(4.0 * std::cosh(2.0) / std::pow(std::sinh(2.0), 2) == doctest::Approx(kRateAtA).epsilon(1e-15));
}

TEST_CASE("log-space branches agree with the direct formulas") {
    const double a = 0.1;
    for (double z : {29.0, 29.999, 30.001, 31.0}) {
        const double R = 0.5 * a * z;
        CHECK(penalty_magnitude(a, R) == doctest::Approx(2.0 / (a * std::sinh(z))).epsilon(1e-13));
        CHECK(penalty_rate(a, R) ==
              doctest::Approx(4.0 * std::cosh(z) / (a * a * std::sinh(z) * std::sinh(z))).epsilon(1e-13));
    }
    CHECK(penalty_magnitude(1e-3, 1.0) < 1e-300);
    CHECK(penalty_rate(1e-3, 1.0) < 1e-300);
    CHECK(std::isfinite(penalty_rate(1e-3, 1.0)));
}

TEST_CASE("rate blows up as a is halved with R / a fixed") {
    for (double ratio : {0.5, 1.0, 3.0, 20.0}) {
        for (double a = 0.4; a > 0.01; a /= 2.0) {
            const double coarse = penalty_rate(a, ratio * a);
            const double fine = penalty_rate(a / 2.0, ratio * a / 2.0);
            CHECK(fine > coarse);
            CHECK(fine == doctest::Approx(4.0 * coarse).epsilon(1e-13));
        }
    }
}

TEST_CASE("drift field direction and domain") {
    const ManifoldModel hs = ManifoldModel::half_space(3);
    const Point x{{0.4, -1.0, 0.05}};
    const Vector v = drift_field(hs, 0.05, x).components;
    CHECK(v(0) == 0.0);
    CHECK(v(1) == 0.0);
    CHECK(v(2) == doctest::Approx(kMagnitudeAtA / 0.05).epsilon(1e-14));
    CHECK_THROWS_AS(drift_field(hs, 0.05, Point{{0.0, 0.0, 0.0}}), ArgumentError);
    CHECK_THROWS_AS(drift_field(hs, 0.0, x), ArgumentError);

    // Disk: points along the inward normal.
    const ManifoldModel disk = ManifoldModel::flat_disk();
    const Point y{{0.0, 0.95}};
    const Vector w = drift_field(disk, 0.05, y).components;
    CHECK(w(0) == doctest::Approx(0.0));
    CHECK(w(1) < 0.0);
}

TEST_CASE("zero driver from deep inside is stationary") {
    const TimeGrid grid{1.0, 1000};
    const ManifoldModel hs = ManifoldModel::half_space(2);
    const PenalizedPath p = integrate_penalized(hs, 0.05, Point{{0.3, 3.0}}, DriverPath::zero(grid, 2), grid);
    CHECK(p.L_a(grid.N) < 1e-12);
    CHECK((p.points.rowwise() - p.points.row(0)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("integrator rejects bad input") {
    const TimeGrid grid{1.0, 10};
    const ManifoldModel hs = ManifoldModel::half_space(2);
    const DriverPath d = DriverPath::generate(1, grid, 2);
    CHECK_THROWS_AS(integrate_penalized(hs, 0.05, Point{{0.0, 0.0}}, d, grid), ArgumentError);
    CHECK_THROWS_AS(integrate_penalized(hs, -1.0, Point{{0.0, 1.0}}, d, grid), ArgumentError);
    CHECK_THROWS_AS(integrate_penalized(hs, 0.05, Point{{0.0, 1.0}}, DriverPath::generate(1, grid, 3), grid),
                    ArgumentError);
    CHECK_THROWS_AS(integrate_penalized(hs, 0.05, Point{{0.0, 1.0}}, d, TimeGrid{1.0, 0}), ArgumentError);
}

TEST_CASE("pathwise positivity and monotone local time") {
    const TimeGrid grid{1.0, 1000};
    const std::vector<std::pair<ManifoldModel, Point>> cases{
        {ManifoldModel::half_space(2), Point{{0.0, 0.1}}},
        {ManifoldModel::flat_disk(), Point{{0.9, 0.0}}},
        {ManifoldModel::spherical_cap(std::numbers::pi / 3), Point{{0.9, 0.0}}},
    };
    for (const auto& [model, x0] : cases) {
        for (double a : {0.1, 0.01}) {
            for (std::uint64_t s = 0; s < 50; ++s) {
                const DriverPath d = DriverPath::generate(rng::path_seed(7, s), grid, model.frame_count);
                const PenalizedPath p = integrate_penalized(model, a, x0, d, grid);
                REQUIRE(p.R_values.minCoeff() > 0.0);
                REQUIRE(p.c_a.minCoeff() >= 0.0);
                for (std::size_t i = 0; i < grid.N; ++i) {
                    const auto k = static_cast<Eigen::Index>(i);
                    REQUIRE(p.L_a(k + 1) >= p.L_a(k));
                    // Far from the boundary the local-time increment vanishes.
                    if (p.R_values(k) > 15.0 * a && p.R_values(k + 1) > 15.0 * a) {
                        REQUIRE(p.L_a(k + 1) - p.L_a(k) < 1e-12);
                    }
                }
            }
        }
    }
}

TEST_CASE("c_a series matches the stored node values") {
    const TimeGrid grid{1.0, 500};
    const ManifoldModel cap = ManifoldModel::spherical_cap(1.0);
    const PenalizedPath p = integrate_penalized(cap, 0.05, Point{{0.8, 0.2}}, DriverPath::generate(3, grid, cap.frame_count), grid);
    CHECK(c_a_series(cap, 0.05, p) == p.c_a);
}

TEST_CASE("tangential motion is free and independent of a") {
    const TimeGrid grid{1.0, 1000};
    const ManifoldModel hs = ManifoldModel::half_space(2);
    for (std::uint64_t s = 0; s < 20; ++s) {
        const DriverPath d = DriverPath::generate(rng::path_seed(8, s), grid, 2);
        const PenalizedPath p1 = integrate_penalized(hs, 0.1, Point{{0.5, 0.05}}, d, grid);
        const PenalizedPath p2 = integrate_penalized(hs, 0.01, Point{{0.5, 0.05}}, d, grid);
        const RealPath free = d.component(1, grid);
        CHECK((p1.points.col(0) - p2.points.col(0)).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((p1.points.col(0).array() - 0.5 - free.values.array()).abs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("normal increments share the Brownian part with the driver") {
    const TimeGrid grid{1.0, 1000};
    const ManifoldModel hs = ManifoldModel::half_space(2);
    const double a = 0.05;
    for (std::uint64_t s = 0; s < 20; ++s) {
        const DriverPath d = DriverPath::generate(rng::path_seed(9, s), grid, 2);
        const PenalizedPath p = integrate_penalized(hs, a, Point{{0.0, 0.3}}, d, grid);
        for (std::size_t i = 0; i < grid.N; ++i) {
            const auto k = static_cast<Eigen::Index>(i);
            if (p.R_values(k) < 0.3) continue;  // away from guard refinements
            const double drift = penalty_magnitude(a, p.R_values(k)) * grid.dt();
            CHECK(std::abs(p.R_values(k + 1) - p.R_values(k) - drift - d.increments(k, 0)) < 1e-12);
        }
    }
}

TEST_CASE("one-dimensional half-space agrees with the half-line scheme") {
    // The half-line drift has boundary layer width sqrt(a); parameter a^2 matches width a.
    const TimeGrid grid{1.0, 1000};
    const double a = 0.05;
    const double tol = 5.0 * std::sqrt(grid.dt());
    const ManifoldModel hl = ManifoldModel::half_space(1);
    for (std::uint64_t s = 0; s < 200; ++s) {
        const DriverPath d = DriverPath::generate(rng::path_seed(10, s), grid, 1);
        const PenalizedPath p = integrate_penalized(hl, a, Point::Constant(1, 0.5), d, grid);
        const RealPath q = penalized_path_1d(a * a, 0.5, d.component(0, grid), {d.seed});
        REQUIRE((p.points.col(0) - q.values).cwiseAbs().maxCoeff() <= tol);
    }
}
