#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "rbm/errors.hpp"
#include "rbm/reflected.hpp"
#include "rbm/rng.hpp"
#include "rbm/transport.hpp"

using namespace rbm;

namespace {

constexpr double kPi = std::numbers::pi;

Eigen::MatrixXd latitude_loop(double theta, int steps) {
    Eigen::MatrixXd pts(steps + 1, 2);
    for (int i = 0; i <= steps; ++i) pts.row(i) << theta, -kPi + 2.0 * kPi * i / steps;
    return pts;
}

Eigen::Matrix2d rotation(double angle) {
    Eigen::Matrix2d R;
    R << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
    return R;
}

Eigen::MatrixXd cap_path(std::uint64_t seed, const TimeGrid& grid) {
    const ManifoldModel cap = ManifoldModel::spherical_cap(kPi / 3);
    const DriverPath d = DriverPath::generate(seed, grid, cap.frame_count);
    return integrate_reflected(cap, Point{{0.8, 0.3}}, d, grid).points;
}

}  // namespace

TEST_CASE("flat models transport by the identity") {
    const TimeGrid grid{1.0, 200};
    for (const ManifoldModel& m : {ManifoldModel::half_space(3), ManifoldModel::flat_disk()}) {
        const DriverPath d = DriverPath::generate(1, grid, m.frame_count);
        const Point x0 = m.id == ModelKind::FlatDisk ? Point{{0.5, 0.0}} : Point{{0.0, 0.0, 0.5}};
        const TransportFrame F = parallel_transport(m, integrate_reflected(m, x0, d, grid).points);
        REQUIRE(F.P.size() == grid.N + 1);
        for (const Eigen::MatrixXd& P : F.P) CHECK(P == Eigen::MatrixXd::Identity(m.dim, m.dim));
    }
}

TEST_CASE("constant and single-node paths transport by the identity") {
    const ManifoldModel cap = ManifoldModel::spherical_cap(1.0);
    const Eigen::MatrixXd still = Eigen::RowVector2d(0.7, 1.3).replicate(50, 1);
    for (const Eigen::MatrixXd& P : parallel_transport(cap, still).P) CHECK(P.isIdentity(1e-15));
    const TransportFrame single = parallel_transport(cap, Eigen::RowVector2d(0.7, 1.3));
    REQUIRE(single.P.size() == 1);
    CHECK(single.P[0] == Eigen::MatrixXd::Identity(2, 2));
    CHECK_THROWS_AS(parallel_transport(cap, Eigen::MatrixXd::Zero(3, 3)), ArgumentError);
}

TEST_CASE("latitude holonomy on the sphere") {
    const ManifoldModel cap = ManifoldModel::spherical_cap(1.2);
    // At theta = pi/3 the loop returns rotation by pi.
    const TransportFrame F = parallel_transport(cap, latitude_loop(kPi / 3, 10000));
    CHECK((F.P.back() - rotation(kPi)).norm() <= 1e-4);

    for (double theta : {0.3, kPi / 4, 1.1}) {
        const Eigen::MatrixXd P = parallel_transport(cap, latitude_loop(theta, 10000)).P.back();
        const double angle = 2.0 * kPi * std::cos(theta);
        const double err = std::min((P - rotation(angle)).norm(), (P - rotation(-angle)).norm());
        CHECK(err <= 1e-4);
    }
}

TEST_CASE("transport is an isometry") {
    const TimeGrid grid{1.0, 2000};
    for (std::uint64_t s = 0; s < 20; ++s) {
        const TransportFrame F = parallel_transport(ManifoldModel::spherical_cap(kPi / 3), cap_path(rng::path_seed(2, s), grid));
        const Eigen::Vector2d v(0.6, -0.8);
        for (const Eigen::MatrixXd& P : F.P) {
            REQUIRE(std::abs((P * v).norm() - 1.0) <= 1e-8);
            REQUIRE((P.transpose() * P - Eigen::MatrixXd::Identity(2, 2)).norm() <= 1e-10);
        }
    }
}

TEST_CASE("transport composes along a split path") {
    const TimeGrid grid{1.0, 1000};
    const ManifoldModel cap = ManifoldModel::spherical_cap(kPi / 3);
    for (std::uint64_t s = 0; s < 20; ++s) {
        const Eigen::MatrixXd pts = cap_path(rng::path_seed(3, s), grid);
        const TransportFrame whole = parallel_transport(cap, pts);
        const Eigen::Index split = 137 + 40 * static_cast<Eigen::Index>(s);
        const TransportFrame tail = parallel_transport(cap, pts.bottomRows(pts.rows() - split));
        for (std::size_t j = 0; j < tail.P.size(); ++j) {
            REQUIRE((tail.P[j] * whole.P[split] - whole.P[split + j]).norm() <= 1e-10);
        }
    }
}

TEST_CASE("transport convergence check") {
    const TimeGrid grid{1.0, 1000};
    const std::vector<double> a_grid{0.1, 0.05, 0.025};

    const ManifoldModel hs = ManifoldModel::half_space(2);
    const std::vector<double> flat = transport_convergence_check(
        hs, a_grid, DriverPath::generate(1, grid, 2), grid, {Point{{0.0, 0.2}}, Vector{{1.0, 0.0}}});
    CHECK(flat == std::vector<double>(3, 0.0));

    const ManifoldModel cap = ManifoldModel::spherical_cap(kPi / 3);
    std::vector<std::vector<double>> per_a(a_grid.size());
    for (std::uint64_t s = 0; s < 200; ++s) {
        const DriverPath d = DriverPath::generate(rng::path_seed(4, s), grid, cap.frame_count);
        const std::vector<double> g =
            transport_convergence_check(cap, a_grid, d, grid, {Point{{0.9, 0.0}}, Vector{{0.6, 0.8}}});
        for (std::size_t k = 0; k < g.size(); ++k) per_a[k].push_back(g[k]);
    }
    std::vector<double> medians;
    for (auto& v : per_a) {
        std::nth_element(v.begin(), v.begin() + 100, v.end());
        medians.push_back(v[100]);
    }
    CHECK(medians[0] > medians[1]);
    CHECK(medians[1] > medians[2]);
}
