#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "rbm/errors.hpp"
#include "rbm/geometry.hpp"

using namespace rbm;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<ManifoldModel> all_models() {
    return {ManifoldModel::half_line(), ManifoldModel::half_space(2), ManifoldModel::half_space(3),
            ManifoldModel::flat_disk(), ManifoldModel::spherical_cap(kPi / 3), ManifoldModel::spherical_cap(1.2)};
}

// Uniform point with boundary distance in [lo, hi).
Point random_point(const ManifoldModel& m, std::mt19937_64& gen, double lo, double hi) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double R = lo + (hi - lo) * u(gen);
    Point x(m.dim);
    switch (m.id) {
        case ModelKind::HalfLine: x(0) = R; break;
        case ModelKind::HalfSpace:
            for (int k = 0; k + 1 < m.dim; ++k) x(k) = -3.0 + 6.0 * u(gen);
            x(m.dim - 1) = R;
            break;
        case ModelKind::FlatDisk: {
            const double a = 2.0 * kPi * u(gen);
            x << (1.0 - R) * std::cos(a), (1.0 - R) * std::sin(a);
            break;
        }
        case ModelKind::SphericalCap: x << m.theta0 - R, -kPi + 2.0 * kPi * u(gen); break;
    }
    return x;
}

double interior_depth(const ManifoldModel& m) {
    switch (m.id) {
        case ModelKind::FlatDisk: return 0.999;
        case ModelKind::SphericalCap: return m.theta0 - 1e-3;
        default: return 3.0;
    }
}

// Velocity in the chart coordinates of a chart-frame vector v at x.
Point chart_velocity(const ManifoldModel& m, const Point& x, const Vector& v) {
    if (m.id != ModelKind::SphericalCap) return v;
    return Point{{v(0), v(1) / std::sin(x(0))}};
}

// Levi-Civita derivative of the vector field F along v at x, in chart-frame components.
template <class Field>
Vector covariant_derivative(const ManifoldModel& m, const Point& x, const Vector& v, Field F) {
    const double h = 1e-5;
    const Point dx = chart_velocity(m, x, v);
    if (m.id != ModelKind::SphericalCap) return (F(Point(x + h * dx)) - F(Point(x - h * dx))) / (2.0 * h);
    auto ambient = [&](const Point& y) -> Eigen::Vector3d { return cap_tangent_basis(y) * F(y); };
    const Eigen::Vector3d D = (ambient(Point(x + h * dx)) - ambient(Point(x - h * dx))) / (2.0 * h);
    return cap_tangent_basis(x).transpose() * D;  // tangential projection
}

}  // namespace

TEST_CASE("boundary distance closed forms") {
    CHECK(boundary_distance(ManifoldModel::half_space(2), Point{{3.0, 0.7}}) == doctest::Approx(0.7).epsilon(1e-15));
    CHECK(boundary_distance(ManifoldModel::flat_disk(), Point::Zero(2)) == 1.0);
    CHECK(boundary_distance(ManifoldModel::spherical_cap(1.2), Point{{kPi / 4, 0.3}}) ==
          doctest::Approx(1.2 - kPi / 4).epsilon(1e-15));
    CHECK(boundary_distance(ManifoldModel::half_line(), Point::Zero(1)) == 0.0);
}

TEST_CASE("points outside the chart domain are rejected") {
    CHECK_THROWS_AS(boundary_distance(ManifoldModel::half_line(), Point::Constant(1, -0.1)), DomainError);
    CHECK_THROWS_AS(boundary_distance(ManifoldModel::flat_disk(), Point{{0.9, 0.9}}), DomainError);
    CHECK_THROWS_AS(boundary_distance(ManifoldModel::spherical_cap(1.0), Point{{1.1, 0.0}}), DomainError);
    CHECK_THROWS_AS(boundary_distance(ManifoldModel::half_space(3), Point::Zero(2)), ArgumentError);
}

TEST_CASE("inward normal examples") {
    const Vector n3 = inward_normal(ManifoldModel::half_space(3), Point{{1.0, -2.0, 5.0}}).components;
    CHECK(n3 == Vector::Unit(3, 2));
    const Vector nd = inward_normal(ManifoldModel::flat_disk(), Point{{0.9, 0.0}}).components;
    CHECK(nd(0) == doctest::Approx(-1.0));
    CHECK(nd(1) == doctest::Approx(0.0));
    // On the cap the inward direction is -d/dtheta.
    const Vector nc = inward_normal(ManifoldModel::spherical_cap(kPi / 3), Point{{kPi / 4, 1.0}}).components;
    CHECK(nc(0) == -1.0);
    CHECK(nc(1) == 0.0);
}

TEST_CASE("normal and shape operator need the tubular zone") {
    CHECK_THROWS_AS(inward_normal(ManifoldModel::flat_disk(), Point::Zero(2)), RangeError);
    CHECK_THROWS_AS(inward_normal(ManifoldModel::spherical_cap(1.0), Point{{0.2, 0.0}}), RangeError);
    const TangentVector w{Point::Zero(2), Vector::Ones(2)};
    CHECK_THROWS_AS(shape_operator(ManifoldModel::flat_disk(), Point{{0.1, 0.0}}, w), RangeError);
}

TEST_CASE("shape operator examples") {
    const ManifoldModel hs = ManifoldModel::half_space(2);
    CHECK(shape_operator(hs, Point{{0.0, 0.1}}, {Point{{0.0, 0.1}}, Vector::Ones(2)}).components.norm() == 0.0);

    // Disk at radius r: tangential unit w maps to w / r.
    const ManifoldModel disk = ManifoldModel::flat_disk();
    const double r = 0.8;
    const double a = 0.7;
    const Point x{{r * std::cos(a), r * std::sin(a)}};
    const Vector et{{-std::sin(a), std::cos(a)}};
    const Vector Sw = shape_operator(disk, x, {x, et}).components;
    CHECK((Sw - et / r).norm() < 1e-14);

    // Cap boundary: tangential unit vector e_phi maps to cot(theta0) e_phi.
    const double t0 = 1.1;
    const ManifoldModel cap = ManifoldModel::spherical_cap(t0);
    const Point xb{{t0, 0.4}};
    const Vector Sc = shape_operator(cap, xb, {xb, Vector::Unit(2, 1)}).components;
    CHECK(Sc(0) == 0.0);
    CHECK(Sc(1) == doctest::Approx(std::cos(t0) / std::sin(t0)).epsilon(1e-14));
}

TEST_CASE("ricci examples") {
    const Vector w{{0.3, -1.7}};
    CHECK(ricci(ManifoldModel::half_space(2), Point{{0.0, 1.0}}, {Point{{0.0, 1.0}}, w}).components.norm() == 0.0);
    CHECK(ricci(ManifoldModel::flat_disk(), Point{{0.1, 0.0}}, {Point{{0.1, 0.0}}, w}).components.norm() == 0.0);
    const Point x{{0.5, 2.0}};
    CHECK(ricci(ManifoldModel::spherical_cap(1.0), x, {x, w}).components == w);
}

TEST_CASE("half-space frame is the Cartesian frame led by grad R") {
    const Frame F = frame(ManifoldModel::half_space(3), Point{{0.0, 0.0, 0.2}});
    CHECK(F.sigma.col(0) == Vector::Unit(3, 2));
    CHECK(F.sigma.col(1) == Vector::Unit(3, 0));
    CHECK(F.sigma.col(2) == Vector::Unit(3, 1));
    CHECK(F.drift.norm() == 0.0);
}

TEST_CASE("disk frame near the boundary and at the origin") {
    const ManifoldModel disk = ManifoldModel::flat_disk();
    const Point x{{0.0, 0.9}};
    const Frame F = frame(disk, x);
    CHECK((F.sigma.col(0) - Vector{{0.0, -1.0}}).norm() < 1e-15);
    CHECK((F.sigma.col(1) - Vector{{-1.0, 0.0}}).norm() < 1e-15);
    CHECK(F.sigma.col(2).norm() == 0.0);
    CHECK((F.drift - Vector{{0.0, 1.0 / (2.0 * 0.9)}}).norm() < 1e-15);

    const Frame F0 = frame(disk, Point::Zero(2));
    CHECK(F0.sigma.leftCols(2).norm() == 0.0);
    CHECK((F0.sigma.rightCols(2) - Eigen::MatrixXd::Identity(2, 2)).norm() == 0.0);
    CHECK(F0.drift.norm() == 0.0);
}

TEST_CASE("model parsing and names round-trip") {
    for (const ManifoldModel& m : all_models()) {
        const ManifoldModel p = ManifoldModel::parse(m.name());
        CHECK(p.id == m.id);
        CHECK(p.dim == m.dim);
        CHECK(p.frame_count == m.frame_count);
        CHECK(p.theta0 == m.theta0);
    }
    CHECK(ManifoldModel::parse("half-space:d=3").dim == 3);
    CHECK(ManifoldModel::parse("cap:theta0=1.0472").theta0 == doctest::Approx(1.0472));
    CHECK_THROWS_AS(ManifoldModel::parse("torus"), ArgumentError);
    CHECK_THROWS_AS(ManifoldModel::parse("half-space:d=0"), ArgumentError);
    CHECK_THROWS_AS(ManifoldModel::parse("cap:theta0=2"), ArgumentError);
}

TEST_CASE("default tubular radii") {
    CHECK(std::isinf(ManifoldModel::half_space(2).tubular_radius));
    CHECK(ManifoldModel::half_space(2).blend_radius() == 1.0);
    CHECK(ManifoldModel::flat_disk().tubular_radius == doctest::Approx(1.0 / 3.0));
    CHECK(ManifoldModel::spherical_cap(0.9).tubular_radius == doctest::Approx(0.3));
}

TEST_CASE("tubular zone invariants on random points") {
    std::mt19937_64 gen(11);
    for (const ManifoldModel& m : all_models()) {
        CAPTURE(m.name());
        const double d0 = m.blend_radius();
        for (int i = 0; i < 1000; ++i) {
            const Point x = random_point(m, gen, 0.0, 0.999 * d0);
            const Vector nu = inward_normal(m, x).components;
            CHECK(std::abs(nu.norm() - 1.0) <= 1e-12);
            const Frame F = frame(m, x);
            CHECK((F.sigma.col(0) - nu).norm() <= 1e-12);
            for (int j = 1; j < m.frame_count; ++j) CHECK(std::abs(F.sigma.col(0).dot(F.sigma.col(j))) <= 1e-12);
            const Vector w = Vector::Random(m.dim);
            CHECK(std::abs(shape_operator(m, x, {x, w}).components.dot(nu)) <= 1e-12);
        }
    }
}

TEST_CASE("frames generate the metric at random points") {
    std::mt19937_64 gen(12);
    for (const ManifoldModel& m : all_models()) {
        CAPTURE(m.name());
        for (int i = 0; i < 1000; ++i) {
            const Point x = random_point(m, gen, 0.0, interior_depth(m));
            const Frame F = frame(m, x);
            const Eigen::MatrixXd G = F.sigma * F.sigma.transpose();
            CHECK((G - Eigen::MatrixXd::Identity(m.dim, m.dim)).norm() <= 1e-12);
        }
    }
}

TEST_CASE("boundary distance is 1-Lipschitz") {
    std::mt19937_64 gen(13);
    for (const ManifoldModel& m : all_models()) {
        CAPTURE(m.name());
        for (int i = 0; i < 500; ++i) {
            const Point x = random_point(m, gen, 0.0, interior_depth(m));
            const Point y = random_point(m, gen, 0.0, interior_depth(m));
            const double dist = m.id == ModelKind::SphericalCap
                                    ? std::acos(std::clamp(cap_embed(x).dot(cap_embed(y)), -1.0, 1.0))
                                    : (x - y).norm();
            CHECK(std::abs(boundary_distance(m, x) - boundary_distance(m, y)) <= dist + 1e-12);
        }
    }
}

TEST_CASE("shape operator matches the derivative of the normal field") {
    std::mt19937_64 gen(14);
    for (const ManifoldModel& m : {ManifoldModel::flat_disk(), ManifoldModel::spherical_cap(kPi / 3),
                                   ManifoldModel::half_space(2)}) {
        CAPTURE(m.name());
        auto nu = [&](const Point& y) { return normal_field(m, y); };
        for (int i = 0; i < 200; ++i) {
            const Point x = random_point(m, gen, 0.0, 0.99 * m.blend_radius());
            const Vector w = Vector::Random(m.dim);
            const Vector n = nu(x);
            Vector fd = -covariant_derivative(m, x, w, nu);
            fd -= n * n.dot(fd);
            CHECK((shape_operator(m, x, {x, w}).components - fd).norm() <= 1e-8);
        }
    }
}

TEST_CASE("frame generator is half the Laplacian") {
    // 1/2 sum_k nabla_{sigma_k} sigma_k + sigma_0 = 0, by central differences.
    std::mt19937_64 gen(15);
    for (const ManifoldModel& m : {ManifoldModel::flat_disk(), ManifoldModel::spherical_cap(kPi / 3),
                                   ManifoldModel::spherical_cap(1.3), ManifoldModel::half_space(2)}) {
        CAPTURE(m.name());
        for (int i = 0; i < 300; ++i) {
            const Point x = random_point(m, gen, 0.0, std::min(interior_depth(m), 2.5 * m.blend_radius()));
            const Frame F = frame(m, x);
            Vector sum = F.drift;
            for (int k = 0; k < m.frame_count; ++k) {
                auto sigma_k = [&](const Point& y) { return Vector(frame(m, y).sigma.col(k)); };
                sum += 0.5 * covariant_derivative(m, x, F.sigma.col(k), sigma_k);
            }
            CHECK(sum.norm() <= 1e-7);
        }
    }
}

TEST_CASE("blend weight is one near the boundary and zero deep inside") {
    const ManifoldModel disk = ManifoldModel::flat_disk();
    const double d0 = disk.tubular_radius;
    CHECK(blend_weight(disk, 0.0) == 1.0);
    CHECK(blend_weight(disk, d0) == 1.0);
    CHECK(blend_weight(disk, 2.0 * d0) == doctest::Approx(0.0).epsilon(1e-30));
    double prev = 1.0;
    for (int i = 0; i <= 100; ++i) {
        const double b = blend_weight(disk, d0 + d0 * i / 100.0);
        CHECK(b <= prev);
        prev = b;
    }
    CHECK(blend_weight(ManifoldModel::half_space(2), 50.0) == 1.0);
}

TEST_CASE("cap embedding and chart are inverse") {
    std::mt19937_64 gen(16);
    const ManifoldModel cap = ManifoldModel::spherical_cap(1.2);
    for (int i = 0; i < 200; ++i) {
        const Point x = random_point(cap, gen, 0.0, 1.19);
        const Point y = cap_chart(cap_embed(x));
        CHECK((x - y).norm() <= 1e-12);
        const auto E = cap_tangent_basis(x);
        CHECK((E.transpose() * E - Eigen::Matrix2d::Identity()).norm() <= 1e-14);
        CHECK((E.transpose() * cap_embed(x)).norm() <= 1e-14);
    }
}

TEST_CASE("boundary projection lands on the boundary") {
    std::mt19937_64 gen(17);
    for (const ManifoldModel& m : all_models()) {
        for (int i = 0; i < 100; ++i) {
            const Point x = random_point(m, gen, 0.0, 0.9 * m.blend_radius());
            const Point p = boundary_projection(m, x);
            CHECK(boundary_distance(m, p) <= 1e-14);
            if (m.id != ModelKind::SphericalCap) CHECK((x - p).norm() == doctest::Approx(boundary_distance(m, x)));
        }
    }
}
