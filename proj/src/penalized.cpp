#include "rbm/penalized.hpp"

#include <cmath>

#include "rbm/errors.hpp"
#include "rbm/rng.hpp"
#include "stepping.hpp"

namespace rbm {

Eigen::VectorXd TimeGrid::nodes() const {
    Eigen::VectorXd t(N + 1);
    for (std::size_t i = 0; i <= N; ++i) t(static_cast<Eigen::Index>(i)) = time(i);
    return t;
}

void TimeGrid::validate() const {
    if (N < 1) throw ArgumentError("time grid needs at least one step");
    if (!(T > 0.0) || !std::isfinite(T)) throw ArgumentError("time horizon must be positive");
}

DriverPath DriverPath::generate(std::uint64_t seed, const TimeGrid& grid, int m) {
    grid.validate();
    const double sdt = std::sqrt(grid.dt());
    DriverPath d{seed, Eigen::MatrixXd(static_cast<Eigen::Index>(grid.N), m)};
    const std::uint64_t base = rng::hash(seed, rng::kIncrementStream);
    for (Eigen::Index i = 0; i < d.increments.rows(); ++i) {
        const std::uint64_t row = rng::hash(base, static_cast<std::uint64_t>(i));
        for (int k = 0; k < m; ++k) d.increments(i, k) = sdt * rng::normal(rng::hash(row, static_cast<std::uint64_t>(k)));
    }
    return d;
}

DriverPath DriverPath::zero(const TimeGrid& grid, int m) {
    grid.validate();
    return {0, Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(grid.N), m)};
}

RealPath DriverPath::component(int k, const TimeGrid& grid) const {
    RealPath p{grid.nodes(), Eigen::VectorXd(increments.rows() + 1)};
    p.values(0) = 0.0;
    for (Eigen::Index i = 0; i < increments.rows(); ++i) p.values(i + 1) = p.values(i) + increments(i, k);
    return p;
}

double penalty_magnitude(double a, double R) {
    const double z = 2.0 * R / a;
    if (z > 30.0) return (4.0 / a) * std::exp(-z) / (1.0 - std::exp(-2.0 * z));
    return 2.0 / (a * std::sinh(z));
}

double penalty_rate(double a, double R) {
    const double z = 2.0 * R / a;
    if (z > 30.0) {
        const double e2 = std::exp(-2.0 * z);
        return (8.0 / (a * a)) * std::exp(-z) * (1.0 + e2) / ((1.0 - e2) * (1.0 - e2));
    }
    const double s = std::sinh(z);
    return (4.0 / (a * a)) * std::cosh(z) / (s * s);
}

TangentVector drift_field(const ManifoldModel& model, double a, const Point& x) {
    if (!(a > 0.0)) throw ArgumentError("penalization parameter must be > 0");
    const double R = boundary_distance(model, x);
    if (!(R > 0.0)) throw ArgumentError("penalizing drift is undefined on the boundary");
    const double w = blend_weight(model, R);
    if (w == 0.0) return {x, Vector::Zero(model.dim)};
    return {x, w * penalty_magnitude(a, R) * normal_field(model, x)};
}

PenalizedPath integrate_penalized(const ManifoldModel& model, double a, const Point& x0,
                                  const DriverPath& driver, const TimeGrid& grid,
                                  const PenalizedOptions& options) {
    grid.validate();
    if (!(a > 0.0)) throw ArgumentError("penalization parameter must be > 0");
    if (driver.increments.rows() != static_cast<Eigen::Index>(grid.N) ||
        driver.increments.cols() != model.frame_count) {
        throw ArgumentError("driver shape does not match grid and frame count");
    }
    if (!(boundary_distance(model, x0) > 0.0)) throw ArgumentError("penalized start must be interior");

    const auto n = static_cast<Eigen::Index>(grid.N);
    PenalizedPath out{a, grid, Eigen::MatrixXd(n + 1, model.dim), Eigen::VectorXd(n + 1),
                      Eigen::VectorXd(n + 1), Eigen::VectorXd(n + 1), Eigen::VectorXd(n)};

    auto g = [&](double R) { return blend_weight(model, R) * penalty_magnitude(a, R); };
    auto c = [&](double R) { return blend_weight(model, R) * penalty_rate(a, R); };

    Point X = x0;
    double L = 0.0;
    const std::uint64_t bridge = rng::hash(driver.seed, rng::kBridgeStream);
    out.points.row(0) = X.transpose();
    out.L_a(0) = 0.0;

    for (Eigen::Index i = 0; i < n; ++i) {
        double C = 0.0;
        const std::uint64_t node_key = rng::hash(bridge, static_cast<std::uint64_t>(i));
        auto split = [&](auto&& self, const Eigen::VectorXd& dB, double h, int depth, std::uint64_t pos) -> void {
            Eigen::VectorXd d1(dB.size());
            const std::uint64_t key = rng::hash(node_key, static_cast<std::uint64_t>(depth), pos);
            for (Eigen::Index k = 0; k < dB.size(); ++k) {
                d1(k) = 0.5 * dB(k) + 0.5 * std::sqrt(h) * rng::normal(rng::hash(key, static_cast<std::uint64_t>(k)));
            }
            self(self, d1, 0.5 * h, depth + 1, 2 * pos);
            self(self, Eigen::VectorXd(dB - d1), 0.5 * h, depth + 1, 2 * pos + 1);
        };
        auto advance = [&](auto&& self, const Eigen::VectorXd& dB, double h, int depth, std::uint64_t pos) -> void {
            const double R = detail::signed_distance(model, X);
            const bool can_split = depth < options.max_bisections;
            if (!detail::use_tubular(model, R)) {
                Point Y = detail::interior_step(model, X, dB);
                if (detail::signed_distance(model, Y) > 0.0) {
                    X = std::move(Y);
                } else if (can_split) {
                    split(self, dB, h, depth, pos);
                } else {
                    throw IntegrationError("interior step left the domain", static_cast<std::size_t>(i));
                }
                return;
            }
            const detail::Tubular tc = detail::to_tubular(model, X);
            const detail::TubularIncrement inc = detail::tubular_increment(model, X, tc, dB);
            const double push = g(R);
            const double base = R + inc.noise_R + inc.drift_R * h;
            const double proposal = base + push * h;
            if ((push * h > 0.5 * R || proposal <= 0.0) && can_split) {
                split(self, dB, h, depth, pos);
                return;
            }
            double R_new = proposal, dL = push * h, dC = c(R) * h;
            if (!(proposal > 0.0)) {
                R_new = detail::implicit_positive_step(g, base, h);
                dL = g(R_new) * h;
                dC = c(R_new) * h;
            }
            if (!(R_new > 0.0) || !std::isfinite(R_new)) {
                throw IntegrationError("penalized step lost positivity", static_cast<std::size_t>(i));
            }
            X = detail::from_tubular(model, {R_new, tc.s + inc.ds});
            L += dL;
            C += dC;
        };
        advance(advance, Eigen::VectorXd(driver.increments.row(i).transpose()), grid.dt(), 0, 0);
        out.points.row(i + 1) = X.transpose();
        out.L_a(i + 1) = L;
        out.c_a_integral(i) = C;
    }
    for (Eigen::Index i = 0; i <= n; ++i) {
        const double R = detail::signed_distance(model, out.points.row(i).transpose());
        out.R_values(i) = R;
        out.c_a(i) = c(R);
    }
    return out;
}

Eigen::VectorXd c_a_series(const ManifoldModel& model, double a, const PenalizedPath& path) {
    Eigen::VectorXd out(path.R_values.size());
    for (Eigen::Index i = 0; i < out.size(); ++i) {
        out(i) = blend_weight(model, path.R_values(i)) * penalty_rate(a, path.R_values(i));
    }
    return out;
}

}  // namespace rbm
