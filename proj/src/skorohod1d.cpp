#include "rbm/skorohod1d.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "rbm/errors.hpp"
#include "rbm/rng.hpp"
#include "stepping.hpp"

namespace rbm {

namespace {

void require_driver(double x, const RealPath& f) {
    f.validate();
    if (f.values(0) != 0.0) throw ArgumentError("driver must start at 0");
    if (!(x >= 0.0)) throw ArgumentError("start point must be >= 0");
}

SkorohodSolution assemble(double x, const RealPath& f, const Eigen::VectorXd& running_min) {
    const Eigen::Index n = f.size();
    SkorohodSolution s{x, f, {f.grid, Eigen::VectorXd(n)}, {f.grid, Eigen::VectorXd(n)}};
    for (Eigen::Index i = 0; i < n; ++i) {
        // g = (f - m) + (x + m)^+ rounds monotonically in x, unlike x + f + h.
        s.local_time.values(i) = std::max(0.0, -(x + running_min(i)));
        s.reflected.values(i) = (f.values(i) - running_min(i)) + std::max(0.0, x + running_min(i));
    }
    return s;
}

// Large-argument form of phi, accurate once exp(-y^2/2) is below 1e-8.
double gauss_integral_tail(double y) {
    return std::sqrt(std::numbers::pi / 2) - std::exp(-0.5 * y * y) / y;
}

// (ln phi)'(y) = exp(-y^2/2) / phi(y).
double log_gauss_slope(double y) {
    if (y > 6.0) return std::exp(-0.5 * y * y - std::log(gauss_integral_tail(y)));
    return std::exp(-0.5 * y * y) / gauss_integral(y);
}

}  // namespace

void RealPath::validate() const {
    if (grid.size() != values.size()) throw ArgumentError("path grid and values differ in length");
    if (grid.size() < 1) throw ArgumentError("path must have at least one node");
    for (Eigen::Index i = 1; i < grid.size(); ++i) {
        if (!(grid(i) > grid(i - 1))) throw ArgumentError("path grid must be strictly increasing");
    }
}

SkorohodSolution skorohod_map(double x, const RealPath& f) {
    require_driver(x, f);
    Eigen::VectorXd m(f.size());
    m(0) = f.values(0);
    for (Eigen::Index i = 1; i < f.size(); ++i) m(i) = std::min(m(i - 1), f.values(i));
    return assemble(x, f, m);
}

SkorohodSolution skorohod_map(double x, const RealPath& f, std::span<const double> step_min) {
    require_driver(x, f);
    if (static_cast<Eigen::Index>(step_min.size()) + 1 != f.size()) {
        throw ArgumentError("need one minimum per driver step");
    }
    Eigen::VectorXd m(f.size());
    m(0) = f.values(0);
    for (Eigen::Index i = 1; i < f.size(); ++i) {
        const double seg = std::min({step_min[i - 1], f.values(i - 1), f.values(i)});
        m(i) = std::min(m(i - 1), seg);
    }
    return assemble(x, f, m);
}

double first_hit_zero(const SkorohodSolution& s) {
    const double x = s.start;
    const auto& f = s.driver.values;
    const auto& t = s.driver.grid;
    if (x == 0.0) return t(0);
    for (Eigen::Index i = 1; i < f.size(); ++i) {
        if (s.reflected.values(i) == 0.0 || s.local_time.values(i) > 0.0) {
            const double a = x + f(i - 1);
            const double b = x + f(i);
            if (b <= 0.0 && a > 0.0) return t(i - 1) + (t(i) - t(i - 1)) * (a / (a - b));
            return t(i);
        }
    }
    return kNever;
}

double local_time_at(const SkorohodSolution& s, double t) {
    const auto& grid = s.driver.grid;
    const Eigen::Index n = grid.size();
    if (t <= grid(0)) return s.local_time.values(0);
    if (t >= grid(n - 1)) return s.local_time.values(n - 1);
    const auto* it = std::upper_bound(grid.data(), grid.data() + n, t);
    const Eigen::Index k = (it - grid.data()) - 1;
    const double w = (t - grid(k)) / (grid(k + 1) - grid(k));
    const double v = s.start + (1.0 - w) * s.driver.values(k) + w * s.driver.values(k + 1);
    return std::max(s.local_time.values(k), -v);
}

RealPath derivative_flow_exact(double x, const RealPath& f) {
    const SkorohodSolution s = skorohod_map(x, f);
    const double tau = first_hit_zero(s);
    RealPath out{f.grid, Eigen::VectorXd(f.size())};
    for (Eigen::Index i = 0; i < f.size(); ++i) out.values(i) = f.grid(i) < tau ? 1.0 : 0.0;
    return out;
}

double coalescence_time(double x, double y, const RealPath& f) {
    if (!(x < y)) throw ArgumentError("coalescence needs x < y");
    const SkorohodSolution sx = skorohod_map(x, f);
    const SkorohodSolution sy = skorohod_map(y, f);
    const double tol = 1e-12 * (1.0 + std::abs(y));
    const auto& t = f.grid;
    // D(s) = (y - x) + h_y(s) - h_x(s) on the segment [k-1, k], linear between breakpoints.
    for (Eigen::Index k = 1; k < f.size(); ++k) {
        if (sy.reflected.values(k) - sx.reflected.values(k) > tol) continue;
        const double f0 = f.values(k - 1), f1 = f.values(k);
        const double hx0 = sx.local_time.values(k - 1), hy0 = sy.local_time.values(k - 1);
        auto D = [&](double s) {
            const double v = (1.0 - s) * f0 + s * f1;
            return (y - x) + std::max(hy0, -(y + v)) - std::max(hx0, -(x + v));
        };
        std::array<double, 4> knots{0.0, 1.0, 0.0, 0.0};
        int nk = 2;
        if (f1 != f0) {
            for (double level : {-x - hx0, -y - hy0}) {
                const double s = (level - f0) / (f1 - f0);
                if (s > 0.0 && s < 1.0) knots[nk++] = s;
            }
        }
        std::sort(knots.begin(), knots.begin() + nk);
        double s0 = knots[0], d0 = D(s0);
        if (d0 <= tol) return t(k - 1);
        for (int j = 1; j < nk; ++j) {
            const double s1 = knots[j], d1 = D(s1);
            if (d1 <= tol) {
                const double s = d1 < d0 ? s0 + (s1 - s0) * d0 / (d0 - d1) : s1;
                return t(k - 1) + (t(k) - t(k - 1)) * s;
            }
            s0 = s1;
            d0 = d1;
        }
        return t(k);
    }
    return kNever;
}

RealPath tanaka_reflection(double x, const RealPath& f) {
    require_driver(x, f);
    return {f.grid, (x + f.values.array()).abs().matrix()};
}

double gauss_integral(double y) {
    return std::sqrt(std::numbers::pi / 2) * std::erf(y / std::numbers::sqrt2);
}

double penalized_drift_1d(double a, double x) {
    if (!(a > 0.0)) throw ArgumentError("penalization parameter must be > 0");
    if (!(x > 0.0)) throw ArgumentError("penalized drift requires x > 0");
    const double sa = std::sqrt(a);
    return log_gauss_slope(x / sa) / sa;
}

double penalized_drift_1d_slope(double a, double x) {
    if (!(a > 0.0)) throw ArgumentError("penalization parameter must be > 0");
    if (!(x > 0.0)) throw ArgumentError("penalized drift requires x > 0");
    const double y = x / std::sqrt(a);
    const double A = log_gauss_slope(y);
    return -(y * A + A * A) / a;
}

RealPath penalized_path_1d(double a, double x, const RealPath& driver, const PenalizedScheme1d& scheme) {
    if (!(x > 0.0)) throw ArgumentError("penalized path requires x > 0");
    if (!(a > 0.0)) throw ArgumentError("penalization parameter must be > 0");
    driver.validate();
    const double sa = std::sqrt(a);
    auto drift = [sa](double y) { return log_gauss_slope(y / sa) / sa; };
    const std::uint64_t bridge = rng::hash(scheme.bridge_seed, rng::kBridgeStream);

    RealPath out{driver.grid, Eigen::VectorXd(driver.size())};
    out.values(0) = x;
    double X = x;
    for (Eigen::Index i = 0; i + 1 < driver.size(); ++i) {
        const std::uint64_t node_key = rng::hash(bridge, static_cast<std::uint64_t>(i));
        // Depth-first refinement of the step [t_i, t_{i+1}] by Brownian-bridge midpoints.
        auto advance = [&](auto&& self, double dB, double h, int depth, std::uint64_t pos) -> void {
            const double g = drift(X);
            const double proposal = X + dB + g * h;
            if ((g * h > 0.5 * X || proposal <= 0.0) && depth < scheme.max_bisections) {
                const double z = rng::normal(rng::hash(node_key, static_cast<std::uint64_t>(depth), pos));
                const double d1 = 0.5 * dB + 0.5 * std::sqrt(h) * z;
                self(self, d1, 0.5 * h, depth + 1, 2 * pos);
                self(self, dB - d1, 0.5 * h, depth + 1, 2 * pos + 1);
                return;
            }
            X = proposal > 0.0 ? proposal : detail::implicit_positive_step(drift, X + dB, h);
            if (!(X > 0.0) || !std::isfinite(X)) {
                throw IntegrationError("penalized half-line step lost positivity", static_cast<std::size_t>(i));
            }
        };
        advance(advance, driver.values(i + 1) - driver.values(i), driver.grid(i + 1) - driver.grid(i), 0, 0);
        out.values(i + 1) = X;
    }
    return out;
}

RealPath derivative_flow_penalized(double a, const RealPath& path) {
    path.validate();
    RealPath out{path.grid, Eigen::VectorXd(path.size())};
    out.values(0) = 1.0;
    double log_v = 0.0;
    for (Eigen::Index i = 0; i + 1 < path.size(); ++i) {
        if (!(path.values(i) > 0.0)) throw ArgumentError("penalized derivative flow needs a positive path");
        log_v += penalized_drift_1d_slope(a, path.values(i)) * (path.grid(i + 1) - path.grid(i));
        out.values(i + 1) = std::exp(log_v);
    }
    return out;
}

}  // namespace rbm
