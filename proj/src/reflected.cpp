#include "rbm/reflected.hpp"

#include <algorithm>
#include <cmath>

#include "rbm/errors.hpp"
#include "rbm/rng.hpp"
#include "rbm/skorohod1d.hpp"
#include "stepping.hpp"

namespace rbm {

namespace {

// Minimum of a Brownian bridge from a to b over a step of length h, sampled
// by inverting its distribution function at the uniform u.
double bridge_minimum(double a, double b, double h, double u) {
    const double d = b - a;
    return 0.5 * (a + b - std::sqrt(d * d - 2.0 * h * std::log(u)));
}

std::vector<double> bridge_minima(const RealPath& f, const DriverPath& driver, const TimeGrid& grid) {
    std::vector<double> minima(grid.N);
    const std::uint64_t base = rng::hash(driver.seed, rng::kMinimumStream);
    for (std::size_t i = 0; i < grid.N; ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        minima[i] = bridge_minimum(f.values(k), f.values(k + 1), grid.dt(),
                                   rng::uniform(rng::hash(base, static_cast<std::uint64_t>(i))));
    }
    return minima;
}

void integrate_flat(const ManifoldModel& model, const Point& x0, const DriverPath& driver,
                    const TimeGrid& grid, ReflectionScheme scheme, ReflectedPath& out) {
    const int d = model.dim;
    const RealPath f = driver.component(0, grid);
    const SkorohodSolution s = scheme == ReflectionScheme::BridgeMinimum
                                   ? skorohod_map(x0(d - 1), f, bridge_minima(f, driver, grid))
                                   : skorohod_map(x0(d - 1), f);
    out.points.col(d - 1) = s.reflected.values;
    out.R_values = s.reflected.values;
    out.L = s.local_time.values;
    for (int k = 0; k + 1 < d; ++k) {
        const RealPath tk = driver.component(k + 1, grid);
        out.points.col(k) = (x0(k) + tk.values.array()).matrix();
    }
}

void integrate_curved(const ManifoldModel& model, const Point& x0, const DriverPath& driver,
                      const TimeGrid& grid, ReflectedPath& out) {
    const double h = grid.dt();
    Point X = x0;
    double L = 0.0;
    out.points.row(0) = X.transpose();
    out.R_values(0) = std::max(0.0, detail::signed_distance(model, X));
    out.L(0) = 0.0;
    for (std::size_t i = 0; i < grid.N; ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        const Eigen::VectorXd dB = driver.increments.row(k).transpose();
        const double R = detail::signed_distance(model, X);
        double R_new;
        if (detail::use_tubular(model, R)) {
            const detail::Tubular tc = detail::to_tubular(model, X);
            const detail::TubularIncrement inc = detail::tubular_increment(model, X, tc, dB);
            R_new = R + inc.noise_R + inc.drift_R * h;
            if (R_new < 0.0) {
                L -= R_new;
                R_new = 0.0;
            }
            X = detail::from_tubular(model, {R_new, tc.s + inc.ds});
        } else {
            X = detail::interior_step(model, X, dB);
            R_new = detail::signed_distance(model, X);
            if (R_new < 0.0) {
                L -= R_new;
                R_new = 0.0;
                X = boundary_projection(model, X);
            }
        }
        out.points.row(k + 1) = X.transpose();
        out.R_values(k + 1) = R_new;
        out.L(k + 1) = L;
    }
}

}  // namespace

ReflectedPath integrate_reflected(const ManifoldModel& model, const Point& x0, const DriverPath& driver,
                                  const TimeGrid& grid, const ReflectedOptions& options) {
    grid.validate();
    if (driver.increments.rows() != static_cast<Eigen::Index>(grid.N) ||
        driver.increments.cols() != model.frame_count) {
        throw ArgumentError("driver shape does not match grid and frame count");
    }
    boundary_distance(model, x0);  // domain check
    const auto n = static_cast<Eigen::Index>(grid.N);
    ReflectedPath out{grid, Eigen::MatrixXd(n + 1, model.dim), Eigen::VectorXd(n + 1), Eigen::VectorXd(n + 1),
                      options.eta < 0.0 ? std::sqrt(grid.dt()) : options.eta, {}};
    if (model.flat_boundary()) {
        integrate_flat(model, x0, driver, grid, options.scheme, out);
    } else {
        if (options.scheme == ReflectionScheme::BridgeMinimum) {
            throw UnsupportedError("bridge-minimum reflection needs a flat boundary");
        }
        integrate_curved(model, x0, driver, grid, out);
    }
    out.boundary_flags = contact_flags(out, out.eta);
    return out;
}

FlatReflectedFlow::FlatReflectedFlow(const ManifoldModel& model, const DriverPath& driver, const TimeGrid& grid,
                                     ReflectionScheme scheme)
    : dim_(model.dim) {
    if (!model.flat_boundary()) throw UnsupportedError("explicit reflected flow needs a flat boundary");
    grid.validate();
    if (driver.increments.rows() != static_cast<Eigen::Index>(grid.N) || driver.increments.cols() != model.dim) {
        throw ArgumentError("driver shape does not match grid and frame count");
    }
    const auto n = static_cast<Eigen::Index>(grid.N);
    cumulative_.resize(n + 1, dim_);
    const RealPath f = driver.component(0, grid);
    cumulative_.col(dim_ - 1) = f.values;
    for (int k = 0; k + 1 < dim_; ++k) cumulative_.col(k) = driver.component(k + 1, grid).values;
    running_min_.resize(n + 1);
    running_min_(0) = f.values(0);
    std::vector<double> minima;
    if (scheme == ReflectionScheme::BridgeMinimum) minima = bridge_minima(f, driver, grid);
    for (Eigen::Index i = 1; i <= n; ++i) {
        double seg = std::min(f.values(i - 1), f.values(i));
        if (!minima.empty()) seg = std::min(seg, minima[static_cast<std::size_t>(i - 1)]);
        running_min_(i) = std::min(running_min_(i - 1), f.values(i));
        if (!minima.empty()) running_min_(i) = std::min(running_min_(i), seg);
    }
}

double FlatReflectedFlow::local_time(const Point& x, std::size_t i) const {
    return std::max(0.0, -(x(dim_ - 1) + running_min_(static_cast<Eigen::Index>(i))));
}

bool FlatReflectedFlow::touched(const Point& x, std::size_t i) const {
    return x(dim_ - 1) + running_min_(static_cast<Eigen::Index>(i)) <= 0.0;
}

Point FlatReflectedFlow::point(const Point& x, std::size_t i) const {
    const auto k = static_cast<Eigen::Index>(i);
    Point y(dim_);
    for (int j = 0; j + 1 < dim_; ++j) y(j) = x(j) + cumulative_(k, j);
    const double m = running_min_(k);
    y(dim_ - 1) = (cumulative_(k, dim_ - 1) - m) + std::max(0.0, x(dim_ - 1) + m);
    return y;
}

std::vector<std::uint8_t> contact_flags(const ReflectedPath& path, double eta) {
    const auto n = path.R_values.size();
    std::vector<std::uint8_t> flags(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        const double R = path.R_values(i);
        const bool pushed = i > 0 && path.L(i) > path.L(i - 1);
        flags[static_cast<std::size_t>(i)] = (R < eta || R <= 0.0 || pushed) ? 1 : 0;
    }
    return flags;
}

ExcursionSet excursions(const ReflectedPath& path, double eps, double eta) {
    const std::vector<std::uint8_t> flags = contact_flags(path, eta);
    const std::size_t N = flags.size() - 1;
    ExcursionSet out;
    out.epsilon = eps;
    std::size_t j = 0;
    while (j <= N) {
        if (flags[j]) {
            ++j;
            continue;
        }
        const std::size_t first = j;
        while (j <= N && !flags[j]) ++j;
        // Unflagged run [first, j - 1]; it starts at the previous contact (or
        // at time 0) and ends at the next contact node j when there is one.
        const std::size_t l = first == 0 ? 0 : first - 1;
        const bool returns = j <= N;
        const std::size_t r = returns ? j : N;
        if (path.grid.time(r) - path.grid.time(l) >= eps) {
            out.intervals.emplace_back(l, r);
            if (returns) out.right_ends.push_back(r);
        }
    }
    return out;
}

std::optional<std::size_t> last_contact(const ReflectedPath& path, std::size_t i, double eta) {
    const std::vector<std::uint8_t> flags = contact_flags(path, eta);
    if (i >= flags.size()) throw ArgumentError("node index beyond the path");
    for (std::size_t j = i + 1; j-- > 0;) {
        if (flags[j]) return j;
    }
    return std::nullopt;
}

}  // namespace rbm
