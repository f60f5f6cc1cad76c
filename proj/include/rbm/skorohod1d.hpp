#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <span>

/// Half-line reflection: the Skorohod map, hitting and coalescence times,
/// exact and penalized derivative flows.
namespace rbm {

/// Real-valued path sampled on a strictly increasing grid, linear between nodes.
struct RealPath {
    Eigen::VectorXd grid;
    Eigen::VectorXd values;

    Eigen::Index size() const { return grid.size(); }
    /// Throws ArgumentError on length mismatch or a non-increasing grid.
    void validate() const;
};

struct SkorohodSolution {
    double start = 0.0;
    RealPath driver;
    RealPath reflected;   // g
    RealPath local_time;  // h
};

inline constexpr double kNever = std::numeric_limits<double>::infinity();

SkorohodSolution skorohod_map(double x, const RealPath& f);

/// Reflected path from per-step minima of the driver between nodes, as
/// produced by exact Brownian-bridge sampling. step_min[i] is the minimum of
/// f over [t_i, t_{i+1}].
SkorohodSolution skorohod_map(double x, const RealPath& f, std::span<const double> step_min);

/// First time g reaches 0, interpolated linearly inside the step; kNever if g > 0 throughout.
double first_hit_zero(const SkorohodSolution& solution);

/// Local time h evaluated at an arbitrary t for the piecewise-linear driver.
double local_time_at(const SkorohodSolution& solution, double t);

RealPath derivative_flow_exact(double x, const RealPath& f);

/// First time the reflected paths from x < y under the same driver coincide.
double coalescence_time(double x, double y, const RealPath& f);

RealPath tanaka_reflection(double x, const RealPath& f);

/// phi(y) = integral of exp(-s^2/2) over [0, y].
double gauss_integral(double y);

/// d/dx ln u^a(x) = a^{-1/2} exp(-x^2/2a) / phi(x / sqrt a).
double penalized_drift_1d(double a, double x);

/// d^2/dx^2 ln u^a(x); strictly negative.
double penalized_drift_1d_slope(double a, double x);

struct PenalizedScheme1d {
    std::uint64_t bridge_seed = 0;  // keys the Brownian-bridge refinements
    int max_bisections = 20;
};

/// Euler-Maruyama for dX = df + d/dx ln u^a(X) dt with the positivity guard.
RealPath penalized_path_1d(double a, double x, const RealPath& driver,
                           const PenalizedScheme1d& scheme = {});

/// V^a_t = exp(int_0^t d^2/dx^2 ln u^a(X^a_s) ds) by the left-endpoint rule.
RealPath derivative_flow_penalized(double a, const RealPath& path);

}  // namespace rbm
