#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "rbm/geometry.hpp"
#include "rbm/skorohod1d.hpp"

namespace rbm {

struct TimeGrid {
    double T = 1.0;
    std::size_t N = 1;

    double dt() const { return T / static_cast<double>(N); }
    double time(std::size_t i) const { return T * static_cast<double>(i) / static_cast<double>(N); }
    Eigen::VectorXd nodes() const;
    void validate() const;
};

/// Brownian increments on a grid, N x m, reproducible from the seed.
struct DriverPath {
    std::uint64_t seed = 0;
    Eigen::MatrixXd increments;

    static DriverPath generate(std::uint64_t seed, const TimeGrid& grid, int m);
    static DriverPath zero(const TimeGrid& grid, int m);
    /// Cumulative sum of component k as a path starting at 0.
    RealPath component(int k, const TimeGrid& grid) const;
};

struct PenalizedPath {
    double a = 0.0;
    TimeGrid grid;
    Eigen::MatrixXd points;        // (N+1) x d chart coordinates
    Eigen::VectorXd R_values;      // N+1
    Eigen::VectorXd L_a;           // N+1, approximate local time
    Eigen::VectorXd c_a;           // N+1, node values of c_a
    Eigen::VectorXd c_a_integral;  // N, integral of c_a over each step (sub-step resolved)
};

struct PenalizedOptions {
    int max_bisections = 20;
};

/// Magnitude 2 / (a sinh(2R/a)) of the penalizing drift.
double penalty_magnitude(double a, double R);
/// c_a = (4/a^2) cosh(2R/a) / sinh^2(2R/a).
double penalty_rate(double a, double R);

TangentVector drift_field(const ManifoldModel& model, double a, const Point& x);

PenalizedPath integrate_penalized(const ManifoldModel& model, double a, const Point& x0,
                                  const DriverPath& driver, const TimeGrid& grid,
                                  const PenalizedOptions& options = {});

Eigen::VectorXd c_a_series(const ManifoldModel& model, double a, const PenalizedPath& path);

}  // namespace rbm
