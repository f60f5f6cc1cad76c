#pragma once

// Euler increments shared by the penalized and reflected integrators.
//
// Near the boundary a step is taken in tubular coordinates (R, s), where s
// are coordinates along the level sets of R; the Ito drift of a coordinate
// is half its Laplacian, and the noise is the frame applied to the driver
// increment. Far from the boundary of a curved model the step uses the
// interior chart (Cartesian for the disk, the R^3 embedding for the cap).

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "rbm/geometry.hpp"

namespace rbm::detail {

struct Tubular {
    double R;
    Eigen::VectorXd s;
};

/// True when x is stepped in tubular coordinates.
bool use_tubular(const ManifoldModel& model, double R);

Tubular to_tubular(const ManifoldModel& model, const Point& x);
Point from_tubular(const ManifoldModel& model, const Tubular& c);

struct TubularIncrement {
    double noise_R;      // frame-projected increment of R
    double drift_R;      // (1/2) Laplacian(R), per unit time
    Eigen::VectorXd ds;  // increment of s (noise only; s is harmonic)
};

TubularIncrement tubular_increment(const ManifoldModel& model, const Point& x, const Tubular& c,
                                   const Eigen::VectorXd& dB);

/// Euler step in the interior chart of a curved model.
Point interior_step(const ManifoldModel& model, const Point& x, const Eigen::VectorXd& dB);

/// Boundary distance without domain checks; negative outside the domain.
double signed_distance(const ManifoldModel& model, const Point& x);

/// Positive root of y - h * drift(y) = c for a drift bounded by 1/y and
/// decreasing to +inf at 0 (drift-implicit Euler fallback of the guard).
template <typename Drift>
double implicit_positive_step(Drift&& drift, double c, double h) {
    double lo = 0.0, hi = std::max(c, 0.0) + std::sqrt(h);
    for (int it = 0; it < 400; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (mid - h * drift(mid) - c < 0.0) lo = mid; else hi = mid;
    }
    return hi;
}

}  // namespace rbm::detail
