#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "rbm/skorohod1d.hpp"

namespace rbm::test {

/// Random piecewise-linear driver with an irregular grid. Mixes Gaussian
/// steps, flat stretches and occasional large jumps to reach corner cases.
inline RealPath random_driver(std::mt19937_64& gen) {
    std::uniform_int_distribution<int> nodes(2, 200);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> z(0.0, 1.0);
    const int n = nodes(gen);
    RealPath f{Eigen::VectorXd(n), Eigen::VectorXd(n)};
    f.grid(0) = 0.0;
    f.values(0) = 0.0;
    for (int i = 1; i < n; ++i) {
        const double dt = 1e-3 + 0.05 * u(gen);
        f.grid(i) = f.grid(i - 1) + dt;
        const double r = u(gen);
        double step = std::sqrt(dt) * z(gen);
        if (r < 0.1) step = 0.0;
        else if (r < 0.15) step *= 10.0;
        f.values(i) = f.values(i - 1) + step;
    }
    return f;
}

/// Brownian path on a uniform grid of n steps over [0, T].
inline RealPath brownian(std::mt19937_64& gen, int n, double T) {
    std::normal_distribution<double> z(0.0, 1.0);
    const double dt = T / n;
    RealPath f{Eigen::VectorXd::LinSpaced(n + 1, 0.0, T), Eigen::VectorXd(n + 1)};
    f.values(0) = 0.0;
    for (int i = 1; i <= n; ++i) f.values(i) = f.values(i - 1) + std::sqrt(dt) * z(gen);
    return f;
}

/// Minimum of a Brownian bridge from 0 to d over a step of length h.
inline double bridge_min(std::mt19937_64& gen, double d, double h) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double U = 1.0 - u(gen);
    return 0.5 * (d - std::sqrt(d * d - 2.0 * h * std::log(U)));
}

/// Two-sample Kolmogorov-Smirnov statistic.
inline double ks_statistic(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= v) ++i;
        while (j < b.size() && b[j] <= v) ++j;
        d = std::max(d, std::abs(double(i) / a.size() - double(j) / b.size()));
    }
    return d;
}

inline double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

}  // namespace rbm::test
