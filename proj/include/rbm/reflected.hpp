#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "rbm/geometry.hpp"
#include "rbm/penalized.hpp"

namespace rbm {

enum class ReflectionScheme {
    /// Skorohod map of the piecewise-linear driver (flat boundary) or
    /// Euler step plus normal projection (curved boundary).
    Projection,
    /// Flat boundary only: the running minimum of the normal driver also
    /// includes an exact sample of the Brownian-bridge minimum inside each
    /// step, so (Y, L) at the nodes has the law of reflected Brownian motion.
    BridgeMinimum,
};

struct ReflectedOptions {
    ReflectionScheme scheme = ReflectionScheme::Projection;
    double eta = -1.0;  // contact threshold; negative selects sqrt(dt)
};

struct ReflectedPath {
    TimeGrid grid;
    Eigen::MatrixXd points;  // (N+1) x d
    Eigen::VectorXd R_values;
    Eigen::VectorXd L;
    double eta = 0.0;
    std::vector<std::uint8_t> boundary_flags;
};

struct ExcursionSet {
    std::vector<std::pair<std::size_t, std::size_t>> intervals;
    double epsilon = 0.0;
    std::vector<std::size_t> right_ends;
};

ReflectedPath integrate_reflected(const ManifoldModel& model, const Point& x0, const DriverPath& driver,
                                  const TimeGrid& grid, const ReflectedOptions& options = {});

/// Reflected flow of a flat-boundary model under one driver, evaluated for
/// any start in O(1) per node through the explicit Skorohod map. Agrees
/// bit-for-bit with integrate_reflected started at the same point.
class FlatReflectedFlow {
public:
    FlatReflectedFlow(const ManifoldModel& model, const DriverPath& driver, const TimeGrid& grid,
                      ReflectionScheme scheme);

    Point point(const Point& x, std::size_t i) const;
    double local_time(const Point& x, std::size_t i) const;
    /// True once the path from x has reached the boundary by node i.
    bool touched(const Point& x, std::size_t i) const;

private:
    int dim_;
    Eigen::MatrixXd cumulative_;     // (N+1) x d partial sums of the driver
    Eigen::VectorXd running_min_;    // continuous running minimum of the normal driver
};

/// Node i is a contact when R_i < eta or the local time grew over the step ending at i.
std::vector<std::uint8_t> contact_flags(const ReflectedPath& path, double eta);

ExcursionSet excursions(const ReflectedPath& path, double eps, double eta);

/// Latest contact node at or before node i; nullopt before the first contact.
std::optional<std::size_t> last_contact(const ReflectedPath& path, std::size_t i, double eta);

}  // namespace rbm
