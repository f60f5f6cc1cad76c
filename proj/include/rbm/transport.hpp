#pragma once

#include <Eigen/Dense>
#include <vector>

#include "rbm/geometry.hpp"
#include "rbm/penalized.hpp"

namespace rbm {

/// P[i] maps chart-frame components at Y_0 to chart-frame components at Y_{t_i}.
struct TransportFrame {
    std::vector<Eigen::MatrixXd> P;
};

struct TransportOptions {
    int reorthonormalize_every = 64;
};

/// Parallel transport along the nodal path given as rows of `points`.
TransportFrame parallel_transport(const ManifoldModel& model, const Eigen::MatrixXd& points,
                                  const TransportOptions& options = {});

/// sup_i |P^a_i v - P_i v| for each a on paths coupled through one driver.
std::vector<double> transport_convergence_check(const ManifoldModel& model, const std::vector<double>& a_list,
                                                const DriverPath& driver, const TimeGrid& grid,
                                                const TangentVector& v);

}  // namespace rbm
