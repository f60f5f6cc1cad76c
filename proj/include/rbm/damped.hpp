#pragma once

#include <Eigen/Dense>
#include <vector>

#include "rbm/geometry.hpp"
#include "rbm/penalized.hpp"
#include "rbm/reflected.hpp"
#include "rbm/transport.hpp"

namespace rbm {

enum class DampedVariant { Penalized, EpsJump, Limit };

/// Damped transport pulled back to T_{Y_0}M: w_i = P_i^T W_i, split as
/// w = wT + n f with n_i = P_i^T nu(Y_i) and f = n^T w.
struct DampedState {
    DampedVariant variant = DampedVariant::Limit;
    double parameter = 0.0;  // a for Penalized, epsilon otherwise
    double eta = 0.0;        // contact threshold of the jump variants
    std::vector<Eigen::MatrixXd> wT;
    std::vector<Eigen::RowVectorXd> f;
    std::vector<Eigen::VectorXd> n;

    std::size_t size() const { return f.size(); }
    Eigen::MatrixXd w(std::size_t i) const { return wT[i] + n[i] * f[i]; }
    /// W_i in chart-frame components at Y_i.
    Eigen::MatrixXd chart(const TransportFrame& frame, std::size_t i) const { return frame.P[i] * w(i); }
};

DampedState damped_penalized(const ManifoldModel& model, double a, const PenalizedPath& path,
                             const TransportFrame& frame);

DampedState damped_eps(const ManifoldModel& model, const ReflectedPath& path, const TransportFrame& frame,
                       double eps, double eta);

struct CauchyReport {
    std::vector<double> epsilons;
    std::vector<double> gaps;            // sup_i |W^{eps_n} - W^{eps_{n+1}}|, one per consecutive pair
    std::vector<double> uncovered_time;  // time outside excursions of length >= eps_n, per level
    bool monotone = true;                // false when a gap exceeds twice its predecessor
};

struct DampedLimit {
    DampedState state;
    CauchyReport report;
};

DampedLimit damped_limit(const ManifoldModel& model, const ReflectedPath& path, const TransportFrame& frame,
                         double eps0, int levels, double eta);

/// sup over nodes of |f(t) - (r_t - r_{alpha_t})| for a jump-variant state.
double normal_part_formula_check(const ManifoldModel& model, const ReflectedPath& path,
                                 const TransportFrame& frame, const DampedState& state);

/// W^eps_i v in chart components at Y_i for every node. On flat boundaries
/// with eps = eta = 0 the transport reduces to erasing the normal part of v
/// at the first excursion right end, which is applied without the matrix recursion.
std::vector<Vector> damped_images(const ManifoldModel& model, const ReflectedPath& path, const Vector& v, double eps,
                                  double eta);

/// Right-hand side of the norm bound: exp(-int Ric_min dt - 2 int S_min dL^a) per node.
Eigen::VectorXd damped_norm_bound(const ManifoldModel& model, const PenalizedPath& path);

/// Operator 2-norm of w_i per node.
Eigen::VectorXd damped_norms(const DampedState& state);

}  // namespace rbm
