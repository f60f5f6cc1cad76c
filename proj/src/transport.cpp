#include "rbm/transport.hpp"

#include <cmath>

#include "rbm/errors.hpp"
#include "rbm/reflected.hpp"

namespace rbm {

namespace {

// Rotation of R^3 carrying the unit vector p to the unit vector q about p x q;
// restricted to T_p S^2 it is parallel transport along the connecting geodesic.
Eigen::Vector3d rotate(const Eigen::Vector3d& p, const Eigen::Vector3d& q, const Eigen::Vector3d& v) {
    Eigen::Vector3d axis = p.cross(q);
    const double s = axis.norm();
    const double c = p.dot(q);
    if (s < 1e-300) return v;
    axis /= s;
    return v * c + axis.cross(v) * s + axis * axis.dot(v) * (1.0 - c);
}

}  // namespace

TransportFrame parallel_transport(const ManifoldModel& model, const Eigen::MatrixXd& points,
                                  const TransportOptions& options) {
    const auto n = static_cast<std::size_t>(points.rows());
    const int d = model.dim;
    if (points.cols() != d) throw ArgumentError("path dimension does not match the model");
    TransportFrame out;
    out.P.reserve(n);
    if (model.id != ModelKind::SphericalCap) {
        out.P.assign(n, Eigen::MatrixXd::Identity(d, d));
        return out;
    }
    // Transported images of the chart frame at Y_0, carried in R^3.
    const Point x0 = points.row(0).transpose();
    Eigen::Matrix<double, 3, 2> U = cap_tangent_basis(x0);
    Eigen::Vector3d p = cap_embed(x0);
    out.P.emplace_back(Eigen::MatrixXd::Identity(2, 2));
    const int every = std::max(1, options.reorthonormalize_every);
    for (std::size_t i = 1; i < n; ++i) {
        const Point x = points.row(static_cast<Eigen::Index>(i)).transpose();
        const Eigen::Vector3d q = cap_embed(x);
        U.col(0) = rotate(p, q, U.col(0));
        U.col(1) = rotate(p, q, U.col(1));
        if (i % static_cast<std::size_t>(every) == 0) {
            Eigen::Vector3d u0 = U.col(0) - q * q.dot(U.col(0));
            u0.normalize();
            Eigen::Vector3d u1 = U.col(1) - q * q.dot(U.col(1)) - u0 * u0.dot(U.col(1));
            u1.normalize();
            U.col(0) = u0;
            U.col(1) = u1;
        }
        out.P.emplace_back(cap_tangent_basis(x).transpose() * U);
        p = q;
    }
    return out;
}

std::vector<double> transport_convergence_check(const ManifoldModel& model, const std::vector<double>& a_list,
                                                const DriverPath& driver, const TimeGrid& grid,
                                                const TangentVector& v) {
    const ReflectedPath ref = integrate_reflected(model, v.base, driver, grid);
    const TransportFrame P = parallel_transport(model, ref.points);
    std::vector<double> gaps;
    gaps.reserve(a_list.size());
    for (double a : a_list) {
        const PenalizedPath pen = integrate_penalized(model, a, v.base, driver, grid);
        const TransportFrame Pa = parallel_transport(model, pen.points);
        double gap = 0.0;
        for (std::size_t i = 0; i < P.P.size(); ++i) gap = std::max(gap, (Pa.P[i] * v.components - P.P[i] * v.components).norm());
        gaps.push_back(gap);
    }
    return gaps;
}

}  // namespace rbm
