#include "stepping.hpp"

#include <cmath>

namespace rbm::detail {

bool use_tubular(const ManifoldModel& model, double R) {
    return model.flat_boundary() || R < 2.0 * model.tubular_radius;
}

double signed_distance(const ManifoldModel& model, const Point& x) {
    switch (model.id) {
        case ModelKind::HalfLine:
        case ModelKind::HalfSpace: return x(model.dim - 1);
        case ModelKind::FlatDisk: return 1.0 - x.norm();
        case ModelKind::SphericalCap: return model.theta0 - x(0);
    }
    return 0.0;
}

Tubular to_tubular(const ManifoldModel& model, const Point& x) {
    switch (model.id) {
        case ModelKind::HalfLine:
        case ModelKind::HalfSpace: return {x(model.dim - 1), x.head(model.dim - 1)};
        case ModelKind::FlatDisk: {
            Eigen::VectorXd s(1);
            s(0) = std::atan2(x(1), x(0));
            return {1.0 - x.norm(), s};
        }
        case ModelKind::SphericalCap: {
            Eigen::VectorXd s(1);
            s(0) = x(1);
            return {model.theta0 - x(0), s};
        }
    }
    return {};
}

Point from_tubular(const ManifoldModel& model, const Tubular& c) {
    Point x(model.dim);
    switch (model.id) {
        case ModelKind::HalfLine:
        case ModelKind::HalfSpace:
            x.head(model.dim - 1) = c.s;
            x(model.dim - 1) = c.R;
            break;
        case ModelKind::FlatDisk: {
            const double r = 1.0 - c.R;
            x << r * std::cos(c.s(0)), r * std::sin(c.s(0));
            break;
        }
        case ModelKind::SphericalCap: x << model.theta0 - c.R, c.s(0); break;
    }
    return x;
}

TubularIncrement tubular_increment(const ManifoldModel& model, const Point& x, const Tubular& c,
                                   const Eigen::VectorXd& dB) {
    TubularIncrement inc{0.0, 0.0, Eigen::VectorXd(model.dim - 1)};
    switch (model.id) {
        case ModelKind::HalfLine:
        case ModelKind::HalfSpace:
            inc.noise_R = dB(0);
            inc.ds = dB.tail(model.dim - 1);
            break;
        case ModelKind::FlatDisk: {
            const double r = 1.0 - c.R;
            const double beta = blend_weight(model, c.R);
            const double sb = std::sqrt(beta), sc = std::sqrt(1.0 - beta);
            const Eigen::Vector2d er(std::cos(c.s(0)), std::sin(c.s(0)));
            const Eigen::Vector2d et(-er(1), er(0));
            const Eigen::Vector2d dW(dB(2), dB(3));
            inc.noise_R = sb * dB(0) - sc * er.dot(dW);
            inc.ds(0) = (sb * dB(1) + sc * et.dot(dW)) / r;
            inc.drift_R = -0.5 / r;
            break;
        }
        case ModelKind::SphericalCap: {
            const double beta = blend_weight(model, c.R);
            const double sb = std::sqrt(beta), sc = std::sqrt(1.0 - beta);
            const auto E = cap_tangent_basis(x);
            const Eigen::Vector3d dW(dB(2), dB(3), dB(4));
            const double theta = x(0);
            inc.noise_R = sb * dB(0) - sc * E.col(0).dot(dW);
            inc.ds(0) = (sb * dB(1) + sc * E.col(1).dot(dW)) / std::sin(theta);
            inc.drift_R = -0.5 * std::cos(theta) / std::sin(theta);
            break;
        }
    }
    return inc;
}

Point interior_step(const ManifoldModel& model, const Point& x, const Eigen::VectorXd& dB) {
    if (model.id == ModelKind::FlatDisk) {
        // Ito drift vanishes in Cartesian coordinates of the flat disk.
        return x + frame(model, x).sigma * dB;
    }
    // Cap: projected Euler step of the gradient system on the unit sphere.
    const Eigen::Vector3d p = cap_embed(x);
    const Eigen::Vector3d dW(dB(2), dB(3), dB(4));
    const Eigen::Vector3d q = p + dW - p * p.dot(dW);
    Point y = cap_chart(q.normalized());
    // Keep phi continuous with the previous value.
    const double two_pi = 2.0 * 3.14159265358979323846;
    y(1) = x(1) + std::remainder(y(1) - x(1), two_pi);
    return y;
}

}  // namespace rbm::detail
