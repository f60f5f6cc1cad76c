#include "rbm/geometry.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "rbm/errors.hpp"

namespace rbm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_dim(const ManifoldModel& model, const Point& x) {
    if (x.size() != model.dim) {
        throw ArgumentError("point has dimension " + std::to_string(x.size()) + ", model " +
                            model.name() + " expects " + std::to_string(model.dim));
    }
}

void require_domain(const ManifoldModel& model, const Point& x) {
    require_dim(model, x);
    if (!in_domain(model, x)) {
        std::ostringstream os;
        os << "point (" << x.transpose() << ") outside the chart domain of " << model.name();
        throw DomainError(os.str());
    }
}

void require_tubular(const ManifoldModel& model, const Point& x) {
    require_domain(model, x);
    if (!(boundary_distance(model, x) < model.tubular_radius)) {
        throw RangeError("point outside the tubular zone of " + model.name());
    }
}

double parse_double(std::string_view text, std::string_view what) {
    double value = 0.0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end) {
        throw ArgumentError("cannot parse " + std::string(what) + " from '" + std::string(text) + "'");
    }
    return value;
}

// Polar angle and radius helpers for the disk.
struct Polar {
    double r;
    Eigen::Vector2d er;  // outward radial unit vector
    Eigen::Vector2d et;  // counter-clockwise tangential unit vector
};

Polar polar(const Point& x) {
    const double r = std::hypot(x(0), x(1));
    Polar p{r, {1.0, 0.0}, {0.0, 1.0}};
    if (r > 0.0) {
        p.er = Eigen::Vector2d(x(0) / r, x(1) / r);
        p.et = Eigen::Vector2d(-p.er(1), p.er(0));
    }
    return p;
}

}  // namespace

ManifoldModel ManifoldModel::half_line() {
    return ManifoldModel{ModelKind::HalfLine, 1, kInf, 1, 0.0};
}

ManifoldModel ManifoldModel::half_space(int d) {
    if (d < 1) throw ArgumentError("half-space dimension must be >= 1");
    return ManifoldModel{ModelKind::HalfSpace, d, kInf, d, 0.0};
}

ManifoldModel ManifoldModel::flat_disk() {
    return ManifoldModel{ModelKind::FlatDisk, 2, 1.0 / 3.0, 4, 0.0};
}

ManifoldModel ManifoldModel::spherical_cap(double theta0) {
    if (!(theta0 > 0.0 && theta0 < std::numbers::pi / 2)) {
        throw ArgumentError("cap opening angle must lie in (0, pi/2)");
    }
    return ManifoldModel{ModelKind::SphericalCap, 2, theta0 / 3.0, 5, theta0};
}

ManifoldModel ManifoldModel::parse(std::string_view text) {
    if (text == "half-line") return half_line();
    if (text == "disk") return flat_disk();
    constexpr std::string_view hs = "half-space:d=";
    constexpr std::string_view cap = "cap:theta0=";
    if (text.starts_with(hs)) {
        const double d = parse_double(text.substr(hs.size()), "dimension");
        if (d != std::floor(d)) throw ArgumentError("half-space dimension must be an integer");
        return half_space(static_cast<int>(d));
    }
    if (text.starts_with(cap)) return spherical_cap(parse_double(text.substr(cap.size()), "theta0"));
    throw ArgumentError("unknown model '" + std::string(text) + "'");
}

std::string ManifoldModel::name() const {
    switch (id) {
        case ModelKind::HalfLine: return "half-line";
        case ModelKind::HalfSpace: return "half-space:d=" + std::to_string(dim);
        case ModelKind::FlatDisk: return "disk";
        case ModelKind::SphericalCap: {
            std::ostringstream os;
            os.precision(17);
            os << "cap:theta0=" << theta0;
            return os.str();
        }
    }
    return {};
}

double ManifoldModel::blend_radius() const { return std::min(tubular_radius, 1.0); }

bool in_domain(const ManifoldModel& model, const Point& x, double tol) {
    if (x.size() != model.dim || !x.allFinite()) return false;
    switch (model.id) {
        case ModelKind::HalfLine:
        case ModelKind::HalfSpace: return x(model.dim - 1) >= -tol;
        case ModelKind::FlatDisk: return x.norm() <= 1.0 + tol;
        case ModelKind::SphericalCap: return x(0) >= -tol && x(0) <= model.theta0 + tol;
    }
    return false;
}

double boundary_distance(const ManifoldModel& model, const Point& x) {
    require_domain(model, x);
    switch (model.id) {
        case ModelKind::HalfLine:
        case ModelKind::HalfSpace: return std::max(0.0, x(model.dim - 1));
        case ModelKind::FlatDisk: return std::max(0.0, 1.0 - x.norm());
        case ModelKind::SphericalCap: return std::max(0.0, model.theta0 - x(0));
    }
    return 0.0;
}

Vector normal_field(const ManifoldModel& model, const Point& x) {
    Vector n = Vector::Zero(model.dim);
    switch (model.id) {
        case ModelKind::HalfLine:
        case ModelKind::HalfSpace: n(model.dim - 1) = 1.0; break;
        case ModelKind::FlatDisk: n = -polar(x).er; break;
        case ModelKind::SphericalCap: n(0) = -1.0; break;
    }
    return n;
}

Eigen::MatrixXd shape_matrix(const ManifoldModel& model, const Point& x) {
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(model.dim, model.dim);
    switch (model.id) {
        case ModelKind::HalfLine:
        case ModelKind::HalfSpace: break;
        case ModelKind::FlatDisk: {
            const Polar p = polar(x);
            if (p.r > 0.0) S = p.et * p.et.transpose() / p.r;
            break;
        }
        case ModelKind::SphericalCap: {
            const double s = std::sin(x(0));
            if (s > 0.0) S(1, 1) = std::cos(x(0)) / s;
            break;
        }
    }
    return S;
}

Eigen::MatrixXd ricci_matrix(const ManifoldModel& model, const Point&) {
    if (model.id == ModelKind::SphericalCap) return Eigen::MatrixXd::Identity(2, 2);
    return Eigen::MatrixXd::Zero(model.dim, model.dim);
}

double shape_lower_bound(const ManifoldModel& model, const Point& x) {
    switch (model.id) {
        case ModelKind::HalfLine:
        case ModelKind::HalfSpace: return 0.0;
        case ModelKind::FlatDisk: {
            const double r = x.norm();
            return r > 0.0 ? 1.0 / r : 0.0;
        }
        case ModelKind::SphericalCap: {
            const double s = std::sin(x(0));
            return s > 0.0 ? std::cos(x(0)) / s : 0.0;
        }
    }
    return 0.0;
}

double ricci_lower_bound(const ManifoldModel& model, const Point&) {
    return model.id == ModelKind::SphericalCap ? 1.0 : 0.0;
}

double laplacian_distance(const ManifoldModel& model, const Point& x) {
    switch (model.id) {
        case ModelKind::HalfLine:
        case ModelKind::HalfSpace: return 0.0;
        case ModelKind::FlatDisk: return -1.0 / x.norm();
        case ModelKind::SphericalCap: return -std::cos(x(0)) / std::sin(x(0));
    }
    return 0.0;
}

double blend_weight(const ManifoldModel& model, double R) {
    if (model.flat_boundary()) return 1.0;
    const double d0 = model.tubular_radius;
    const double u = (R - d0) / d0;
    if (u <= 0.0) return 1.0;
    if (u >= 1.0) return 0.0;
    const double s = u * u * u * (10.0 - 15.0 * u + 6.0 * u * u);
    const double c = std::cos(0.5 * std::numbers::pi * s);
    return c * c;
}

TangentVector inward_normal(const ManifoldModel& model, const Point& x) {
    require_tubular(model, x);
    return {x, normal_field(model, x)};
}

TangentVector shape_operator(const ManifoldModel& model, const Point& x, const TangentVector& w) {
    require_tubular(model, x);
    if (w.components.size() != model.dim) throw ArgumentError("tangent vector dimension mismatch");
    return {x, shape_matrix(model, x) * w.components};
}

TangentVector ricci(const ManifoldModel& model, const Point& x, const TangentVector& w) {
    require_domain(model, x);
    if (w.components.size() != model.dim) throw ArgumentError("tangent vector dimension mismatch");
    return {x, ricci_matrix(model, x) * w.components};
}

Frame frame(const ManifoldModel& model, const Point& x) {
    require_domain(model, x);
    const int d = model.dim;
    Frame F{Eigen::MatrixXd::Zero(d, model.frame_count), Vector::Zero(d)};
    switch (model.id) {
        case ModelKind::HalfLine:
        case ModelKind::HalfSpace: {
            // sigma_1 = grad R = e_d, then the tangential coordinate directions.
            F.sigma(d - 1, 0) = 1.0;
            for (int k = 1; k < d; ++k) F.sigma(k - 1, k) = 1.0;
            break;
        }
        case ModelKind::FlatDisk: {
            const Polar p = polar(x);
            const double beta = blend_weight(model, 1.0 - p.r);
            const double sb = std::sqrt(beta);
            const double sc = std::sqrt(1.0 - beta);
            F.sigma.col(0) = -sb * p.er;
            F.sigma.col(1) = sb * p.et;
            F.sigma(0, 2) = sc;
            F.sigma(1, 3) = sc;
            if (beta > 0.0) F.drift = beta / (2.0 * p.r) * p.er;
            break;
        }
        case ModelKind::SphericalCap: {
            const double beta = blend_weight(model, model.theta0 - x(0));
            const double sb = std::sqrt(beta);
            const double sc = std::sqrt(1.0 - beta);
            F.sigma(0, 0) = -sb;
            F.sigma(1, 1) = sb;
            // Gradient system of the embedding: projections of the ambient axes.
            const auto E = cap_tangent_basis(x);
            F.sigma.block(0, 2, 2, 3) = sc * E.transpose();
            if (beta > 0.0) F.drift(0) = 0.5 * beta * std::cos(x(0)) / std::sin(x(0));
            break;
        }
    }
    return F;
}

Point boundary_projection(const ManifoldModel& model, const Point& x) {
    Point p = x;
    switch (model.id) {
        case ModelKind::HalfLine:
        case ModelKind::HalfSpace: p(model.dim - 1) = 0.0; break;
        case ModelKind::FlatDisk: {
            const Polar q = polar(x);
            p = q.er;
            break;
        }
        case ModelKind::SphericalCap: p(0) = model.theta0; break;
    }
    return p;
}

double chart_distance(const ManifoldModel& model, const Point& x, const Point& y) {
    if (model.id == ModelKind::SphericalCap) return (cap_embed(x) - cap_embed(y)).norm();
    return (x - y).norm();
}

Eigen::Vector3d cap_embed(const Point& x) {
    const double st = std::sin(x(0));
    return {st * std::cos(x(1)), st * std::sin(x(1)), std::cos(x(0))};
}

Point cap_chart(const Eigen::Vector3d& p) {
    Point x(2);
    x(0) = std::atan2(std::hypot(p(0), p(1)), p(2));
    x(1) = std::atan2(p(1), p(0));
    return x;
}

Eigen::Matrix<double, 3, 2> cap_tangent_basis(const Point& x) {
    const double ct = std::cos(x(0)), st = std::sin(x(0));
    const double cp = std::cos(x(1)), sp = std::sin(x(1));
    Eigen::Matrix<double, 3, 2> E;
    E.col(0) << ct * cp, ct * sp, -st;
    E.col(1) << -sp, cp, 0.0;
    return E;
}

}  // namespace rbm
