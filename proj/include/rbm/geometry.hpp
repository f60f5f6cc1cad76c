#pragma once

#include <Eigen/Dense>
#include <string>
#include <string_view>

namespace rbm {

using Point = Eigen::VectorXd;
using Vector = Eigen::VectorXd;

enum class ModelKind { HalfLine, HalfSpace, FlatDisk, SphericalCap };

/// Built-in geometry: chart, boundary distance R, normal, curvature and frame fields.
///
/// Chart coordinates per model:
///   HalfLine      x >= 0
///   HalfSpace(d)  (x_1, ..., x_d) with x_d >= 0
///   FlatDisk      Cartesian (x, y) with |x| <= 1
///   SphericalCap  polar (theta, phi) on the unit sphere with theta <= theta0
///
/// Tangent vectors are expressed in the chart's orthonormal frame: Cartesian
/// for the flat models and (e_theta, e_phi) for the cap.
struct ManifoldModel {
    ModelKind id = ModelKind::HalfLine;
    int dim = 1;
    double tubular_radius = 1.0;  // delta_0; +inf for half-spaces
    int frame_count = 1;          // m
    double theta0 = 0.0;          // cap opening angle

    static ManifoldModel half_line();
    static ManifoldModel half_space(int d);
    static ManifoldModel flat_disk();
    static ManifoldModel spherical_cap(double theta0);

    /// Parses "half-line", "half-space:d=3", "disk", "cap:theta0=1.0472".
    static ManifoldModel parse(std::string_view text);
    std::string name() const;

    /// True for HalfLine and HalfSpace, whose boundary is a hyperplane.
    bool flat_boundary() const { return id == ModelKind::HalfLine || id == ModelKind::HalfSpace; }
    /// Width of the cutoff zone between the boundary frame and the interior frame.
    double blend_radius() const;
};

struct TangentVector {
    Point base;
    Vector components;
};

/// Frame fields sigma_1..sigma_m as columns (d x m) and the drift sigma_0.
struct Frame {
    Eigen::MatrixXd sigma;
    Vector drift;
};

bool in_domain(const ManifoldModel& model, const Point& x, double tol = 1e-12);

double boundary_distance(const ManifoldModel& model, const Point& x);
TangentVector inward_normal(const ManifoldModel& model, const Point& x);
TangentVector shape_operator(const ManifoldModel& model, const Point& x, const TangentVector& w);
TangentVector ricci(const ManifoldModel& model, const Point& x, const TangentVector& w);
Frame frame(const ManifoldModel& model, const Point& x);

// Unchecked building blocks shared by the integrators. They are defined
// wherever grad R exists, which for the curved models is everything except
// the disk centre or the cap pole (where an arbitrary unit vector is returned).

/// grad R in chart frame components.
Vector normal_field(const ManifoldModel& model, const Point& x);
/// Matrix of the level-set shape operator in the chart frame.
Eigen::MatrixXd shape_matrix(const ManifoldModel& model, const Point& x);
/// Matrix of Ric^# in the chart frame.
Eigen::MatrixXd ricci_matrix(const ManifoldModel& model, const Point& x);
/// Infimum of <S v, v> over unit v tangent to the level set of R.
double shape_lower_bound(const ManifoldModel& model, const Point& x);
/// Infimum of Ric(v, v) over unit v.
double ricci_lower_bound(const ManifoldModel& model, const Point& x);
/// Laplacian of R.
double laplacian_distance(const ManifoldModel& model, const Point& x);
/// Cutoff weight beta(R): 1 on [0, delta_0], 0 beyond 2 delta_0.
double blend_weight(const ManifoldModel& model, double R);
/// Nearest boundary point pi(x).
Point boundary_projection(const ManifoldModel& model, const Point& x);
/// Chart distance used for path comparisons (chord distance on the cap).
double chart_distance(const ManifoldModel& model, const Point& x, const Point& y);

// Unit-sphere embedding of the cap chart.
Eigen::Vector3d cap_embed(const Point& x);
Point cap_chart(const Eigen::Vector3d& p);
/// Columns e_theta, e_phi in R^3 at x.
Eigen::Matrix<double, 3, 2> cap_tangent_basis(const Point& x);

}  // namespace rbm
