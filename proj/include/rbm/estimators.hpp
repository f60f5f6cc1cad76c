#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rbm/geometry.hpp"
#include "rbm/penalized.hpp"
#include "rbm/reflected.hpp"

namespace rbm {

struct MCEstimate {
    Eigen::VectorXd mean;
    Eigen::VectorXd std_error;
    std::size_t n_paths = 0;
    std::uint64_t config_digest = 0;
    /// Bound on the floating-point error of the mean, for estimators whose
    /// samples are exact up to rounding; 0 otherwise.
    double numerical_error = 0.0;

    double value() const { return mean(0); }
    double error() const { return std_error(0); }
    /// Statistical and numerical error combined in quadrature.
    double combined_error() const { return std::hypot(std_error(0), numerical_error); }
};

struct ScalarField {
    std::string name;
    std::function<double(const Point&)> value;
    /// df in chart-frame components.
    std::function<Vector(const Point&)> gradient;
    bool neumann_compatible = false;  // df(nu) = 0 on the boundary
};

struct OneForm {
    std::string name;
    /// Covector in chart-frame components.
    std::function<Vector(const Point&)> covector;
    bool absolute_compatible = false;  // phi(nu) = 0 and d phi(nu, .) = 0 on the boundary
};

/// Built-in fields: "gauss" (exp(-|x|^2) in the chart; exp(-theta^2) on the
/// cap), "cos-neumann" (cosine profile with zero normal derivative) and "const".
ScalarField scalar_field(std::string_view name, const ManifoldModel& model);
std::vector<std::string> scalar_field_names();

/// The differential df, which is closed and so satisfies the absolute
/// conditions exactly when f is Neumann compatible.
OneForm exact_form(const ScalarField& f);
OneForm zero_form(const ManifoldModel& model);

/// Largest |df(nu)| over deterministic boundary samples.
double neumann_violation(const ManifoldModel& model, const ScalarField& f, int samples = 64);
/// Largest of |phi(nu)| and |d phi(nu, e)| over boundary samples, by central differences.
double absolute_violation(const ManifoldModel& model, const OneForm& phi, int samples = 64);

/// Boundary points used by the compatibility checks.
std::vector<Point> boundary_samples(const ManifoldModel& model, int samples);

struct MCOptions {
    TimeGrid grid{1.0, 1000};
    std::size_t n_paths = 1000;
    std::uint64_t seed = 1;
    /// Defaults to BridgeMinimum on flat boundaries and Projection otherwise.
    std::optional<ReflectionScheme> scheme;
    double eps = 0.0;  // excursion threshold of the damped transport
    double eta = 0.0;  // contact threshold of the damped transport
    unsigned threads = 0;  // 0 selects the hardware concurrency
};

/// FNV-1a of a canonical description string.
std::uint64_t digest_of(std::string_view text);

/// Mean and standard error of the rows of `samples`, summed in row order
/// with compensation so the result does not depend on how rows were produced.
MCEstimate summarize(const Eigen::MatrixXd& samples, std::uint64_t digest);

/// Reflected path number k of an estimator run.
ReflectedPath estimator_path(const ManifoldModel& model, const Point& x, const MCOptions& options, std::size_t k);

MCEstimate neumann_heat_mc(const ManifoldModel& model, const ScalarField& f, const Point& x,
                           const MCOptions& options);

MCEstimate one_form_mc(const ManifoldModel& model, const OneForm& phi, const TangentVector& v,
                       const MCOptions& options);

/// (1/T) E[f(Y_T) sum_i sum_k <W_i v, sigma_k(Y_i)> dB_i^k].
MCEstimate bismut_gradient_mc(const ManifoldModel& model, const ScalarField& f, const TangentVector& v,
                              const MCOptions& options);

/// Central difference (u(x + h v) - u(x - h v)) / 2h with both starts on one driver.
MCEstimate finite_difference_gradient_mc(const ManifoldModel& model, const ScalarField& f,
                                         const TangentVector& v, double h, const MCOptions& options);

/// Space-time field with chart-frame gradient.
struct TimeField {
    std::function<double(double, const Point&)> value;
    std::function<Vector(double, const Point&)> gradient;
};

/// Heat flow of exp(-|x|^2) on a flat-boundary model, F(t, .) = Q_{horizon - t} f.
/// Being even in the normal coordinate it solves the Neumann problem.
TimeField neumann_gaussian_solution(const ManifoldModel& model, double horizon);

/// E[dF(T, Y_T)(W_T v)] - dF(0, x)(v).
MCEstimate martingale_check(const ManifoldModel& model, const TimeField& F, const TangentVector& v,
                            const MCOptions& options);

struct Curve {
    std::function<Point(double)> point;
    std::function<Vector(double)> velocity;
};

Curve straight_curve(const Point& start, const Vector& direction);

/// Residual f(Y_t(g(u2))) - f(Y_t(g(u1))) - int_{u1}^{u2} df(W_t(g(u)) g'(u)) du
/// evaluated at the final grid node, flat-boundary models only. The identity
/// holds pathwise, so numerical_error carries a rounding bound of one unit
/// roundoff on each term.
MCEstimate weak_derivative_check(const ManifoldModel& model, const ScalarField& f, const Curve& gamma, double u1,
                                 double u2, const MCOptions& options);

enum class ImageKind { Neumann, Dirichlet };

/// int_0^inf f(y) (g_T(x - y) +- g_T(x + y)) dy with g_T the heat kernel.
double image_kernel_oracle(ImageKind kind, double T, double x, const std::function<double(double)>& f);

}  // namespace rbm
