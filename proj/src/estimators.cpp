#include "rbm/estimators.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "rbm/damped.hpp"
#include "rbm/errors.hpp"
#include "rbm/rng.hpp"
#include "rbm/transport.hpp"
#include "parallel.hpp"

namespace rbm {

namespace {

constexpr double kPi = std::numbers::pi;

template <class F>
double legendre8(F f, double a, double b) {
    return boost::math::quadrature::gauss<double, 8>::integrate(f, a, b);
}

ReflectionScheme scheme_for(const ManifoldModel& model, const MCOptions& options) {
    return options.scheme.value_or(model.flat_boundary() ? ReflectionScheme::BridgeMinimum
                                                         : ReflectionScheme::Projection);
}

void check_options(const MCOptions& options) {
    options.grid.validate();
    if (options.n_paths < 2) throw ArgumentError("an estimate needs at least two paths");
    if (options.eps < 0.0 || options.eta < 0.0) throw ArgumentError("eps and eta must be nonnegative");
}

struct Sample {
    DriverPath driver;
    ReflectedPath path;
};

Sample simulate(const ManifoldModel& model, const Point& x, const MCOptions& options, std::size_t k) {
    DriverPath driver = DriverPath::generate(rng::path_seed(options.seed, k), options.grid, model.frame_count);
    ReflectedOptions ro{scheme_for(model, options), options.eta};
    ReflectedPath path = integrate_reflected(model, x, driver, options.grid, ro);
    return {std::move(driver), std::move(path)};
}

std::string canonical(const std::string& kind, const ManifoldModel& model, const MCOptions& options,
                      const std::string& extra) {
    std::ostringstream os;
    os.precision(17);
    os << "kind=" << kind << ";model=" << model.name() << ";T=" << options.grid.T << ";N=" << options.grid.N
       << ";n=" << options.n_paths << ";seed=" << options.seed
       << ";scheme=" << (scheme_for(model, options) == ReflectionScheme::BridgeMinimum ? "bridge" : "projection")
       << ";eps=" << options.eps << ";eta=" << options.eta << ";" << extra;
    return os.str();
}

std::string describe(const Vector& x) {
    std::ostringstream os;
    os.precision(17);
    for (Eigen::Index i = 0; i < x.size(); ++i) os << (i ? "," : "") << x(i);
    return os.str();
}

void require_start(const ManifoldModel& model, const TangentVector& v) {
    if (v.components.size() != model.dim || v.base.size() != model.dim) {
        throw ArgumentError("tangent vector dimension does not match the model");
    }
}

}  // namespace

ScalarField scalar_field(std::string_view name, const ManifoldModel& model) {
    const int d = model.dim;
    const bool cap = model.id == ModelKind::SphericalCap;
    if (name == "const") {
        return {"const", [](const Point&) { return 1.0; }, [d](const Point&) { return Vector(Vector::Zero(d)); },
                true};
    }
    if (name == "gauss") {
        if (cap) {
            return {"gauss", [](const Point& x) { return std::exp(-x(0) * x(0)); },
                    [](const Point& x) {
                        Vector g(2);
                        g << -2.0 * x(0) * std::exp(-x(0) * x(0)), 0.0;
                        return g;
                    },
                    false};
        }
        return {"gauss", [](const Point& x) { return std::exp(-x.squaredNorm()); },
                [](const Point& x) { return Vector(-2.0 * std::exp(-x.squaredNorm()) * x); },
                model.flat_boundary()};
    }
    if (name == "cos-neumann") {
        switch (model.id) {
            case ModelKind::HalfLine:
            case ModelKind::HalfSpace:
                return {"cos-neumann", [d](const Point& x) { return std::cos(kPi * x(d - 1)); },
                        [d](const Point& x) {
                            Vector g = Vector::Zero(d);
                            g(d - 1) = -kPi * std::sin(kPi * x(d - 1));
                            return g;
                        },
                        true};
            case ModelKind::FlatDisk:
                return {"cos-neumann", [](const Point& x) { return std::cos(kPi * x.squaredNorm()); },
                        [](const Point& x) { return Vector(-2.0 * kPi * std::sin(kPi * x.squaredNorm()) * x); },
                        true};
            case ModelKind::SphericalCap: {
                const double k = kPi / model.theta0;
                return {"cos-neumann", [k](const Point& x) { return std::cos(k * x(0)); },
                        [k](const Point& x) {
                            Vector g(2);
                            g << -k * std::sin(k * x(0)), 0.0;
                            return g;
                        },
                        true};
            }
        }
    }
    throw ArgumentError("unknown scalar field: " + std::string(name));
}

std::vector<std::string> scalar_field_names() { return {"const", "cos-neumann", "gauss"}; }

OneForm exact_form(const ScalarField& f) { return {"d" + f.name, f.gradient, f.neumann_compatible}; }

OneForm zero_form(const ManifoldModel& model) {
    const int d = model.dim;
    return {"zero", [d](const Point&) { return Vector(Vector::Zero(d)); }, true};
}

std::vector<Point> boundary_samples(const ManifoldModel& model, int samples) {
    if (samples < 1) throw ArgumentError("need at least one boundary sample");
    std::vector<Point> out;
    const int d = model.dim;
    switch (model.id) {
        case ModelKind::HalfLine: out.push_back(Point::Zero(1)); break;
        case ModelKind::HalfSpace:
            for (int j = 0; j < samples; ++j) {
                Point x = Point::Zero(d);
                for (int k = 0; k + 1 < d; ++k) {
                    const double frac = std::fmod((j + 1) * 0.6180339887498949 * (k + 1), 1.0);
                    x(k) = -2.0 + 4.0 * frac;
                }
                out.push_back(x);
            }
            break;
        case ModelKind::FlatDisk:
            for (int j = 0; j < samples; ++j) {
                const double phi = 2.0 * kPi * (j + 0.5) / samples;
                out.push_back(Point{{std::cos(phi), std::sin(phi)}});
            }
            break;
        case ModelKind::SphericalCap:
            for (int j = 0; j < samples; ++j) {
                const double phi = -kPi + 2.0 * kPi * (j + 0.5) / samples;
                out.push_back(Point{{model.theta0, phi}});
            }
            break;
    }
    return out;
}

double neumann_violation(const ManifoldModel& model, const ScalarField& f, int samples) {
    double worst = 0.0;
    for (const Point& x : boundary_samples(model, samples)) {
        worst = std::max(worst, std::abs(f.gradient(x).dot(normal_field(model, x))));
    }
    return worst;
}

double absolute_violation(const ManifoldModel& model, const OneForm& phi, int samples) {
    constexpr double h = 1e-5;
    const int d = model.dim;
    double worst = 0.0;
    for (const Point& x : boundary_samples(model, samples)) {
        const Vector nu = normal_field(model, x);
        worst = std::max(worst, std::abs(phi.covector(x).dot(nu)));
        if (model.id == ModelKind::SphericalCap) {
            // Coordinate components (phi_theta, sin(theta) phi_e_phi); the
            // 2-form coefficient is d_theta phi_phi - d_phi phi_theta.
            auto coord = [&](double t, double p) {
                const Vector c = phi.covector(Point{{t, p}});
                return Eigen::Vector2d(c(0), std::sin(t) * c(1));
            };
            const double dth = (coord(x(0) + h, x(1))(1) - coord(x(0) - h, x(1))(1)) / (2.0 * h);
            const double dph = (coord(x(0), x(1) + h)(0) - coord(x(0), x(1) - h)(0)) / (2.0 * h);
            worst = std::max(worst, std::abs(dth - dph) / std::sin(x(0)));
            continue;
        }
        // Cartesian charts: d phi(u, v) = u^T (J^T - J) v with J(j, i) = d_i phi_j.
        Eigen::MatrixXd J(d, d);
        for (int i = 0; i < d; ++i) {
            Point xp = x;
            Point xm = x;
            xp(i) += h;
            xm(i) -= h;
            J.col(i) = (phi.covector(xp) - phi.covector(xm)) / (2.0 * h);
        }
        const Eigen::RowVectorXd row = nu.transpose() * (J.transpose() - J);
        worst = std::max(worst, row.cwiseAbs().maxCoeff());
    }
    return worst;
}

std::uint64_t digest_of(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

MCEstimate summarize(const Eigen::MatrixXd& samples, std::uint64_t digest) {
    const Eigen::Index n = samples.rows();
    if (n < 2) throw ArgumentError("an estimate needs at least two samples");
    const Eigen::Index width = samples.cols();
    MCEstimate out{Eigen::VectorXd(width), Eigen::VectorXd(width), static_cast<std::size_t>(n), digest};
    for (Eigen::Index c = 0; c < width; ++c) {
        detail::Neumaier sum;
        for (Eigen::Index i = 0; i < n; ++i) sum.add(samples(i, c));
        const double mean = sum.result() / static_cast<double>(n);
        detail::Neumaier sq;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double e = samples(i, c) - mean;
            sq.add(e * e);
        }
        const double var = sq.result() / static_cast<double>(n - 1);
        out.mean(c) = mean;
        out.std_error(c) = std::sqrt(var / static_cast<double>(n));
    }
    return out;
}

ReflectedPath estimator_path(const ManifoldModel& model, const Point& x, const MCOptions& options, std::size_t k) {
    return simulate(model, x, options, k).path;
}

MCEstimate neumann_heat_mc(const ManifoldModel& model, const ScalarField& f, const Point& x,
                           const MCOptions& options) {
    check_options(options);
    boundary_distance(model, x);
    const Eigen::Index last = static_cast<Eigen::Index>(options.grid.N);
    const Eigen::MatrixXd rows = detail::sample_rows(options.n_paths, 1, options.threads, [&](std::size_t k) {
        const ReflectedPath path = estimator_path(model, x, options, k);
        return Vector::Constant(1, f.value(path.points.row(last).transpose()));
    });
    return summarize(rows, digest_of(canonical("neumann_heat", model, options, "field=" + f.name + ";x=" + describe(x))));
}

MCEstimate one_form_mc(const ManifoldModel& model, const OneForm& phi, const TangentVector& v,
                       const MCOptions& options) {
    check_options(options);
    require_start(model, v);
    if (!phi.absolute_compatible) throw ArgumentError("one-form " + phi.name + " violates the absolute conditions");
    boundary_distance(model, v.base);
    const Eigen::Index last = static_cast<Eigen::Index>(options.grid.N);
    const Eigen::MatrixXd rows = detail::sample_rows(options.n_paths, 1, options.threads, [&](std::size_t k) {
        const ReflectedPath path = estimator_path(model, v.base, options, k);
        const std::vector<Vector> w = damped_images(model, path, v.components, options.eps, options.eta);
        const Point y = path.points.row(last).transpose();
        return Vector::Constant(1, phi.covector(y).dot(w.back()));
    });
    return summarize(rows, digest_of(canonical("one_form", model, options,
                                               "form=" + phi.name + ";x=" + describe(v.base) +
                                                   ";v=" + describe(v.components))));
}

MCEstimate bismut_gradient_mc(const ManifoldModel& model, const ScalarField& f, const TangentVector& v,
                              const MCOptions& options) {
    check_options(options);
    require_start(model, v);
    if (!f.neumann_compatible) throw ArgumentError("field " + f.name + " has a nonzero normal derivative");
    boundary_distance(model, v.base);
    const double T = options.grid.T;
    const std::size_t N = options.grid.N;
    const Eigen::MatrixXd rows = detail::sample_rows(options.n_paths, 1, options.threads, [&](std::size_t k) {
        const Sample s = simulate(model, v.base, options, k);
        const std::vector<Vector> w = damped_images(model, s.path, v.components, options.eps, options.eta);
        detail::Neumaier weight;
        Eigen::MatrixXd sigma;
        if (model.flat_boundary()) sigma = frame(model, v.base).sigma;
        for (std::size_t i = 0; i < N; ++i) {
            const auto r = static_cast<Eigen::Index>(i);
            if (!model.flat_boundary()) sigma = frame(model, s.path.points.row(r).transpose()).sigma;
            const Eigen::RowVectorXd proj = w[i].transpose() * sigma;
            weight.add(proj.dot(s.driver.increments.row(r)));
        }
        const Point y = s.path.points.row(static_cast<Eigen::Index>(N)).transpose();
        return Vector::Constant(1, f.value(y) * weight.result() / T);
    });
    return summarize(rows, digest_of(canonical("bismut", model, options,
                                               "field=" + f.name + ";x=" + describe(v.base) +
                                                   ";v=" + describe(v.components))));
}

MCEstimate finite_difference_gradient_mc(const ManifoldModel& model, const ScalarField& f,
                                         const TangentVector& v, double h, const MCOptions& options) {
    check_options(options);
    require_start(model, v);
    if (!(h > 0.0)) throw ArgumentError("difference step must be positive");
    const Point xp = v.base + h * v.components;
    const Point xm = v.base - h * v.components;
    if (!in_domain(model, xp, 0.0) || !in_domain(model, xm, 0.0)) {
        throw ArgumentError("difference stencil leaves the domain");
    }
    const Eigen::Index last = static_cast<Eigen::Index>(options.grid.N);
    const ReflectedOptions ro{scheme_for(model, options), options.eta};
    const Eigen::MatrixXd rows = detail::sample_rows(options.n_paths, 1, options.threads, [&](std::size_t k) {
        const DriverPath driver =
            DriverPath::generate(rng::path_seed(options.seed, k), options.grid, model.frame_count);
        const ReflectedPath up = integrate_reflected(model, xp, driver, options.grid, ro);
        const ReflectedPath down = integrate_reflected(model, xm, driver, options.grid, ro);
        const double diff =
            f.value(up.points.row(last).transpose()) - f.value(down.points.row(last).transpose());
        return Vector::Constant(1, diff / (2.0 * h));
    });
    std::ostringstream extra;
    extra.precision(17);
    extra << "field=" << f.name << ";x=" << describe(v.base) << ";v=" << describe(v.components) << ";h=" << h;
    return summarize(rows, digest_of(canonical("finite_difference", model, options, extra.str())));
}

TimeField neumann_gaussian_solution(const ManifoldModel& model, double horizon) {
    if (!model.flat_boundary()) throw UnsupportedError("closed-form heat flow needs a flat boundary");
    const double d = model.dim;
    auto width = [horizon](double t) { return 1.0 + 2.0 * (horizon - t); };
    return {[=](double t, const Point& x) {
                const double s = width(t);
                return std::pow(s, -0.5 * d) * std::exp(-x.squaredNorm() / s);
            },
            [=](double t, const Point& x) {
                const double s = width(t);
                const double u = std::pow(s, -0.5 * d) * std::exp(-x.squaredNorm() / s);
                return Vector(-2.0 * u / s * x);
            }};
}

MCEstimate martingale_check(const ManifoldModel& model, const TimeField& F, const TangentVector& v,
                            const MCOptions& options) {
    check_options(options);
    require_start(model, v);
    boundary_distance(model, v.base);
    const double T = options.grid.T;
    const Eigen::Index last = static_cast<Eigen::Index>(options.grid.N);
    const double start = F.gradient(0.0, v.base).dot(v.components);
    const Eigen::MatrixXd rows = detail::sample_rows(options.n_paths, 1, options.threads, [&](std::size_t k) {
        const ReflectedPath path = estimator_path(model, v.base, options, k);
        const std::vector<Vector> w = damped_images(model, path, v.components, options.eps, options.eta);
        const Point y = path.points.row(last).transpose();
        return Vector::Constant(1, F.gradient(T, y).dot(w.back()) - start);
    });
    return summarize(rows, digest_of(canonical("martingale", model, options,
                                               "x=" + describe(v.base) + ";v=" + describe(v.components))));
}

Curve straight_curve(const Point& start, const Vector& direction) {
    return {[start, direction](double u) { return Point(start + u * direction); },
            [direction](double) { return direction; }};
}

MCEstimate weak_derivative_check(const ManifoldModel& model, const ScalarField& f, const Curve& gamma, double u1,
                                 double u2, const MCOptions& options) {
    if (!model.flat_boundary()) throw UnsupportedError("the weak derivative check needs a flat boundary");
    check_options(options);
    if (!(u1 <= u2)) throw ArgumentError("curve parameters must satisfy u1 <= u2");
    if (!f.neumann_compatible) throw ArgumentError("field " + f.name + " has a nonzero normal derivative");
    constexpr int kScan = 16;
    for (int j = 0; j <= kScan; ++j) {
        const double u = u1 + (u2 - u1) * j / kScan;
        if (!in_domain(model, gamma.point(u), 0.0)) throw ArgumentError("curve leaves the domain");
    }
    const int d = model.dim;
    const std::size_t N = options.grid.N;
    const ReflectionScheme scheme = scheme_for(model, options);
    const Eigen::MatrixXd rows = detail::sample_rows(options.n_paths, 2, options.threads, [&](std::size_t k) {
        const DriverPath driver = DriverPath::generate(rng::path_seed(options.seed, k), options.grid, d);
        const FlatReflectedFlow flow(model, driver, options.grid, scheme);
        auto touched = [&](double u) { return flow.touched(gamma.point(u), N); };
        auto integrand = [&](double u) {
            const Point x = gamma.point(u);
            Vector dx = gamma.velocity(u);
            if (flow.touched(x, N)) dx(d - 1) = 0.0;
            return f.gradient(flow.point(x, N)).dot(dx);
        };
        // Break the parameter range where the flow starts to touch the boundary.
        std::vector<double> cuts{u1};
        double prev_u = u1;
        bool prev_t = touched(u1);
        for (int j = 1; j <= kScan; ++j) {
            const double u = u1 + (u2 - u1) * j / kScan;
            const bool t = touched(u);
            if (t != prev_t) {
                double lo = prev_u;
                double hi = u;
                for (int it = 0; it < 200 && lo < hi; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    if (mid <= lo || mid >= hi) break;
                    (touched(mid) == prev_t ? lo : hi) = mid;
                }
                cuts.push_back(hi);
            }
            prev_u = u;
            prev_t = t;
        }
        cuts.push_back(u2);
        detail::Neumaier integral;
        detail::Neumaier magnitude;
        // Composite rule on panels of width <= 1/16: on a unit panel the
        // eight-point truncation error of a Gaussian is ~1e-16 and biased.
        for (std::size_t j = 0; j + 1 < cuts.size(); ++j) {
            const double width = cuts[j + 1] - cuts[j];
            const int panels = std::max(1, static_cast<int>(std::ceil(16.0 * width)));
            for (int q = 0; q < panels; ++q) {
                const double lo = q == 0 ? cuts[j] : cuts[j] + width * q / panels;
                const double hi = q + 1 == panels ? cuts[j + 1] : cuts[j] + width * (q + 1) / panels;
                integral.add(legendre8(integrand, lo, hi));
                magnitude.add(legendre8([&](double u) { return std::abs(integrand(u)); }, lo, hi));
            }
        }
        const double f2 = f.value(flow.point(gamma.point(u2), N));
        const double f1 = f.value(flow.point(gamma.point(u1), N));
        constexpr double unit = 0.5 * std::numeric_limits<double>::epsilon();
        return Vector(Eigen::Vector2d(f2 - f1 - integral.result(),
                                      unit * (std::abs(f1) + std::abs(f2) + magnitude.result())));
    });
    std::ostringstream extra;
    extra.precision(17);
    extra << "field=" << f.name << ";start=" << describe(gamma.point(u1)) << ";end=" << describe(gamma.point(u2))
          << ";u1=" << u1 << ";u2=" << u2;
    const MCEstimate both = summarize(rows, digest_of(canonical("weak_derivative", model, options, extra.str())));
    MCEstimate out{both.mean.head(1), both.std_error.head(1), both.n_paths, both.config_digest};
    out.numerical_error = both.mean(1);
    return out;
}

double image_kernel_oracle(ImageKind kind, double T, double x, const std::function<double(double)>& f) {
    if (!(T > 0.0)) throw ArgumentError("oracle horizon must be positive");
    if (!(x >= 0.0)) throw ArgumentError("oracle start must be >= 0");
    const double sign = kind == ImageKind::Neumann ? 1.0 : -1.0;
    const double scale = std::sqrt(T);
    const double norm = 1.0 / std::sqrt(2.0 * kPi * T);
    auto kernel = [&](double y) {
        const double a = x - y;
        const double b = x + y;
        return f(y) * norm * (std::exp(-a * a / (2.0 * T)) + sign * std::exp(-b * b / (2.0 * T)));
    };
    // Both kernels are below exp(-72) beyond 12 standard deviations from x.
    const double lo = std::max(0.0, x - 12.0 * scale);
    const double hi = x + 12.0 * scale;
    // Split at x, where the kernel peaks.
    auto piece = [&](double a, double b) {
        double error = 0.0;
        double l1 = 0.0;
        const double value =
            boost::math::quadrature::gauss_kronrod<double, 15>::integrate(kernel, a, b, 15, 1e-10, &error, &l1);
        if (!(error <= 1e-8 * l1 + 1e-15)) throw NumericError("image kernel quadrature did not converge");
        return value;
    };
    double total = 0.0;
    if (x > lo) total += piece(lo, x);
    total += piece(x, hi);
    return total;
}

}  // namespace rbm
