#include "rbm/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <json.hpp>
#include <numbers>
#include <sstream>
#include <tuple>

#include "parallel.hpp"
#include "rbm/damped.hpp"
#include "rbm/errors.hpp"
#include "rbm/reflected.hpp"
#include "rbm/rng.hpp"
#include "rbm/skorohod1d.hpp"
#include "rbm/transport.hpp"

namespace rbm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

double parse_double(std::string_view text) {
    const std::string t = trim(text);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
        throw ArgumentError("not a number: '" + t + "'");
    }
    return v;
}

std::uint64_t parse_unsigned(std::string_view text) {
    const std::string t = trim(text);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
        throw ArgumentError("not a nonnegative integer: '" + t + "'");
    }
    return v;
}

std::vector<double> parse_list(std::string_view text) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t next = std::min(text.find(',', pos), text.size());
        const std::string item = trim(text.substr(pos, next - pos));
        if (!item.empty()) out.push_back(parse_double(item));
        pos = next + 1;
    }
    return out;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string short_fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

std::string join(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt(v[i]);
    return s;
}

void require_decreasing(const std::vector<double>& grid, const char* what) {
    if (grid.empty()) throw ArgumentError(std::string(what) + " must not be empty");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] > 0.0)) throw ArgumentError(std::string(what) + " entries must be positive");
        if (i > 0 && !(grid[i] < grid[i - 1])) throw ArgumentError(std::string(what) + " must be decreasing");
    }
}

double quantile(std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

class RowSink {
public:
    RowSink(std::string experiment, std::uint64_t digest) : experiment_(std::move(experiment)), digest_(digest) {}

    /// Mean, standard error and quartiles of one column of per-driver samples.
    void stats(const std::string& statistic, const std::string& params, const Eigen::VectorXd& column) {
        const MCEstimate e = summarize(column, digest_);
        std::vector<double> v(column.data(), column.data() + column.size());
        rows_.push_back({kSchemaVersion, digest_, experiment_, params, statistic, e.value(), e.error(),
                         quantile(v, 0.25), quantile(v, 0.5), quantile(v, 0.75)});
    }

    void estimate(const std::string& statistic, const std::string& params, const MCEstimate& e) {
        rows_.push_back({kSchemaVersion, digest_, experiment_, params, statistic, e.value(), e.error(), kNaN, kNaN,
                         kNaN});
    }

    void scalar(const std::string& statistic, const std::string& params, double value) {
        rows_.push_back({kSchemaVersion, digest_, experiment_, params, statistic, value, kNaN, kNaN, kNaN, kNaN});
    }

    std::vector<ResultRow> take() { return std::move(rows_); }

private:
    std::string experiment_;
    std::uint64_t digest_;
    std::vector<ResultRow> rows_;
};

DriverPath driver_for(const ExperimentConfig& c, const ManifoldModel& model, std::size_t k) {
    return DriverPath::generate(rng::path_seed(c.seed, k), c.grid(), model.frame_count);
}

std::string a_param(double a) { return "a=" + short_fmt(a); }

// Each experiment fills per-driver sample columns and turns them into rows.
using Experiment = std::function<void(const ExperimentConfig&, const ManifoldModel&, RowSink&)>;

void run_halfline(const ExperimentConfig& c, const ManifoldModel& model, RowSink& sink) {
    if (model.id != ModelKind::HalfLine) throw ArgumentError("the halfline experiment needs model half-line");
    const double x = c.start(model)(0);
    const std::size_t na = c.a_grid.size();
    const double h = c.grid().dt();
    const Eigen::MatrixXd s = detail::sample_rows(c.n_paths, static_cast<Eigen::Index>(2 * na), c.threads,
                                                  [&](std::size_t k) {
        const DriverPath driver = driver_for(c, model, k);
        const RealPath f = driver.component(0, c.grid());
        const SkorohodSolution sol = skorohod_map(x, f);
        const RealPath indicator = derivative_flow_exact(x, f);
        Eigen::VectorXd out(2 * na);
        for (std::size_t j = 0; j < na; ++j) {
            const RealPath Xa = penalized_path_1d(c.a_grid[j], x, f, {driver.seed, 20});
            const RealPath Va = derivative_flow_penalized(c.a_grid[j], Xa);
            out(static_cast<Eigen::Index>(j)) = (Xa.values - sol.reflected.values).cwiseAbs().maxCoeff();
            const Eigen::Index n = Va.size() - 1;
            out(static_cast<Eigen::Index>(na + j)) =
                h * (Va.values.head(n) - indicator.values.head(n)).cwiseAbs().sum();
        }
        return out;
    });
    for (std::size_t j = 0; j < na; ++j) {
        sink.stats("sup_gap", a_param(c.a_grid[j]), s.col(static_cast<Eigen::Index>(j)));
        sink.stats("derivative_l1", a_param(c.a_grid[j]), s.col(static_cast<Eigen::Index>(na + j)));
    }
}

void run_sp(const ExperimentConfig& c, const ManifoldModel& model, RowSink& sink) {
    const Point x = c.start(model);
    const std::size_t na = c.a_grid.size();
    const std::size_t np = c.p.size();
    const ReflectedOptions ro{ReflectionScheme::Projection, c.contact_threshold()};
    const Eigen::MatrixXd s = detail::sample_rows(c.n_paths, static_cast<Eigen::Index>(na * np), c.threads,
                                                  [&](std::size_t k) {
        const DriverPath driver = driver_for(c, model, k);
        const ReflectedPath ref = integrate_reflected(model, x, driver, c.grid(), ro);
        Eigen::VectorXd out(na * np);
        for (std::size_t j = 0; j < na; ++j) {
            const PenalizedPath pen = integrate_penalized(model, c.a_grid[j], x, driver, c.grid());
            double sup = 0.0;
            for (Eigen::Index i = 0; i < ref.points.rows(); ++i) {
                sup = std::max(sup, chart_distance(model, pen.points.row(i).transpose(), ref.points.row(i).transpose()));
            }
            for (std::size_t q = 0; q < np; ++q) out(static_cast<Eigen::Index>(j * np + q)) = std::pow(sup, c.p[q]);
        }
        return out;
    });
    for (std::size_t j = 0; j < na; ++j) {
        for (std::size_t q = 0; q < np; ++q) {
            sink.stats("sp_distance", a_param(c.a_grid[j]) + ";p=" + short_fmt(c.p[q]),
                       s.col(static_cast<Eigen::Index>(j * np + q)));
        }
    }
}

void run_local_time(const ExperimentConfig& c, const ManifoldModel& model, RowSink& sink) {
    const Point x = c.start(model);
    const std::size_t na = c.a_grid.size();
    const ReflectedOptions ro{ReflectionScheme::Projection, c.contact_threshold()};
    const Eigen::MatrixXd s = detail::sample_rows(c.n_paths, static_cast<Eigen::Index>(3 * na), c.threads,
                                                  [&](std::size_t k) {
        const DriverPath driver = driver_for(c, model, k);
        const ReflectedPath ref = integrate_reflected(model, x, driver, c.grid(), ro);
        Eigen::VectorXd out(3 * na);
        for (std::size_t j = 0; j < na; ++j) {
            const PenalizedPath pen = integrate_penalized(model, c.a_grid[j], x, driver, c.grid());
            const LocalTimeTV tv = local_time_tv(ref.L, pen.L_a);
            out(static_cast<Eigen::Index>(3 * j)) = tv.sup_gap;
            out(static_cast<Eigen::Index>(3 * j + 1)) = tv.total_variation;
            out(static_cast<Eigen::Index>(3 * j + 2)) = tv.twice_total;
        }
        return out;
    });
    for (std::size_t j = 0; j < na; ++j) {
        const auto b = static_cast<Eigen::Index>(3 * j);
        const std::string par = a_param(c.a_grid[j]);
        sink.stats("lt_sup_gap", par, s.col(b));
        sink.stats("lt_tv", par, s.col(b + 1));
        sink.stats("lt_twice_total", par, s.col(b + 2));
        sink.scalar("lt_tv_ratio", par, s.col(b + 1).sum() / s.col(b + 2).sum());
    }
}

void run_transport(const ExperimentConfig& c, const ManifoldModel& model, RowSink& sink) {
    const Point x = c.start(model);
    const TangentVector v{x, Vector::Unit(model.dim, 0)};
    const std::size_t na = c.a_grid.size();
    const Eigen::MatrixXd s = detail::sample_rows(c.n_paths, static_cast<Eigen::Index>(na), c.threads,
                                                  [&](std::size_t k) {
        const std::vector<double> gaps =
            transport_convergence_check(model, c.a_grid, driver_for(c, model, k), c.grid(), v);
        return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(gaps.data(), static_cast<Eigen::Index>(na)));
    });
    for (std::size_t j = 0; j < na; ++j) {
        sink.stats("transport_gap", a_param(c.a_grid[j]), s.col(static_cast<Eigen::Index>(j)));
    }
}

void run_projection(const ExperimentConfig& c, const ManifoldModel& model, RowSink& sink) {
    const std::vector<MCEstimate> est =
        projection_convergence(model, c.a_grid, c.start(model), c.grid(), c.n_paths, c.seed, c.threads);
    for (std::size_t j = 0; j < est.size(); ++j) sink.estimate("projection_gap", a_param(c.a_grid[j]), est[j]);
}

void run_cauchy(const ExperimentConfig& c, const ManifoldModel& model, RowSink& sink) {
    const std::vector<double>& eps = c.eps_grid;
    if (eps.size() < 2) throw ArgumentError("the cauchy experiment needs at least two eps levels");
    for (std::size_t i = 1; i < eps.size(); ++i) {
        if (std::abs(eps[i] - 0.5 * eps[i - 1]) > 1e-12 * eps[0]) {
            throw ArgumentError("eps levels must halve from one to the next");
        }
    }
    const Point x = c.start(model);
    const double eta = c.contact_threshold();
    const ReflectedOptions ro{ReflectionScheme::Projection, eta};
    const auto levels = static_cast<Eigen::Index>(eps.size());
    const Eigen::MatrixXd s =
        detail::sample_rows(c.n_paths, 2 * levels, c.threads, [&](std::size_t k) {
            const ReflectedPath ref = integrate_reflected(model, x, driver_for(c, model, k), c.grid(), ro);
            const TransportFrame frame = parallel_transport(model, ref.points);
            const DampedLimit lim = damped_limit(model, ref, frame, eps[0], static_cast<int>(levels), eta);
            Eigen::VectorXd out(2 * levels);
            for (Eigen::Index j = 0; j + 1 < levels; ++j) out(j) = lim.report.gaps[static_cast<std::size_t>(j)];
            out(levels - 1) = lim.report.monotone ? 1.0 : 0.0;
            for (Eigen::Index j = 0; j < levels; ++j) {
                out(levels + j) = lim.report.uncovered_time[static_cast<std::size_t>(j)];
            }
            return out;
        });
    for (Eigen::Index j = 0; j + 1 < levels; ++j) {
        const auto u = static_cast<std::size_t>(j);
        sink.stats("cauchy_gap", "eps=" + short_fmt(eps[u]) + "->" + short_fmt(eps[u + 1]), s.col(j));
    }
    for (Eigen::Index j = 0; j < levels; ++j) {
        sink.stats("uncovered_time", "eps=" + short_fmt(eps[static_cast<std::size_t>(j)]), s.col(levels + j));
    }
    sink.scalar("monotone_fraction", "", s.col(levels - 1).mean());
    // Pearson correlation of each gap with the uncovered time of the finer level.
    Eigen::VectorXd g(s.rows() * (levels - 1));
    Eigen::VectorXd u(g.size());
    for (Eigen::Index j = 0; j + 1 < levels; ++j) {
        g.segment(j * s.rows(), s.rows()) = s.col(j);
        u.segment(j * s.rows(), s.rows()) = s.col(levels + j + 1);
    }
    const Eigen::ArrayXd gc = g.array() - g.mean();
    const Eigen::ArrayXd uc = u.array() - u.mean();
    const double denom = std::sqrt((gc * gc).sum() * (uc * uc).sum());
    sink.scalar("gap_uncovered_correlation", "", denom > 0.0 ? (gc * uc).sum() / denom : kNaN);
}

void run_fa_lp(const ExperimentConfig& c, const ManifoldModel& model, RowSink& sink) {
    const Point x = c.start(model);
    const std::size_t na = c.a_grid.size();
    const std::size_t np = c.p.size();
    const double h = c.grid().dt();
    const ReflectedOptions ro{ReflectionScheme::Projection, 0.0};
    const Eigen::MatrixXd s = detail::sample_rows(c.n_paths, static_cast<Eigen::Index>(na * np), c.threads,
                                                  [&](std::size_t k) {
        const DriverPath driver = driver_for(c, model, k);
        const ReflectedPath ref = integrate_reflected(model, x, driver, c.grid(), ro);
        const DampedState limit = damped_eps(model, ref, parallel_transport(model, ref.points), 0.0, 0.0);
        Eigen::VectorXd out(na * np);
        for (std::size_t j = 0; j < na; ++j) {
            const PenalizedPath pen = integrate_penalized(model, c.a_grid[j], x, driver, c.grid());
            const DampedState da = damped_penalized(model, c.a_grid[j], pen, parallel_transport(model, pen.points));
            for (std::size_t q = 0; q < np; ++q) {
                detail::Neumaier sum;
                for (std::size_t i = 0; i + 1 < limit.size(); ++i) {
                    sum.add(std::pow((da.f[i] - limit.f[i]).norm(), c.p[q]));
                }
                out(static_cast<Eigen::Index>(j * np + q)) = h * sum.result();
            }
        }
        return out;
    });
    for (std::size_t j = 0; j < na; ++j) {
        for (std::size_t q = 0; q < np; ++q) {
            sink.stats("fa_lp", a_param(c.a_grid[j]) + ";p=" + short_fmt(c.p[q]),
                       s.col(static_cast<Eigen::Index>(j * np + q)));
        }
    }
}

void run_norm_bound(const ExperimentConfig& c, const ManifoldModel& model, RowSink& sink) {
    const Point x = c.start(model);
    const std::size_t na = c.a_grid.size();
    const Eigen::MatrixXd s = detail::sample_rows(c.n_paths, static_cast<Eigen::Index>(na), c.threads,
                                                  [&](std::size_t k) {
        const DriverPath driver = driver_for(c, model, k);
        Eigen::VectorXd out(na);
        for (std::size_t j = 0; j < na; ++j) {
            const PenalizedPath pen = integrate_penalized(model, c.a_grid[j], x, driver, c.grid());
            const DampedState st = damped_penalized(model, c.a_grid[j], pen, parallel_transport(model, pen.points));
            const Eigen::VectorXd norms = damped_norms(st);
            const Eigen::VectorXd bound = damped_norm_bound(model, pen);
            out(static_cast<Eigen::Index>(j)) = (norms.array().square() - bound.array()).maxCoeff();
        }
        return out;
    });
    for (std::size_t j = 0; j < na; ++j) {
        const auto col = static_cast<Eigen::Index>(j);
        sink.stats("norm_bound_excess", a_param(c.a_grid[j]), s.col(col));
        sink.scalar("norm_bound_max_excess", a_param(c.a_grid[j]), s.col(col).maxCoeff());
    }
}

// z-score of an estimate against a reference with its own error.
double z_score(double value, double se, double ref, double ref_se) {
    const double combined = std::sqrt(se * se + ref_se * ref_se);
    if (combined == 0.0) return value == ref ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), value - ref);
    return (value - ref) / combined;
}

void run_verify(const ExperimentConfig& c, const ManifoldModel& model, RowSink& sink) {
    if (!model.flat_boundary() || model.dim != 1) {
        throw UnsupportedError("the verify experiment needs a one-dimensional flat model");
    }
    const ScalarField f = scalar_field(c.field, model);
    const double x = c.start(model)(0);
    const Point xp = Point::Constant(1, x);
    const TangentVector v{xp, Vector::Ones(1)};
    MCOptions opt;
    opt.grid = c.grid();
    opt.n_paths = c.n_paths;
    opt.seed = c.seed;
    opt.threads = c.threads;
    const std::string par = "x=" + short_fmt(x);
    auto f1 = [&](double y) { return f.value(Point::Constant(1, y)); };
    auto df1 = [&](double y) { return f.gradient(Point::Constant(1, y))(0); };

    auto emit = [&](const std::string& name, const MCEstimate& e, double ref, double ref_se) {
        sink.estimate(name, par, e);
        if (e.numerical_error > 0.0) sink.scalar(name + "_rounding_bound", par, e.numerical_error);
        sink.scalar(name + "_reference", par, ref);
        sink.scalar(name + "_z", par, z_score(e.value(), e.combined_error(), ref, ref_se));
    };

    const double u_ref = image_kernel_oracle(ImageKind::Neumann, c.T, x, f1);
    emit("neumann_heat", neumann_heat_mc(model, f, xp, opt), u_ref, 0.0);

    const double du_ref = image_kernel_oracle(ImageKind::Dirichlet, c.T, x, df1);
    emit("one_form", one_form_mc(model, exact_form(f), v, opt), du_ref, 0.0);

    MCOptions fd_opt = opt;
    fd_opt.seed = rng::hash(c.seed, 0xfdULL);
    const MCEstimate fd = finite_difference_gradient_mc(model, f, v, 0.05, fd_opt);
    sink.estimate("finite_difference", par, fd);
    const MCEstimate bis = bismut_gradient_mc(model, f, v, opt);
    sink.estimate("bismut", par, bis);
    sink.scalar("bismut_z", par, z_score(bis.value(), bis.error(), fd.value(), fd.error()));

    if (c.field == "gauss") {
        emit("martingale", martingale_check(model, neumann_gaussian_solution(model, c.T), v, opt), 0.0, 0.0);
    }
    const Curve gamma = straight_curve(Point::Constant(1, 0.2), Vector::Ones(1));
    emit("weak_derivative", weak_derivative_check(model, f, gamma, 0.0, 1.0, opt), 0.0, 0.0);
}

const std::map<std::string, Experiment>& experiments() {
    static const std::map<std::string, Experiment> table{
        {"cauchy", run_cauchy},         {"fa-lp", run_fa_lp},       {"halfline", run_halfline},
        {"local-time", run_local_time}, {"norm-bound", run_norm_bound}, {"projection", run_projection},
        {"sp", run_sp},                 {"transport", run_transport}, {"verify", run_verify},
    };
    return table;
}

std::string csv_number(double v) { return std::isnan(v) ? std::string() : fmt(v); }

std::string hex_digest(std::uint64_t d) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(d));
    return buf;
}

}  // namespace

std::vector<std::string> experiment_kinds() {
    std::vector<std::string> out;
    for (const auto& [k, _] : experiments()) out.push_back(k);
    return out;
}

void ExperimentConfig::set(std::string_view key_in, std::string_view value) {
    std::string key = trim(key_in);
    std::replace(key.begin(), key.end(), '_', '-');
    const std::string v = trim(value);
    if (key == "kind") {
        kind = v;
    } else if (key == "model") {
        model = v;
    } else if (key == "T") {
        T = parse_double(v);
    } else if (key == "steps" || key == "N") {
        N = parse_unsigned(v);
    } else if (key == "a") {
        a_grid = {parse_double(v)};
    } else if (key == "a-grid") {
        a_grid = parse_list(v);
    } else if (key == "eps-grid") {
        eps_grid = parse_list(v);
    } else if (key == "eta") {
        eta = parse_double(v);
    } else if (key == "paths") {
        n_paths = parse_unsigned(v);
    } else if (key == "p") {
        p = parse_list(v);
    } else if (key == "seed") {
        seed = parse_unsigned(v);
    } else if (key == "field") {
        field = v;
    } else if (key == "x0") {
        x0 = parse_list(v);
    } else if (key == "out") {
        out = v;
    } else if (key == "format") {
        format = v;
    } else if (key == "threads") {
        threads = static_cast<unsigned>(parse_unsigned(v));
    } else {
        throw ArgumentError("unknown config key: " + std::string(key_in));
    }
}

ExperimentConfig ExperimentConfig::parse(std::string_view text) {
    ExperimentConfig c;
    std::istringstream in{std::string(text)};
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        if (trim(line).empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ArgumentError("config line " + std::to_string(number) + " is not key=value");
        }
        c.set(line.substr(0, eq), line.substr(eq + 1));
    }
    return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config file " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

void ExperimentConfig::validate() const {
    if (!experiments().contains(kind)) throw ArgumentError("unknown experiment kind: " + kind);
    const ManifoldModel m = ManifoldModel::parse(model);
    if (!(T > 0.0) || !std::isfinite(T)) throw ArgumentError("T must be positive");
    if (N < 1) throw ArgumentError("steps must be >= 1");
    require_decreasing(a_grid, "a-grid");
    require_decreasing(eps_grid, "eps-grid");
    if (n_paths < 2) throw ArgumentError("paths must be >= 2");
    if (p.empty()) throw ArgumentError("p must not be empty");
    for (double q : p) {
        if (!(q > 0.0)) throw ArgumentError("p entries must be positive");
    }
    if (format != "csv" && format != "json") throw ArgumentError("format must be csv or json");
    if (!x0.empty()) {
        if (static_cast<int>(x0.size()) != m.dim) throw ArgumentError("x0 has the wrong dimension");
        if (!in_domain(m, start(m), 0.0)) throw ArgumentError("x0 lies outside the domain");
    }
}

double ExperimentConfig::contact_threshold() const { return eta < 0.0 ? std::sqrt(grid().dt()) : eta; }

Point ExperimentConfig::start(const ManifoldModel& m) const {
    if (!x0.empty()) return Eigen::Map<const Eigen::VectorXd>(x0.data(), static_cast<Eigen::Index>(x0.size()));
    Point x = Point::Zero(m.dim);
    switch (m.id) {
        case ModelKind::HalfLine:
        case ModelKind::HalfSpace: x(m.dim - 1) = 0.5; break;
        case ModelKind::FlatDisk: x(0) = 0.8; break;
        case ModelKind::SphericalCap: x(0) = m.theta0 * 5.0 / 6.0; break;
    }
    return x;
}

std::string ExperimentConfig::canonical() const {
    const ManifoldModel m = ManifoldModel::parse(model);
    const Point x = start(m);
    std::map<std::string, std::string> kv{
        {"a-grid", join(a_grid)},
        {"eps-grid", join(eps_grid)},
        {"eta", fmt(contact_threshold())},
        {"field", field},
        {"kind", kind},
        {"model", m.name()},
        {"p", join(p)},
        {"paths", std::to_string(n_paths)},
        {"seed", std::to_string(seed)},
        {"steps", std::to_string(N)},
        {"T", fmt(T)},
        {"x0", join(std::vector<double>(x.data(), x.data() + x.size()))},
    };
    std::string s;
    for (const auto& [k, v] : kv) s += k + "=" + v + "\n";
    return s;
}

std::uint64_t ExperimentConfig::digest() const { return digest_of(canonical()); }

MCEstimate sp_distance(const ManifoldModel& model, const std::vector<Eigen::MatrixXd>& A,
                       const std::vector<Eigen::MatrixXd>& B, double p) {
    if (A.size() != B.size() || A.size() < 2) throw ArgumentError("need at least two coupled path pairs");
    if (!(p > 0.0)) throw ArgumentError("p must be positive");
    Eigen::VectorXd sup(static_cast<Eigen::Index>(A.size()));
    for (std::size_t k = 0; k < A.size(); ++k) {
        if (A[k].rows() != B[k].rows() || A[k].cols() != B[k].cols()) throw ArgumentError("path grids differ");
        double s = 0.0;
        for (Eigen::Index i = 0; i < A[k].rows(); ++i) {
            s = std::max(s, chart_distance(model, A[k].row(i).transpose(), B[k].row(i).transpose()));
        }
        sup(static_cast<Eigen::Index>(k)) = std::pow(s, p);
    }
    return summarize(sup, 0);
}

LocalTimeTV local_time_tv(const Eigen::VectorXd& L, const Eigen::VectorXd& La) {
    if (L.size() != La.size() || L.size() < 1) throw ArgumentError("local time series differ in length");
    LocalTimeTV out;
    detail::Neumaier tv;
    for (Eigen::Index i = 0; i < L.size(); ++i) {
        out.sup_gap = std::max(out.sup_gap, std::abs(L(i) - La(i)));
        if (i > 0) tv.add(std::abs((L(i) - L(i - 1)) - (La(i) - La(i - 1))));
    }
    out.total_variation = tv.result();
    out.twice_total = 2.0 * L(L.size() - 1);
    return out;
}

double projection_gap(const ManifoldModel& model, const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
    if (A.rows() != B.rows() || A.cols() != B.cols()) throw ArgumentError("path grids differ");
    double gap = 0.0;
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        const Point a = A.row(i).transpose();
        const Point b = B.row(i).transpose();
        if (boundary_distance(model, a) >= model.tubular_radius || boundary_distance(model, b) >= model.tubular_radius) {
            continue;
        }
        gap = std::max(gap, chart_distance(model, boundary_projection(model, a), boundary_projection(model, b)));
    }
    return gap;
}

std::vector<MCEstimate> projection_convergence(const ManifoldModel& model, const std::vector<double>& a_grid,
                                               const Point& x0, const TimeGrid& grid, std::size_t n_paths,
                                               std::uint64_t seed, unsigned threads) {
    require_decreasing(a_grid, "a-grid");
    if (n_paths < 2) throw ArgumentError("need at least two paths");
    const std::size_t na = a_grid.size();
    const Eigen::MatrixXd s =
        detail::sample_rows(n_paths, static_cast<Eigen::Index>(na), threads, [&](std::size_t k) {
            const DriverPath driver = DriverPath::generate(rng::path_seed(seed, k), grid, model.frame_count);
            const ReflectedPath ref = integrate_reflected(model, x0, driver, grid);
            Eigen::VectorXd out(na);
            for (std::size_t j = 0; j < na; ++j) {
                const PenalizedPath pen = integrate_penalized(model, a_grid[j], x0, driver, grid);
                out(static_cast<Eigen::Index>(j)) = projection_gap(model, pen.points, ref.points);
            }
            return out;
        });
    std::vector<MCEstimate> out;
    for (std::size_t j = 0; j < na; ++j) out.push_back(summarize(s.col(static_cast<Eigen::Index>(j)), 0));
    return out;
}

std::vector<ResultRow> run_experiment(const ExperimentConfig& config) {
    config.validate();
    const ManifoldModel model = ManifoldModel::parse(config.model);
    RowSink sink(config.kind, config.digest());
    experiments().at(config.kind)(config, model, sink);
    std::vector<ResultRow> rows = sink.take();
    std::stable_sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
        return std::tie(a.statistic, a.parameters) < std::tie(b.statistic, b.parameters);
    });
    return rows;
}

std::string render_csv(const std::vector<ResultRow>& rows) {
    std::string out = "schema_version,digest,experiment,parameters,statistic,value,std_error,q25,median,q75\n";
    for (const ResultRow& r : rows) {
        out += std::to_string(r.schema_version) + "," + hex_digest(r.digest) + "," + r.experiment + "," +
               r.parameters + "," + r.statistic + "," + csv_number(r.value) + "," + csv_number(r.std_error) + "," +
               csv_number(r.q25) + "," + csv_number(r.median) + "," + csv_number(r.q75) + "\n";
    }
    return out;
}

std::string render_json(const std::vector<ResultRow>& rows) {
    auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
    nlohmann::json arr = nlohmann::json::array();
    for (const ResultRow& r : rows) {
        arr.push_back({{"schema_version", r.schema_version},
                       {"digest", hex_digest(r.digest)},
                       {"experiment", r.experiment},
                       {"parameters", r.parameters},
                       {"statistic", r.statistic},
                       {"value", num(r.value)},
                       {"std_error", num(r.std_error)},
                       {"q25", num(r.q25)},
                       {"median", num(r.median)},
                       {"q75", num(r.q75)}});
    }
    return nlohmann::json{{"schema_version", kSchemaVersion}, {"rows", arr}}.dump(2) + "\n";
}

std::vector<ResultRow> parse_csv(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    if (!std::getline(in, line) || line.rfind("schema_version,", 0) != 0) {
        throw ArgumentError("not a results CSV: missing header");
    }
    auto cell = [](const std::string& s) { return s.empty() ? kNaN : parse_double(s); };
    std::vector<ResultRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string item;
        while (std::getline(ss, item, ',')) f.push_back(item);
        if (!line.empty() && line.back() == ',') f.emplace_back();
        if (f.size() != 10) throw ArgumentError("results CSV row has " + std::to_string(f.size()) + " fields");
        ResultRow r;
        r.schema_version = static_cast<int>(parse_unsigned(f[0]));
        r.digest = std::stoull(f[1], nullptr, 16);
        r.experiment = f[2];
        r.parameters = f[3];
        r.statistic = f[4];
        r.value = cell(f[5]);
        r.std_error = cell(f[6]);
        r.q25 = cell(f[7]);
        r.median = cell(f[8]);
        r.q75 = cell(f[9]);
        rows.push_back(std::move(r));
    }
    return rows;
}

void write_report(const std::vector<ResultRow>& rows, const std::string& format, const std::string& path) {
    std::string text;
    if (format == "csv") {
        text = render_csv(rows);
    } else if (format == "json") {
        text = render_json(rows);
    } else {
        throw ArgumentError("format must be csv or json");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << text;
    if (!out) throw IoError("failed writing " + path);
}

const ResultRow& find_row(const std::vector<ResultRow>& rows, std::string_view statistic,
                          std::string_view parameters) {
    for (const ResultRow& r : rows) {
        if (r.statistic == statistic && r.parameters == parameters) return r;
    }
    throw ArgumentError("no row " + std::string(statistic) + " [" + std::string(parameters) + "]");
}

}  // namespace rbm
