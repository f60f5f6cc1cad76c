#include "rbm/damped.hpp"

#include <cmath>

#include "rbm/errors.hpp"

namespace rbm {

namespace {

double op_norm(const Eigen::MatrixXd& M) {
    if (M.size() == 1) return std::abs(M(0, 0));
    return Eigen::JacobiSVD<Eigen::MatrixXd>(M).singularValues()(0);
}

// Pulled-back geometric data at node i.
struct NodeData {
    Eigen::VectorXd n;
    Eigen::MatrixXd ric;
    Eigen::MatrixXd shape;
};

NodeData node_data(const ManifoldModel& model, const Eigen::MatrixXd& points, const TransportFrame& frame,
                   std::size_t i) {
    const Point y = points.row(static_cast<Eigen::Index>(i)).transpose();
    const Eigen::MatrixXd& P = frame.P[i];
    return {P.transpose() * normal_field(model, y), P.transpose() * ricci_matrix(model, y) * P,
            P.transpose() * shape_matrix(model, y) * P};
}

void store(DampedState& s, const Eigen::MatrixXd& w, const Eigen::VectorXd& n) {
    Eigen::RowVectorXd f = n.transpose() * w;
    s.wT.push_back(w - n * f);
    s.f.push_back(std::move(f));
    s.n.push_back(n);
}

void check_frame(const Eigen::MatrixXd& points, const TransportFrame& frame) {
    if (frame.P.size() != static_cast<std::size_t>(points.rows())) {
        throw ArgumentError("transport frame and path differ in length");
    }
}

}  // namespace

DampedState damped_penalized(const ManifoldModel& model, double a, const PenalizedPath& path,
                             const TransportFrame& frame) {
    check_frame(path.points, frame);
    const int d = model.dim;
    const double h = path.grid.dt();
    DampedState s{DampedVariant::Penalized, a, 0.0, {}, {}, {}};
    Eigen::MatrixXd w = Eigen::MatrixXd::Identity(d, d);
    NodeData cur = node_data(model, path.points, frame, 0);
    store(s, w, cur.n);
    for (std::size_t i = 0; i + 1 < frame.P.size(); ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        const double dL = path.L_a(k + 1) - path.L_a(k);
        const Eigen::MatrixXd step = w - 0.5 * h * cur.ric * w - dL * cur.shape * w;
        // Exact integrating factor for the stiff normal damping -c_a f dt.
        const double decay = -std::expm1(-path.c_a_integral(k));
        w = step - decay * cur.n * (cur.n.transpose() * step);
        cur = node_data(model, path.points, frame, i + 1);
        store(s, w, cur.n);
    }
    return s;
}

DampedState damped_eps(const ManifoldModel& model, const ReflectedPath& path, const TransportFrame& frame,
                       double eps, double eta) {
    check_frame(path.points, frame);
    const int d = model.dim;
    const double h = path.grid.dt();
    const ExcursionSet ex = excursions(path, eps, eta);
    std::vector<std::uint8_t> jump(frame.P.size(), 0);
    for (std::size_t r : ex.right_ends) jump[r] = 1;

    DampedState s{DampedVariant::EpsJump, eps, eta, {}, {}, {}};
    Eigen::MatrixXd w = Eigen::MatrixXd::Identity(d, d);
    NodeData cur = node_data(model, path.points, frame, 0);
    store(s, w, cur.n);
    for (std::size_t i = 0; i + 1 < frame.P.size(); ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        const double dL = path.L(k + 1) - path.L(k);
        w = w - 0.5 * h * cur.ric * w - dL * cur.shape * w;
        cur = node_data(model, path.points, frame, i + 1);
        if (jump[i + 1]) {
            w -= cur.n * (cur.n.transpose() * w);
            s.wT.push_back(w);
            s.f.push_back(Eigen::RowVectorXd::Zero(d));
            s.n.push_back(cur.n);
        } else {
            store(s, w, cur.n);
        }
    }
    return s;
}

DampedLimit damped_limit(const ManifoldModel& model, const ReflectedPath& path, const TransportFrame& frame,
                         double eps0, int levels, double eta) {
    if (levels < 2) throw ArgumentError("the limit needs at least two levels");
    if (!(eps0 > 0.0)) throw ArgumentError("initial excursion size must be positive");
    DampedLimit out;
    DampedState prev;
    for (int lvl = 0; lvl < levels; ++lvl) {
        const double eps = std::ldexp(eps0, -lvl);
        DampedState cur = damped_eps(model, path, frame, eps, eta);
        out.report.epsilons.push_back(eps);
        const ExcursionSet ex = excursions(path, eps, eta);
        double covered = 0.0;
        for (auto [l, r] : ex.intervals) covered += path.grid.time(r) - path.grid.time(l);
        out.report.uncovered_time.push_back(path.grid.T - covered);
        if (lvl > 0) {
            double gap = 0.0;
            for (std::size_t i = 0; i < cur.size(); ++i) gap = std::max(gap, op_norm(cur.w(i) - prev.w(i)));
            if (!out.report.gaps.empty() && gap > 2.0 * out.report.gaps.back() + 1e-12) out.report.monotone = false;
            out.report.gaps.push_back(gap);
        }
        prev = std::move(cur);
    }
    out.state = std::move(prev);
    out.state.variant = DampedVariant::Limit;
    return out;
}

double normal_part_formula_check(const ManifoldModel& model, const ReflectedPath& path,
                                 const TransportFrame& frame, const DampedState& state) {
    check_frame(path.points, frame);
    if (state.variant == DampedVariant::Penalized) throw ArgumentError("normal-part formula needs a jump variant");
    const double h = path.grid.dt();
    const std::vector<std::uint8_t> flags = contact_flags(path, state.eta);
    std::vector<Eigen::RowVectorXd> r;
    r.reserve(state.size());
    // r_0 = <W_0, nu>; dr = -1/2 Ric(W, nu) dt + <W, d nu> in pulled-back form.
    r.push_back(state.n[0].transpose() * state.w(0));
    for (std::size_t i = 0; i + 1 < state.size(); ++i) {
        const Point y = path.points.row(static_cast<Eigen::Index>(i)).transpose();
        const Eigen::MatrixXd ric = frame.P[i].transpose() * ricci_matrix(model, y) * frame.P[i];
        const Eigen::MatrixXd w = state.w(i);
        r.push_back(r.back() - 0.5 * h * state.n[i].transpose() * ric * w +
                    (state.n[i + 1] - state.n[i]).transpose() * w);
    }
    double worst = 0.0;
    std::optional<std::size_t> alpha;
    for (std::size_t i = 0; i < state.size(); ++i) {
        if (flags[i]) alpha = i;
        const Eigen::RowVectorXd target = alpha ? Eigen::RowVectorXd(r[i] - r[*alpha]) : r[i];
        worst = std::max(worst, (state.f[i] - target).norm());
    }
    return worst;
}

std::vector<Vector> damped_images(const ManifoldModel& model, const ReflectedPath& path, const Vector& v, double eps,
                                  double eta) {
    if (v.size() != model.dim) throw ArgumentError("vector dimension does not match the model");
    const std::size_t n = static_cast<std::size_t>(path.points.rows());
    std::vector<Vector> out;
    out.reserve(n);
    if (model.flat_boundary() && eps == 0.0 && eta == 0.0) {
        // Every contact run closes an excursion; only the first erasure of the normal part matters.
        const std::vector<std::uint8_t> flags = contact_flags(path, 0.0);
        Vector erased = v;
        erased(model.dim - 1) = 0.0;
        bool jumped = false;
        for (std::size_t i = 0; i < n; ++i) {
            if (i > 0 && flags[i] && !flags[i - 1]) jumped = true;
            out.push_back(jumped ? erased : v);
        }
        return out;
    }
    const TransportFrame frame = parallel_transport(model, path.points);
    const DampedState state = damped_eps(model, path, frame, eps, eta);
    for (std::size_t i = 0; i < n; ++i) out.push_back(state.chart(frame, i) * v);
    return out;
}

Eigen::VectorXd damped_norm_bound(const ManifoldModel& model, const PenalizedPath& path) {
    const auto n = path.points.rows();
    Eigen::VectorXd out(n);
    const double h = path.grid.dt();
    double expo = 0.0;
    out(0) = 1.0;
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
        const Point y = path.points.row(i).transpose();
        expo += ricci_lower_bound(model, y) * h + 2.0 * shape_lower_bound(model, y) * (path.L_a(i + 1) - path.L_a(i));
        out(i + 1) = std::exp(-expo);
    }
    return out;
}

Eigen::VectorXd damped_norms(const DampedState& state) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(state.size()));
    for (std::size_t i = 0; i < state.size(); ++i) out(static_cast<Eigen::Index>(i)) = op_norm(state.w(i));
    return out;
}

}  // namespace rbm
