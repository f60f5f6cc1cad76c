// rbmsim: simulate reflected and penalized paths, run convergence sweeps and
// representation-formula checks, and render result tables.

#include <CLI11.hpp>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "rbm/errors.hpp"
#include "rbm/harness.hpp"
#include "rbm/penalized.hpp"
#include "rbm/reflected.hpp"
#include "rbm/rng.hpp"

namespace {

constexpr int kArgumentExit = 2;
constexpr int kNumericExit = 3;
constexpr int kIoExit = 4;

// Flags shared by all subcommands; unset flags leave the config file value.
struct CommonFlags {
    std::string config;
    std::map<std::string, std::string> given;

    void add(CLI::App* app, bool with_kind) {
        app->add_option("--config", config, "key=value config file; flags override it");
        if (with_kind) option(app, "--kind", "kind", "experiment kind");
        option(app, "--model", "model", "half-line | half-space:d=N | disk | cap:theta0=X");
        option(app, "--T", "T", "time horizon");
        option(app, "--steps", "steps", "number of time steps");
        option(app, "--a", "a", "single penalization parameter");
        option(app, "--a-grid", "a-grid", "comma-separated decreasing a values");
        option(app, "--eps-grid", "eps-grid", "comma-separated decreasing excursion sizes");
        option(app, "--eta", "eta", "contact threshold (negative: sqrt(dt))");
        option(app, "--paths", "paths", "number of drivers");
        option(app, "--p", "p", "comma-separated moment exponents");
        option(app, "--seed", "seed", "master seed");
        option(app, "--field", "field", "scalar field name");
        option(app, "--x0", "x0", "comma-separated start point");
        option(app, "--threads", "threads", "worker threads (0: all cores)");
        option(app, "--out", "out", "output file (default: stdout)");
        option(app, "--format", "format", "csv | json")->check(CLI::IsMember({"csv", "json"}));
    }

    CLI::Option* option(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
        return app->add_option_function<std::string>(
            flag, [this, key](const std::string& v) { given[key] = v; }, help);
    }

    rbm::ExperimentConfig resolve() const {
        rbm::ExperimentConfig c = config.empty() ? rbm::ExperimentConfig{} : rbm::ExperimentConfig::load(config);
        for (const auto& [k, v] : given) c.set(k, v);
        return c;
    }
};

void emit(const std::string& text, const std::string& path) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw rbm::IoError("cannot open " + path + " for writing");
    out << text;
    if (!out) throw rbm::IoError("failed writing " + path);
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string hex(std::uint64_t d) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(d));
    return buf;
}

// One path of the reflected process, or of the penalized process when --a is given.
std::string simulate(const rbm::ExperimentConfig& c, bool penalized) {
    c.validate();
    const rbm::ManifoldModel model = rbm::ManifoldModel::parse(c.model);
    const rbm::TimeGrid grid = c.grid();
    const rbm::DriverPath driver =
        rbm::DriverPath::generate(rbm::rng::path_seed(c.seed, 0), grid, model.frame_count);
    const rbm::Point x = c.start(model);
    Eigen::MatrixXd points;
    Eigen::VectorXd R;
    Eigen::VectorXd L;
    std::string ltname = "L";
    if (penalized) {
        const rbm::PenalizedPath p = rbm::integrate_penalized(model, c.a_grid.front(), x, driver, grid);
        points = p.points;
        R = p.R_values;
        L = p.L_a;
        ltname = "L_a";
    } else {
        const rbm::ReflectedPath p =
            rbm::integrate_reflected(model, x, driver, grid, {rbm::ReflectionScheme::Projection, c.contact_threshold()});
        points = p.points;
        R = p.R_values;
        L = p.L;
    }
    if (c.format == "json") {
        nlohmann::json rows = nlohmann::json::array();
        for (Eigen::Index i = 0; i < points.rows(); ++i) {
            std::vector<double> xs;
            for (Eigen::Index k = 0; k < points.cols(); ++k) xs.push_back(points(i, k));
            rows.push_back({{"node", i}, {"t", grid.time(static_cast<std::size_t>(i))}, {"x", xs}, {"R", R(i)}, {ltname, L(i)}});
        }
        nlohmann::json doc{{"model", model.name()}, {"seed", c.seed}, {"digest", hex(c.digest())}, {"path", rows}};
        if (penalized) doc["a"] = c.a_grid.front();
        return doc.dump(2) + "\n";
    }
    std::ostringstream os;
    os << "node,t";
    for (Eigen::Index k = 0; k < points.cols(); ++k) os << ",x" << k + 1;
    os << ",R," << ltname << "\n";
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        os << i << "," << num(grid.time(static_cast<std::size_t>(i)));
        for (Eigen::Index k = 0; k < points.cols(); ++k) os << "," << num(points(i, k));
        os << "," << num(R(i)) << "," << num(L(i)) << "\n";
    }
    return os.str();
}

std::string render(const std::vector<rbm::ResultRow>& rows, const std::string& format) {
    return format == "json" ? rbm::render_json(rows) : rbm::render_csv(rows);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw rbm::IoError("cannot read " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Reflected Brownian motion, penalization and damped transport experiments"};
    app.require_subcommand(1);

    CommonFlags sim_flags;
    CLI::App* sim = app.add_subcommand("simulate", "dump one reflected (or, with --a, penalized) path");
    sim_flags.add(sim, false);

    CommonFlags sweep_flags;
    CLI::App* sweep = app.add_subcommand("sweep", "run a convergence experiment and write its table");
    sweep_flags.add(sweep, true);

    CommonFlags verify_flags;
    CLI::App* verify = app.add_subcommand("verify", "check representation formulas against their oracles");
    verify_flags.add(verify, false);

    std::string report_in;
    std::string report_out;
    std::string report_format = "json";
    CLI::App* report = app.add_subcommand("report", "render a results CSV as csv or json");
    report->add_option("--in", report_in, "results CSV")->required();
    report->add_option("--out", report_out, "output file (default: stdout)");
    report->add_option("--format", report_format, "csv | json")->check(CLI::IsMember({"csv", "json"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kArgumentExit;
    }

    try {
        if (*sim) {
            const rbm::ExperimentConfig c = sim_flags.resolve();
            emit(simulate(c, sim_flags.given.contains("a")), c.out);
        } else if (*sweep) {
            const rbm::ExperimentConfig c = sweep_flags.resolve();
            emit(render(rbm::run_experiment(c), c.format), c.out);
        } else if (*verify) {
            rbm::ExperimentConfig c = verify_flags.resolve();
            c.kind = "verify";
            const std::vector<rbm::ResultRow> rows = rbm::run_experiment(c);
            for (const rbm::ResultRow& r : rows) {
                const std::string& s = r.statistic;
                if (s.size() > 2 && s.compare(s.size() - 2, 2, "_z") == 0) {
                    std::cerr << (std::abs(r.value) <= 3.0 ? "ok   " : "off  ") << s.substr(0, s.size() - 2)
                              << " z=" << r.value << "\n";
                }
            }
            emit(render(rows, c.format), c.out);
        } else if (*report) {
            emit(render(rbm::parse_csv(read_file(report_in)), report_format), report_out);
        }
    } catch (const rbm::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kIoExit;
    } catch (const rbm::NumericError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kNumericExit;
    } catch (const rbm::IntegrationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kNumericExit;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kArgumentExit;
    }
    return 0;
}
