#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "rbm/estimators.hpp"
#include "rbm/geometry.hpp"
#include "rbm/penalized.hpp"

namespace rbm {

inline constexpr int kSchemaVersion = 1;

/// Experiment kinds accepted by run_experiment.
std::vector<std::string> experiment_kinds();

struct ExperimentConfig {
    std::string kind = "halfline";
    std::string model = "half-line";
    double T = 1.0;
    std::size_t N = 1000;
    std::vector<double> a_grid{0.1, 0.05, 0.025, 0.0125};
    std::vector<double> eps_grid{0.2, 0.1, 0.05, 0.025};
    double eta = -1.0;  // negative selects sqrt(dt)
    std::size_t n_paths = 100;
    std::vector<double> p{2.0};
    std::uint64_t seed = 1;
    std::string field = "gauss";
    std::vector<double> x0;  // empty selects the model's default start
    std::string out;
    std::string format = "csv";
    unsigned threads = 0;

    /// Sets one field from its textual key and value; throws ArgumentError on unknown keys.
    void set(std::string_view key, std::string_view value);
    /// Parses key=value lines; '#' starts a comment.
    static ExperimentConfig parse(std::string_view text);
    static ExperimentConfig load(const std::string& path);

    void validate() const;
    TimeGrid grid() const { return {T, N}; }
    double contact_threshold() const;
    Point start(const ManifoldModel& m) const;
    /// Sorted key=value listing of every field that affects results.
    std::string canonical() const;
    std::uint64_t digest() const;
};

struct ResultRow {
    int schema_version = kSchemaVersion;
    std::uint64_t digest = 0;
    std::string experiment;
    std::string parameters;  // e.g. "a=0.05" or "eps=0.1->0.05"
    std::string statistic;
    double value = 0.0;      // mean over drivers, or the statistic itself
    double std_error = 0.0;  // NaN when not applicable
    double q25 = 0.0;        // quartiles over drivers, NaN when not applicable
    double median = 0.0;
    double q75 = 0.0;
};

/// Mean of sup_i rho(A_i, B_i)^p over coupled path pairs (rows are nodes).
MCEstimate sp_distance(const ManifoldModel& model, const std::vector<Eigen::MatrixXd>& A,
                       const std::vector<Eigen::MatrixXd>& B, double p);

struct LocalTimeTV {
    double sup_gap = 0.0;
    double total_variation = 0.0;  // sum_i |dL_i - dL^a_i|
    double twice_total = 0.0;      // 2 L_T
};

LocalTimeTV local_time_tv(const Eigen::VectorXd& L, const Eigen::VectorXd& La);

/// sup over nodes where both paths lie in the tubular zone of |pi(A_i) - pi(B_i)|.
double projection_gap(const ManifoldModel& model, const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);

/// E sup |pi(Y^a) - pi(Y)| per a on coupled paths.
std::vector<MCEstimate> projection_convergence(const ManifoldModel& model, const std::vector<double>& a_grid,
                                               const Point& x0, const TimeGrid& grid, std::size_t n_paths,
                                               std::uint64_t seed, unsigned threads = 0);

std::vector<ResultRow> run_experiment(const ExperimentConfig& config);

std::string render_csv(const std::vector<ResultRow>& rows);
std::string render_json(const std::vector<ResultRow>& rows);
/// Reads a CSV written by render_csv.
std::vector<ResultRow> parse_csv(std::string_view text);

/// Writes rows in "csv" or "json"; throws IoError naming the path on failure.
void write_report(const std::vector<ResultRow>& rows, const std::string& format, const std::string& path);

/// Finds the row with the given statistic and parameters; throws ArgumentError if absent.
const ResultRow& find_row(const std::vector<ResultRow>& rows, std::string_view statistic,
                          std::string_view parameters = {});

}  // namespace rbm
