#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"

#include "paofed/convergence_analysis.hpp"
#include "paofed/experiment_config.hpp"
#include "paofed/fed_algorithms.hpp"
#include "paofed/rff_feature_map.hpp"
#include "paofed/stream_data.hpp"

namespace paofed {

/// ||y - Z w||^2 / T for the mapped test inputs Z.
double mse_test(const Eigen::VectorXd& w, const TestSet& test);

/// Same value through precomputed moments, O(D^2) per model:
/// w^T G w - 2 w^T c + y^T y / T with G = Z^T Z / T and c = Z^T y / T.
class MseEvaluator {
public:
    explicit MseEvaluator(const TestSet& test);
    double operator()(const Eigen::VectorXd& w) const;

private:
    Eigen::MatrixXd gram_;
    Eigen::VectorXd cross_;
    double energy_ = 0.0;
};

/// Shared, run-independent inputs of an experiment: the feature map and the
/// test set (and, for CSV sources, the stream itself).
struct ExperimentSetup {
    FeatureMap feature_map;
    TestSet test;
    StreamConfig stream;
    std::shared_ptr<const StreamPlan> fixed_plan;  // set for CSV sources
};

ExperimentSetup prepare_experiment(const ExperimentConfig& config);

/// Kernel width actually used: the configured one or the median heuristic on
/// 256 inputs drawn like the stream.
double resolve_kernel_width(const ExperimentConfig& config);

std::unique_ptr<FederatedAlgorithm> make_algorithm(const std::string& id,
                                                   const ExperimentConfig& config,
                                                   std::uint64_t run_seed);

/// Availability model of the config: per data group, clients are spread over
/// the availability groups.
AvailabilityModel availability_of(const ExperimentConfig& config);
DelayModel delay_of(const ExperimentConfig& config);

struct AlgorithmCurve {
    std::string id;
    double step_size = 0.0;
    /// Monte-Carlo mean of the linear MSE-test after each iteration.
    std::vector<double> mse;
    /// Monte-Carlo mean of the cumulative counters after each iteration.
    std::vector<double> uplink_params;
    std::vector<double> downlink_params;
    double uplink_messages = 0.0;  // run mean, end of horizon
    double downlink_messages = 0.0;

    double mse_db(std::size_t iteration) const;
    /// dB of the mean linear MSE over the last max(1, N/20) iterations.
    double final_mse_db() const;
    /// Uplink parameters per uplink message over the model size.
    double comm_ratio(int dim) const;
};

struct ExperimentResult {
    ExperimentConfig config;
    double kernel_width = 0.0;
    std::vector<AlgorithmCurve> curves;

    const AlgorithmCurve& curve(std::string_view id) const;
};

struct RunOptions {
    /// Called with the run index after each Monte-Carlo run completes.
    std::function<void(int)> progress;
};

/// Monte-Carlo runs with common random numbers: in run r every algorithm
/// sees the same data stream and environment trace, all derived from
/// (seed, r). Runs are spread over config.threads workers and merged in run
/// order, so the result does not depend on the thread count.
ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

/// Rows "algorithm,iteration,mse_test_db,uplink_params,downlink_params";
/// counters are the Monte-Carlo means rounded to the nearest integer.
std::string curve_csv(const AlgorithmCurve& curve);

struct StabilityInfo {
    double max_eigenvalue = 0.0;
    double mu_bound_mean = 0.0;
    double mu_bound_ms = 0.0;
};

/// Step-size bounds from the empirical input correlation (10^5 samples).
StabilityInfo stability_info(const ExperimentConfig& config, const FeatureMap& fm);

nlohmann::json summary_json(const ExperimentResult& result, const StabilityInfo& stability);

/// Writes <output_dir>/<id>.csv per algorithm and <output_dir>/summary.json.
void write_outputs(const ExperimentResult& result, const StabilityInfo& stability);

struct SweepRow {
    std::string value;
    std::string algorithm;
    double final_mse_db = 0.0;
    double comm_ratio = 0.0;
    double step_size = 0.0;
    /// Step size below the mean-square bound 1 / max lambda.
    bool within_bound = false;
    /// Final MSE-test is finite and not above the first-iteration value.
    bool converged = false;
};

struct SweepResult {
    std::string parameter;
    std::vector<ExperimentResult> runs;
    std::vector<SweepRow> rows;
};

/// Names accepted by apply_parameter / sweep.
const std::vector<std::string>& sweep_parameters();

/// Returns a copy of `config` with `parameter` set to `value`; "mu" sets the
/// step size of every listed algorithm.
ExperimentConfig apply_parameter(const ExperimentConfig& config, const std::string& parameter,
                                 const std::string& value);

SweepResult sweep(const ExperimentConfig& config, const std::string& parameter,
                  const std::vector<std::string>& values, const RunOptions& options = {});

std::string sweep_csv(const SweepResult& result);

/// Baseline step sizes chosen to give the same initial convergence as a
/// reference PAO-Fed variant. The speed of a curve is the first iteration at
/// which its MSE-test is 3 dB below that of the zero model; for each baseline
/// the grid value mu_ref * factor (kept below the mean-square bound) with the
/// closest speed is picked. When two neighbouring grid values bracket the
/// reference speed without matching it, the interval is bisected (in log mu)
/// up to `refine_steps` times. `matched` tells whether the pick lands within
/// `tolerance` (relative) of the reference; algorithms that cannot get there
/// keep their closest value.
struct CalibrationOptions {
    std::string reference = "pao-u1";
    int monte_carlo = 10;
    double drop_db = 3.0;
    double tolerance = 0.1;
    std::vector<double> factors{0.1, 0.15, 0.25, 0.35, 0.5, 0.7, 1.0, 1.4, 2.0, 2.8, 4.0};
    int refine_steps = 8;
};

struct CalibrationPoint {
    double step_size = 0.0;
    int crossing = -1;  // -1: never crossed within the horizon
};

struct CalibrationResult {
    int reference_crossing = -1;
    std::map<std::string, double> step_sizes;
    std::map<std::string, bool> matched;
    std::map<std::string, std::vector<CalibrationPoint>> grid;
};

/// First iteration whose MSE-test is at least `drop_db` below `initial_mse`,
/// or -1.
int crossing_iteration(const AlgorithmCurve& curve, double initial_mse, double drop_db);

CalibrationResult calibrate_step_sizes(const ExperimentConfig& config,
                                       const CalibrationOptions& options = {});

/// Copy of `config` using the calibrated step sizes.
ExperimentConfig with_step_sizes(const ExperimentConfig& config, const CalibrationResult& calibration);

/// Theory inputs derived from a config: every client receives a sample at
/// every iteration; w_star is the least-squares fit of the target on the
/// features and the noise variance absorbs the fit residual.
struct TheoryInputs {
    ExtendedSystem system;
    Eigen::VectorXd w_star;
    double step_size = 0.0;
    std::string algorithm;
};

TheoryInputs theory_inputs(const ExperimentConfig& config, const std::string& algorithm,
                           int correlation_samples = 100000);

}  // namespace paofed
