#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "paofed/rff_feature_map.hpp"

namespace paofed {

/// y = sqrt(x1^2 + sin^2(pi x4)) + (0.8 - 0.5 exp(-x2^2) x3) + noise, with
/// the coordinates 1-indexed as usual. Requires exactly four inputs.
double synth_target(std::span<const double> x, double noise);

struct SampleEvent {
    int client_id = 0;
    int iteration = 0;
    Eigen::VectorXd input;
    double target = 0.0;
};

/// Maps an input and a noise draw to a target value.
using TargetFunction = std::function<double(const Eigen::VectorXd&, double)>;

struct StreamConfig {
    int clients = 256;
    /// Samples received by each client of a data group over the horizon.
    std::vector<int> group_sizes{500, 1000, 1500, 2000};
    int horizon = 2000;
    int input_dim = 4;
    double noise_variance = 1e-2;
    double input_low = -1.0;
    double input_high = 1.0;
};

/// Per-client arrival schedule. Immutable once built.
struct StreamPlan {
    std::vector<std::vector<SampleEvent>> clients;
    /// Per-client sample count of every data group.
    std::vector<int> group_sizes;
    int horizon = 0;

    int client_count() const { return static_cast<int>(clients.size()); }
    int data_group(int client) const;
    std::size_t total_samples() const;
    /// Deterministic text rendering, one event per line.
    std::string dump() const;
};

/// Iterations at which a client with `count` samples over `horizon`
/// iterations receives data: floor(i * horizon / count), i < count.
std::vector<int> arrival_iterations(int count, int horizon);

/// Synthetic stream: inputs i.i.d. uniform on [input_low, input_high]^L,
/// targets from `target` (default synth_target) with Gaussian noise.
/// Throws std::invalid_argument when the clients do not split evenly into
/// the data groups or a group exceeds the horizon.
StreamPlan build_stream_plan(const StreamConfig& config, std::uint64_t seed,
                             const TargetFunction& target = {});

struct TestSet {
    Eigen::MatrixXd inputs;   // T x L
    Eigen::VectorXd targets;  // T
    Eigen::MatrixXd mapped;   // T x D, row i = map(inputs row i)

    int size() const { return static_cast<int>(targets.size()); }
};

TestSet make_test_set(const FeatureMap& fm, Eigen::MatrixXd inputs,
                      Eigen::VectorXd targets);

/// Noiseless synthetic test set of `size` samples drawn like the stream inputs.
TestSet build_test_set(const FeatureMap& fm, const StreamConfig& config,
                       int size, std::uint64_t seed,
                       const TargetFunction& target = {});

class DataError : public std::runtime_error {
public:
    enum class Kind { file_not_found, missing_column, no_usable_rows, malformed };
    DataError(Kind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

enum class Normalization { none, min_max, z_score };

struct CsvStreamOptions {
    std::string path;
    std::vector<std::string> feature_columns;
    std::string target_column;
    Normalization normalization = Normalization::min_max;
    double test_fraction = 0.1;
    int clients = 256;
    /// Relative sample share per data group; clients split evenly over groups.
    std::vector<int> group_weights{500, 1000, 1500, 2000};
};

struct CsvDataset {
    StreamPlan plan;
    Eigen::MatrixXd test_inputs;
    Eigen::VectorXd test_targets;
    std::size_t dropped_rows = 0;
};

/// Reads a headered CSV regression table, drops rows with missing or
/// non-numeric values, normalizes features, shuffles with `seed`, holds out
/// round(test_fraction * rows) test rows and spreads the rest over clients in
/// proportion to their group weights.
CsvDataset load_csv_stream(const CsvStreamOptions& options, std::uint64_t seed);

/// Parses RFC-4180 style CSV text into rows of fields.
std::vector<std::vector<std::string>> parse_csv(const std::string& text);

}  // namespace paofed
