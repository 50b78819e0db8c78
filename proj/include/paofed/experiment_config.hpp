#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace paofed {

/// Every experiment parameter. Defaults reproduce the full-scale default
/// asynchronous setup; the on-disk form is an INI file (see README).
struct ExperimentConfig {
    // [experiment]
    std::uint64_t seed = 1;
    int monte_carlo = 50;
    int threads = 1;
    std::string output_dir = "results";
    std::vector<std::string> algorithms{"pao-u2", "pao-u1", "online-fedsgd", "online-fed", "pso-fed"};
    int horizon = 2000;
    int test_size = 2000;

    // [model]
    int clients = 256;
    int rff_dim = 200;
    int input_dim = 4;
    int mask_size = 4;
    double kernel_width = 0.0;  // 0: median heuristic
    std::uint64_t feature_seed = 7;

    // [data]
    std::vector<int> group_sizes{500, 1000, 1500, 2000};
    double noise_variance = 1e-2;
    std::string source = "synthetic";  // or "csv"
    std::string csv_path;
    std::vector<std::string> csv_features;
    std::string csv_target;
    std::string csv_normalization = "z-score";
    double csv_test_fraction = 0.1;

    // [environment]
    std::vector<double> availability{0.25, 0.1, 0.025, 0.005};
    double delay_tail = 0.2;
    int max_delay = 10;
    int delay_step = 1;
    bool full_downlink = false;

    // [aggregation]
    double weight_base = 0.2;
    std::string tie_rule = "keep-all";

    // [learning_rates]: algorithm id -> step size; missing ids use
    // default_step_size().
    std::map<std::string, double> learning_rates;

    // [baselines]
    int subset_size = 0;  // 0: ceil(K m / D), the PAO-Fed uplink budget
    std::string pso_coordination = "coordinated";

    /// Throws ConfigError listing every violated constraint.
    void validate() const;

    double step_size(const std::string& algorithm) const;
    int effective_subset_size() const;
};

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> problems);
    const std::vector<std::string>& problems() const { return problems_; }

private:
    std::vector<std::string> problems_;
};

/// "pao-c0".."pao-u2", "online-fed", "online-fedsgd", "pso-fed".
const std::vector<std::string>& known_algorithms();
bool is_known_algorithm(std::string_view id);
double default_step_size(std::string_view algorithm);

ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& ini_text);
std::string to_ini(const ExperimentConfig& config);

/// Named setups: "default-async", "heavy-delay", "sparse-participation",
/// "full-downlink", "ideal". `scale` multiplies K, the group sample counts
/// and the horizon; counts are rounded to nearest with halves rounded down.
ExperimentConfig preset(std::string_view name, double scale = 1.0);
const std::vector<std::string>& preset_names();

/// round-half-down(value * scale), at least 1.
int scale_count(int value, double scale);

}  // namespace paofed
