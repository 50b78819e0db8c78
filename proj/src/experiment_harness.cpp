#include "paofed/experiment_harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "paofed/random.hpp"

namespace paofed {

namespace {

Normalization normalization_of(const std::string& name) {
    if (name == "none") return Normalization::none;
    if (name == "min-max") return Normalization::min_max;
    return Normalization::z_score;
}

StreamConfig stream_of(const ExperimentConfig& c) {
    StreamConfig s;
    s.clients = c.clients;
    s.group_sizes = c.group_sizes;
    s.horizon = c.horizon;
    s.input_dim = c.input_dim;
    s.noise_variance = c.noise_variance;
    return s;
}

double to_db(double mse) { return 10.0 * std::log10(mse); }

int crossing_iteration_of(const std::vector<CalibrationPoint>& points, double mu) {
    for (const auto& p : points)
        if (p.step_size == mu) return p.crossing;
    return -1;
}

struct RunOutput {
    std::vector<std::vector<double>> mse, uplink, downlink;
    std::vector<double> up_msgs, down_msgs;
};

RunOutput run_once(const ExperimentConfig& config, const ExperimentSetup& setup,
                   const MseEvaluator& eval, const AvailabilityModel& avail,
                   const DelayModel& delay, int run) {
    const std::uint64_t run_seed = derive_seed(config.seed, "mc_run", static_cast<std::uint64_t>(run));
    StreamPlan local_plan;
    const StreamPlan* plan = setup.fixed_plan.get();
    if (!plan) {
        local_plan = build_stream_plan(setup.stream, run_seed);
        plan = &local_plan;
    }
    const EnvironmentTrace trace = EnvironmentTrace::generate(*plan, avail, delay, run_seed);

    std::vector<std::unique_ptr<FederatedAlgorithm>> owned;
    std::vector<FederatedAlgorithm*> algos;
    for (const auto& id : config.algorithms) {
        owned.push_back(make_algorithm(id, config, run_seed));
        algos.push_back(owned.back().get());
    }
    const std::size_t a = algos.size();
    const std::size_t n = static_cast<std::size_t>(plan->horizon);
    RunOutput out;
    out.mse.assign(a, std::vector<double>(n));
    out.uplink.assign(a, std::vector<double>(n));
    out.downlink.assign(a, std::vector<double>(n));
    simulate(algos, *plan, trace, setup.feature_map, [&](int it) {
        const auto i = static_cast<std::size_t>(it);
        for (std::size_t j = 0; j < a; ++j) {
            out.mse[j][i] = eval(algos[j]->server_model());
            out.uplink[j][i] = static_cast<double>(algos[j]->counters().uplink_params);
            out.downlink[j][i] = static_cast<double>(algos[j]->counters().downlink_params);
        }
    });
    for (auto* alg : algos) {
        out.up_msgs.push_back(static_cast<double>(alg->counters().uplink_messages));
        out.down_msgs.push_back(static_cast<double>(alg->counters().downlink_messages));
    }
    return out;
}

}  // namespace

double mse_test(const Eigen::VectorXd& w, const TestSet& test) {
    if (w.size() != test.mapped.cols()) throw std::invalid_argument("model and test features differ in size");
    return (test.targets - test.mapped * w).squaredNorm() / test.size();
}

MseEvaluator::MseEvaluator(const TestSet& test) {
    const double t = test.size();
    gram_ = test.mapped.transpose() * test.mapped / t;
    cross_ = test.mapped.transpose() * test.targets / t;
    energy_ = test.targets.squaredNorm() / t;
}

double MseEvaluator::operator()(const Eigen::VectorXd& w) const {
    // Clamp the rounding residue of the expanded form at zero.
    return std::max(0.0, w.dot(gram_ * w) - 2.0 * w.dot(cross_) + energy_);
}

double resolve_kernel_width(const ExperimentConfig& config) {
    if (config.kernel_width > 0.0) return config.kernel_width;
    Rng rng = make_stream(config.feature_seed, "kernel_probe");
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::MatrixXd probe(256, config.input_dim);
    for (Eigen::Index i = 0; i < probe.rows(); ++i)
        for (Eigen::Index j = 0; j < probe.cols(); ++j) probe(i, j) = u(rng);
    return median_heuristic_width(probe);
}

ExperimentSetup prepare_experiment(const ExperimentConfig& config) {
    config.validate();
    const StreamConfig stream = stream_of(config);
    if (config.source == "csv") {
        CsvStreamOptions o;
        o.path = config.csv_path;
        o.feature_columns = config.csv_features;
        o.target_column = config.csv_target;
        o.normalization = normalization_of(config.csv_normalization);
        o.test_fraction = config.csv_test_fraction;
        o.clients = config.clients;
        o.group_weights = config.group_sizes;
        CsvDataset data = load_csv_stream(o, config.seed);
        double width = config.kernel_width;
        if (width <= 0.0) {
            const Eigen::Index rows = std::min<Eigen::Index>(256, data.test_inputs.rows());
            width = rows >= 2 ? median_heuristic_width(data.test_inputs.topRows(rows)) : 1.0;
        }
        FeatureMap fm = FeatureMap::build(config.feature_seed, config.input_dim, config.rff_dim, width);
        TestSet test = make_test_set(fm, std::move(data.test_inputs), std::move(data.test_targets));
        auto plan = std::make_shared<const StreamPlan>(std::move(data.plan));
        return ExperimentSetup{std::move(fm), std::move(test), stream, std::move(plan)};
    }
    FeatureMap fm = FeatureMap::build(config.feature_seed, config.input_dim, config.rff_dim,
                                      resolve_kernel_width(config));
    TestSet test = build_test_set(fm, stream, config.test_size, config.seed);
    return ExperimentSetup{std::move(fm), std::move(test), stream, nullptr};
}

AvailabilityModel availability_of(const ExperimentConfig& config) {
    return AvailabilityModel::grouped(config.clients, static_cast<int>(config.group_sizes.size()),
                                      config.availability);
}

DelayModel delay_of(const ExperimentConfig& config) {
    return DelayModel{config.delay_tail, config.max_delay, config.delay_step};
}

std::unique_ptr<FederatedAlgorithm> make_algorithm(const std::string& id,
                                                   const ExperimentConfig& config,
                                                   std::uint64_t run_seed) {
    const double mu = config.step_size(id);
    const std::uint64_t selection = derive_seed(run_seed, "selection:" + id);
    if (id.starts_with("pao-")) {
        VariantConfig v = VariantConfig::named(id.substr(4));
        v.weight_base = config.weight_base;
        v.full_downlink = config.full_downlink;
        v.tie_rule = config.tie_rule == "lowest-client" ? TieRule::lowest_client : TieRule::keep_all;
        return std::make_unique<PaoFed>(id, config.rff_dim, config.clients, config.mask_size, mu, v,
                                        config.max_delay);
    }
    if (id == "online-fed")
        return std::make_unique<OnlineFed>(id, config.rff_dim, config.clients, mu,
                                           config.effective_subset_size(), selection);
    if (id == "online-fedsgd")
        return std::make_unique<OnlineFed>(id, config.rff_dim, config.clients, mu, config.clients,
                                           selection);
    if (id == "pso-fed")
        return std::make_unique<PsoFed>(id, config.rff_dim, config.clients, config.mask_size, mu,
                                        config.effective_subset_size(),
                                        config.pso_coordination == "uncoordinated"
                                            ? Coordination::uncoordinated
                                            : Coordination::coordinated,
                                        selection);
    throw std::invalid_argument("unknown algorithm '" + id + "'");
}

double AlgorithmCurve::mse_db(std::size_t iteration) const { return to_db(mse.at(iteration)); }

double AlgorithmCurve::final_mse_db() const {
    if (mse.empty()) return std::nan("");
    const std::size_t window = std::max<std::size_t>(1, mse.size() / 20);
    double s = 0.0;
    for (std::size_t i = mse.size() - window; i < mse.size(); ++i) s += mse[i];
    return to_db(s / static_cast<double>(window));
}

double AlgorithmCurve::comm_ratio(int dim) const {
    if (uplink_messages <= 0.0 || uplink_params.empty()) return 0.0;
    return uplink_params.back() / uplink_messages / dim;
}

const AlgorithmCurve& ExperimentResult::curve(std::string_view id) const {
    for (const auto& c : curves)
        if (c.id == id) return c;
    throw std::out_of_range("no curve for algorithm '" + std::string(id) + "'");
}

ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options) {
    const ExperimentSetup setup = prepare_experiment(config);
    const MseEvaluator eval(setup.test);
    const AvailabilityModel avail = availability_of(config);
    const DelayModel delay = delay_of(config);
    const int runs = config.monte_carlo;

    std::vector<RunOutput> outputs(static_cast<std::size_t>(runs));
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (int r = next++; r < runs; r = next++) {
            try {
                outputs[static_cast<std::size_t>(r)] = run_once(config, setup, eval, avail, delay, r);
                if (options.progress) options.progress(r);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = runs;
            }
        }
    };
    const int threads = std::max(1, std::min(config.threads, runs));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);

    ExperimentResult result;
    result.config = config;
    result.kernel_width = setup.feature_map.kernel_width();
    const std::size_t n = outputs.front().mse.empty() ? 0 : outputs.front().mse.front().size();
    for (std::size_t j = 0; j < config.algorithms.size(); ++j) {
        AlgorithmCurve c;
        c.id = config.algorithms[j];
        c.step_size = config.step_size(c.id);
        c.mse.assign(n, 0.0);
        c.uplink_params.assign(n, 0.0);
        c.downlink_params.assign(n, 0.0);
        for (const auto& o : outputs) {
            for (std::size_t i = 0; i < n; ++i) {
                c.mse[i] += o.mse[j][i];
                c.uplink_params[i] += o.uplink[j][i];
                c.downlink_params[i] += o.downlink[j][i];
            }
            c.uplink_messages += o.up_msgs[j];
            c.downlink_messages += o.down_msgs[j];
        }
        for (std::size_t i = 0; i < n; ++i) {
            c.mse[i] /= runs;
            c.uplink_params[i] /= runs;
            c.downlink_params[i] /= runs;
        }
        c.uplink_messages /= runs;
        c.downlink_messages /= runs;
        result.curves.push_back(std::move(c));
    }
    return result;
}

std::string curve_csv(const AlgorithmCurve& c) {
    std::ostringstream o;
    o << "algorithm,iteration,mse_test_db,uplink_params,downlink_params\n";
    o.precision(10);
    for (std::size_t i = 0; i < c.mse.size(); ++i)
        o << c.id << "," << i << "," << to_db(c.mse[i]) << "," << std::llround(c.uplink_params[i]) << ","
          << std::llround(c.downlink_params[i]) << "\n";
    return o.str();
}

StabilityInfo stability_info(const ExperimentConfig& config, const FeatureMap& fm) {
    const Eigen::MatrixXd r = estimate_correlation(fm, stream_of(config), 100000, config.seed);
    const StepSizeBounds b = step_size_bounds({r});
    return StabilityInfo{b.max_eigenvalue, b.mean, b.mean_square};
}

nlohmann::json summary_json(const ExperimentResult& result, const StabilityInfo& stability) {
    const ExperimentConfig& c = result.config;
    nlohmann::json j;
    j["monte_carlo"] = c.monte_carlo;
    j["seed"] = c.seed;
    j["clients"] = c.clients;
    j["rff_dim"] = c.rff_dim;
    j["mask_size"] = c.mask_size;
    j["horizon"] = result.curves.empty() ? c.horizon : static_cast<int>(result.curves.front().mse.size());
    j["group_sizes"] = c.group_sizes;
    j["scaling_rule"] = "counts rounded to nearest, halves rounded down";
    j["kernel_width"] = result.kernel_width;
    j["final_window"] = "mean linear MSE over the last max(1, N/20) iterations";
    j["theory"] = {{"max_eigenvalue", stability.max_eigenvalue},
                   {"mu_bound_mean", stability.mu_bound_mean},
                   {"mu_bound_ms", stability.mu_bound_ms}};
    j["config_ini"] = to_ini(c);
    nlohmann::json algos = nlohmann::json::array();
    for (const auto& curve : result.curves) {
        nlohmann::json a;
        a["algorithm"] = curve.id;
        a["step_size"] = curve.step_size;
        a["within_ms_bound"] = curve.step_size < stability.mu_bound_ms;
        a["within_mean_bound"] = curve.step_size < stability.mu_bound_mean;
        a["final_mse_test_db"] = curve.final_mse_db();
        a["uplink_params"] = curve.uplink_params.empty() ? 0 : std::llround(curve.uplink_params.back());
        a["downlink_params"] = curve.downlink_params.empty() ? 0 : std::llround(curve.downlink_params.back());
        a["uplink_messages"] = curve.uplink_messages;
        a["downlink_messages"] = curve.downlink_messages;
        a["comm_ratio"] = curve.comm_ratio(c.rff_dim);
        algos.push_back(std::move(a));
    }
    j["algorithms"] = std::move(algos);
    return j;
}

void write_outputs(const ExperimentResult& result, const StabilityInfo& stability) {
    namespace fs = std::filesystem;
    const fs::path dir(result.config.output_dir);
    fs::create_directories(dir);
    for (const auto& c : result.curves) {
        std::ofstream(dir / (c.id + ".csv")) << curve_csv(c);
    }
    std::ofstream(dir / "summary.json") << summary_json(result, stability).dump(2) << "\n";
}

const std::vector<std::string>& sweep_parameters() {
    static const std::vector<std::string> names{
        "mask_size", "mu",      "delay_tail", "max_delay",   "delay_step",    "weight_base",
        "noise_variance", "rff_dim", "clients", "horizon", "monte_carlo", "subset_size",
        "full_downlink", "tie_rule", "kernel_width"};
    return names;
}

ExperimentConfig apply_parameter(const ExperimentConfig& config, const std::string& parameter,
                                 const std::string& value) {
    auto to_int = [&](const std::string& v) {
        std::size_t pos = 0;
        const int x = std::stoi(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return x;
    };
    auto to_double = [&](const std::string& v) {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return x;
    };
    ExperimentConfig c = config;
    try {
        if (parameter == "mask_size") c.mask_size = to_int(value);
        else if (parameter == "mu") for (const auto& a : c.algorithms) c.learning_rates[a] = to_double(value);
        else if (parameter == "delay_tail") c.delay_tail = to_double(value);
        else if (parameter == "max_delay") c.max_delay = to_int(value);
        else if (parameter == "delay_step") c.delay_step = to_int(value);
        else if (parameter == "weight_base") c.weight_base = to_double(value);
        else if (parameter == "noise_variance") c.noise_variance = to_double(value);
        else if (parameter == "rff_dim") c.rff_dim = to_int(value);
        else if (parameter == "clients") c.clients = to_int(value);
        else if (parameter == "horizon") c.horizon = to_int(value);
        else if (parameter == "monte_carlo") c.monte_carlo = to_int(value);
        else if (parameter == "subset_size") c.subset_size = to_int(value);
        else if (parameter == "kernel_width") c.kernel_width = to_double(value);
        else if (parameter == "full_downlink") c.full_downlink = value == "true" || value == "1";
        else if (parameter == "tie_rule") c.tie_rule = value;
        else throw ConfigError({"unknown sweep parameter '" + parameter + "'"});
    } catch (const std::invalid_argument&) {
        throw ConfigError({"cannot parse '" + value + "' for " + parameter});
    } catch (const std::out_of_range&) {
        throw ConfigError({"value '" + value + "' out of range for " + parameter});
    }
    c.validate();
    return c;
}

SweepResult sweep(const ExperimentConfig& config, const std::string& parameter,
                  const std::vector<std::string>& values, const RunOptions& options) {
    if (values.empty()) throw std::invalid_argument("sweep needs at least one value");
    std::vector<ExperimentConfig> configs;
    for (const auto& v : values) configs.push_back(apply_parameter(config, parameter, v));
    SweepResult out;
    out.parameter = parameter;
    for (std::size_t i = 0; i < values.size(); ++i) {
        ExperimentResult r = run_experiment(configs[i], options);
        const FeatureMap fm = FeatureMap::build(configs[i].feature_seed, configs[i].input_dim,
                                                configs[i].rff_dim, r.kernel_width);
        const StabilityInfo s = stability_info(configs[i], fm);
        for (const auto& c : r.curves) {
            SweepRow row;
            row.value = values[i];
            row.algorithm = c.id;
            row.final_mse_db = c.final_mse_db();
            row.comm_ratio = c.comm_ratio(configs[i].rff_dim);
            row.step_size = c.step_size;
            row.within_bound = c.step_size < s.mu_bound_ms;
            row.converged = std::isfinite(row.final_mse_db) && row.final_mse_db <= c.mse_db(0);
            out.rows.push_back(std::move(row));
        }
        out.runs.push_back(std::move(r));
    }
    return out;
}

std::string sweep_csv(const SweepResult& r) {
    std::ostringstream o;
    o.precision(10);
    o << r.parameter << ",algorithm,final_mse_test_db,comm_ratio,step_size,within_bound,converged\n";
    for (const auto& row : r.rows)
        o << row.value << "," << row.algorithm << "," << row.final_mse_db << "," << row.comm_ratio << ","
          << row.step_size << "," << (row.within_bound ? 1 : 0) << "," << (row.converged ? 1 : 0) << "\n";
    return o.str();
}

int crossing_iteration(const AlgorithmCurve& curve, double initial_mse, double drop_db) {
    const double threshold = initial_mse * std::pow(10.0, -drop_db / 10.0);
    for (std::size_t i = 0; i < curve.mse.size(); ++i)
        if (curve.mse[i] <= threshold) return static_cast<int>(i);
    return -1;
}

CalibrationResult calibrate_step_sizes(const ExperimentConfig& config,
                                       const CalibrationOptions& options) {
    config.validate();
    if (!is_known_algorithm(options.reference) || !options.reference.starts_with("pao-"))
        throw ConfigError({"calibration reference must be a pao-* algorithm"});
    std::vector<std::string> baselines;
    for (const auto& a : config.algorithms)
        if (!a.starts_with("pao-") &&
            std::find(baselines.begin(), baselines.end(), a) == baselines.end())
            baselines.push_back(a);

    ExperimentConfig probe = config;
    probe.seed = derive_seed(config.seed, "calibration");
    probe.monte_carlo = options.monte_carlo;
    const ExperimentSetup setup = prepare_experiment(probe);
    const double initial = MseEvaluator(setup.test)(Eigen::VectorXd::Zero(config.rff_dim));
    const double bound = stability_info(config, setup.feature_map).mu_bound_ms;
    const double mu_ref = config.step_size(options.reference);

    CalibrationResult out;
    probe.algorithms = {options.reference};
    out.reference_crossing =
        crossing_iteration(run_experiment(probe).curve(options.reference), initial, options.drop_db);
    if (baselines.empty()) return out;
    if (out.reference_crossing < 0)
        throw std::runtime_error("calibration reference never drops " + std::to_string(options.drop_db) + " dB");

    // Distance in iterations; a curve that never crosses ranks behind all others.
    const double ref = out.reference_crossing;
    auto distance = [&](int crossing) {
        return crossing < 0 ? std::numeric_limits<double>::infinity() : std::abs(crossing - ref);
    };
    probe.algorithms = baselines;
    for (double f : options.factors) {
        const double mu = mu_ref * f;
        if (!(mu > 0.0 && mu < bound)) continue;
        for (const auto& a : baselines) probe.learning_rates[a] = mu;
        const ExperimentResult r = run_experiment(probe);
        for (const auto& a : baselines) {
            const int c = crossing_iteration(r.curve(a), initial, options.drop_db);
            auto& points = out.grid[a];
            const bool better = points.empty() || distance(c) < distance(crossing_iteration_of(points, out.step_sizes[a]));
            points.push_back({mu, c});
            if (better) out.step_sizes[a] = mu;
        }
    }
    auto matches = [&](int c) { return c >= 0 && std::abs(c - ref) <= options.tolerance * std::max(ref, 1.0); };
    // Slower than the reference means a later crossing or none at all.
    auto slower = [&](int c) { return c < 0 || c > ref; };
    for (const auto& a : baselines) {
        auto& points = out.grid[a];
        if (points.empty() || matches(crossing_iteration_of(points, out.step_sizes[a]))) continue;
        std::vector<CalibrationPoint> sorted = points;
        std::sort(sorted.begin(), sorted.end(),
                  [](const CalibrationPoint& x, const CalibrationPoint& y) { return x.step_size < y.step_size; });
        for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
            if (!slower(sorted[i].crossing) || slower(sorted[i + 1].crossing)) continue;
            double lo = sorted[i].step_size, hi = sorted[i + 1].step_size;
            probe.algorithms = {a};
            for (int step = 0; step < options.refine_steps; ++step) {
                const double mu = std::sqrt(lo * hi);
                probe.learning_rates[a] = mu;
                const int c = crossing_iteration(run_experiment(probe).curve(a), initial, options.drop_db);
                if (distance(c) < distance(crossing_iteration_of(points, out.step_sizes[a]))) out.step_sizes[a] = mu;
                points.push_back({mu, c});
                if (matches(c)) break;
                (slower(c) ? lo : hi) = mu;
            }
            break;
        }
    }
    for (const auto& a : baselines) out.matched[a] = matches(crossing_iteration_of(out.grid[a], out.step_sizes[a]));
    return out;
}

ExperimentConfig with_step_sizes(const ExperimentConfig& config, const CalibrationResult& calibration) {
    ExperimentConfig c = config;
    for (const auto& [a, mu] : calibration.step_sizes) c.learning_rates[a] = mu;
    c.validate();
    return c;
}

TheoryInputs theory_inputs(const ExperimentConfig& config, const std::string& algorithm,
                           int correlation_samples) {
    config.validate();
    if (!algorithm.starts_with("pao-"))
        throw ConfigError({"theory predictions are available for pao-* algorithms only"});
    const long long size = (1LL + static_cast<long long>(config.clients) * (config.max_delay + 2)) * config.rff_dim;
    if (size > kMaxExtendedSize)
        throw ConfigError({"extended system of size " + std::to_string(size) + " exceeds " +
                           std::to_string(kMaxExtendedSize) +
                           "; reduce model.clients, model.rff_dim or environment.max_delay"});
    if (config.source != "synthetic") throw ConfigError({"theory predictions need a synthetic source"});

    const FeatureMap fm = FeatureMap::build(config.feature_seed, config.input_dim, config.rff_dim,
                                            resolve_kernel_width(config));
    const StreamConfig stream = stream_of(config);
    const Eigen::MatrixXd r = estimate_correlation(fm, stream, correlation_samples, config.seed);

    // Least-squares surrogate of the regression target in feature space.
    const TestSet fit = build_test_set(fm, stream, 20000, derive_seed(config.seed, "theory_fit"));
    const Eigen::MatrixXd gram = fit.mapped.transpose() * fit.mapped;
    const Eigen::VectorXd w_star = gram.ldlt().solve(fit.mapped.transpose() * fit.targets);
    const double misfit = (fit.targets - fit.mapped * w_star).squaredNorm() / fit.size();

    VariantConfig v = VariantConfig::named(algorithm.substr(4));
    v.weight_base = config.weight_base;
    TheoryInputs t;
    ExtendedSystem& s = t.system;
    s.clients = config.clients;
    s.dim = config.rff_dim;
    s.max_delay = config.max_delay;
    s.mask_size = config.mask_size;
    s.coordination = v.coordination;
    s.uplink = v.uplink;
    s.participation = availability_of(config).client_probability;
    s.delay = delay_of(config);
    s.weights = aggregation_weights(v, config.max_delay);
    s.correlations.assign(static_cast<std::size_t>(config.clients), r);
    s.noise_variances.assign(static_cast<std::size_t>(config.clients), config.noise_variance + misfit);
    s.tie_rule = config.tie_rule == "lowest-client" ? TieRule::lowest_client : TieRule::keep_all;
    s.full_downlink = config.full_downlink;
    s.validate();
    t.w_star = w_star;
    t.step_size = config.step_size(algorithm);
    t.algorithm = algorithm;
    return t;
}

}  // namespace paofed
