#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "paofed/convergence_analysis.hpp"
#include "paofed/experiment_config.hpp"
#include "paofed/experiment_harness.hpp"
#include "paofed/stream_data.hpp"

namespace fs = std::filesystem;
using namespace paofed;

namespace {

enum Exit { ok = 0, internal = 1, invalid_argument = 2, config_error = 3, data_error = 4, no_steady_state = 5 };

int fail(Exit code, const std::string& category, const std::string& message) {
    nlohmann::json j{{"error", category}, {"message", message}};
    std::cerr << j.dump() << "\n";
    return code;
}

struct Overrides {
    std::string output_dir;
    int threads = 0;
    int monte_carlo = 0;

    void apply(ExperimentConfig& c) const {
        if (!output_dir.empty()) c.output_dir = output_dir;
        if (threads > 0) c.threads = threads;
        if (monte_carlo > 0) c.monte_carlo = monte_carlo;
        c.validate();
    }
};

void add_overrides(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--output-dir", o.output_dir, "Directory for CSV and JSON outputs");
    cmd->add_option("--threads", o.threads, "Worker threads for Monte-Carlo runs");
    cmd->add_option("--monte-carlo", o.monte_carlo, "Number of Monte-Carlo runs");
}

void progress(int run) { std::fprintf(stderr, "run %d done\n", run + 1); }

int do_run(ExperimentConfig config, bool calibrate) {
    nlohmann::json calibration;
    if (calibrate) {
        const CalibrationResult c = calibrate_step_sizes(config);
        config = with_step_sizes(config, c);
        calibration["reference_crossing"] = c.reference_crossing;
        calibration["step_sizes"] = c.step_sizes;
        calibration["matched"] = c.matched;
        for (const auto& [a, points] : c.grid)
            for (const auto& p : points)
                calibration["grid"][a].push_back({{"step_size", p.step_size}, {"crossing", p.crossing}});
    }
    const ExperimentResult r = run_experiment(config, RunOptions{progress});
    const FeatureMap fm = FeatureMap::build(config.feature_seed, config.input_dim, config.rff_dim, r.kernel_width);
    const StabilityInfo s = stability_info(config, fm);
    write_outputs(r, s);
    nlohmann::json summary = summary_json(r, s);
    if (calibrate) {
        summary["calibration"] = calibration;
        std::ofstream(fs::path(config.output_dir) / "calibrated.ini") << to_ini(config);
        std::ofstream(fs::path(config.output_dir) / "summary.json") << summary.dump(2) << "\n";
    }
    std::cout << summary.dump(2) << "\n";
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Asynchronous online federated learning simulator"};
    app.require_subcommand(1);

    std::string config_path, param, preset_name, algorithm, output;
    std::vector<std::string> values, algorithms;
    double scale = 1.0;
    int iterations = 0, q_samples = 2000;
    bool first_order = false, calibrate = false;
    Overrides overrides;

    auto* run = app.add_subcommand("run", "Run the configured experiment");
    run->add_option("config", config_path, "INI config file")->required();
    add_overrides(run, overrides);
    run->add_flag("--calibrate", calibrate, "Match baseline step sizes to PAO-Fed's initial convergence");

    auto* sw = app.add_subcommand("sweep", "Repeat the experiment over parameter values");
    sw->add_option("config", config_path, "INI config file")->required();
    sw->add_option("--param", param, "Parameter to vary")->required();
    sw->add_option("--values", values, "Comma-separated values")->required()->delimiter(',');
    add_overrides(sw, overrides);

    auto* pm = app.add_subcommand("predict-msd", "Theoretical MSD curve and steady state");
    pm->add_option("config", config_path, "INI config file")->required();
    pm->add_option("--algorithm", algorithm, "PAO-Fed variant (default: first pao-* listed)");
    pm->add_option("--iterations", iterations, "Transient length (default: horizon)");
    pm->add_option("--q-samples", q_samples, "Monte-Carlo samples for the second moments");
    pm->add_flag("--first-order", first_order, "Drop the mu^2 term of F");
    pm->add_option("--output-dir", overrides.output_dir, "Directory for outputs");

    auto* cmp = app.add_subcommand("compare", "Run a chosen set of algorithms");
    cmp->add_option("config", config_path, "INI config file")->required();
    cmp->add_option("--algorithms", algorithms, "Comma-separated algorithm ids")->required()->delimiter(',');
    add_overrides(cmp, overrides);
    cmp->add_flag("--calibrate", calibrate, "Match baseline step sizes to PAO-Fed's initial convergence");

    auto* pr = app.add_subcommand("preset", "Print a named configuration");
    pr->add_option("name", preset_name, "Preset name")->required();
    pr->add_option("--scale", scale, "Shrink clients, sample counts and horizon");
    pr->add_option("--output", output, "Write to a file instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail(invalid_argument, "invalid-argument", e.what());
    }

    try {
        if (pr->parsed()) {
            const std::string ini = to_ini(preset(preset_name, scale));
            if (output.empty())
                std::cout << ini;
            else
                std::ofstream(output) << ini;
            return ok;
        }

        ExperimentConfig config = load_config(config_path);
        overrides.apply(config);

        if (run->parsed()) return do_run(config, calibrate);

        if (cmp->parsed()) {
            config.algorithms = algorithms;
            config.validate();
            return do_run(config, calibrate);
        }

        if (sw->parsed()) {
            const SweepResult r = sweep(config, param, values, RunOptions{progress});
            fs::create_directories(config.output_dir);
            const std::string csv = sweep_csv(r);
            std::ofstream(fs::path(config.output_dir) / ("sweep_" + param + ".csv")) << csv;
            std::cout << csv;
            return ok;
        }

        if (pm->parsed()) {
            if (algorithm.empty()) {
                for (const auto& a : config.algorithms)
                    if (a.starts_with("pao-")) {
                        algorithm = a;
                        break;
                    }
                if (algorithm.empty()) algorithm = "pao-u2";
            }
            const TheoryInputs t = theory_inputs(config, algorithm);
            const int n = iterations > 0 ? iterations : config.horizon;
            const MsdPrediction p = predict_msd(t.system, t.step_size, t.w_star, n, q_samples, config.seed,
                                                first_order ? FOrder::first : FOrder::second);
            fs::create_directories(config.output_dir);
            std::ofstream csv(fs::path(config.output_dir) / "predicted_msd.csv");
            csv.precision(12);
            csv << "iteration,predicted_msd\n";
            for (std::size_t i = 0; i < p.transient.size(); ++i) csv << i << "," << p.transient[i] << "\n";
            nlohmann::json j{{"algorithm", algorithm},
                             {"step_size", t.step_size},
                             {"spectral_radius", p.spectral_radius},
                             {"mu_bound_mean", p.mu_bound_mean},
                             {"mu_bound_ms", p.mu_bound_ms},
                             {"steady_state_msd", p.steady_state},
                             {"steady_state_msd_db", 10.0 * std::log10(p.steady_state)},
                             {"condition_estimate", p.condition_estimate},
                             {"q_samples", q_samples},
                             {"f_order", first_order ? "first" : "second"}};
            std::ofstream(fs::path(config.output_dir) / "predicted_msd.json") << j.dump(2) << "\n";
            std::cout << j.dump(2) << "\n";
            return ok;
        }
    } catch (const ConfigError& e) {
        return fail(config_error, "config", e.what());
    } catch (const DataError& e) {
        return fail(data_error, "data", e.what());
    } catch (const NoSteadyStateError& e) {
        return fail(no_steady_state, "no-steady-state", e.what());
    } catch (const std::invalid_argument& e) {
        return fail(invalid_argument, "invalid-argument", e.what());
    } catch (const std::exception& e) {
        return fail(internal, "internal", e.what());
    }
    return fail(internal, "internal", "no subcommand handled");
}
