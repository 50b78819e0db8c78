// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>

#include "paofed/convergence_analysis.hpp"
#include "paofed/experiment_harness.hpp"

using namespace paofed;

namespace {

int failures = 0;

void report(const std::string& name, bool pass, const std::string& detail) {
    if (!pass) ++failures;
    std::cout << (pass ? "PASS " : "FAIL ") << name << ": " << detail << std::endl;
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

int threads() { return std::max(1u, std::thread::hardware_concurrency()); }

// K=32, D=64, N=2000, MC=50.
ExperimentConfig desk(const std::string& name) {
    ExperimentConfig c = preset(name, 1.0 / 8);
    c.rff_dim = 64;
    c.mask_size = 4;
    c.horizon = 2000;
    c.group_sizes = {500, 1000, 1500, 2000};
    c.monte_carlo = 50;
    c.threads = threads();
    c.validate();
    return c;
}

// K=4, D=4, m=2, l_max=2, every client holding a sample at every iteration.
ExperimentConfig theory_desk() {
    ExperimentConfig c;
    c.clients = 4;
    c.rff_dim = 4;
    c.mask_size = 2;
    c.max_delay = 2;
    c.delay_tail = 0.3;
    c.availability = {0.5};
    c.horizon = 6000;
    c.group_sizes = {6000};
    c.algorithms = {"pao-u1"};
    c.validate();
    return c;
}

void communication_ratio() {
    ExperimentConfig c = preset("default-async", 1.0 / 8);
    c.horizon = 100;
    c.group_sizes = {25, 50, 75, 100};
    c.test_size = 10;
    const ExperimentSetup setup = prepare_experiment(c);
    const StreamPlan plan = build_stream_plan(setup.stream, 1);
    const EnvironmentTrace trace = EnvironmentTrace::generate(plan, availability_of(c), delay_of(c), 2);
    auto pao = make_algorithm("pao-u2", c, 3);
    auto sgd = make_algorithm("online-fedsgd", c, 3);
    std::vector<FederatedAlgorithm*> algs{pao.get(), sgd.get()};
    simulate(algs, plan, trace, setup.feature_map);
    const auto& p = pao->counters();
    const auto& s = sgd->counters();
    // Per participation: m parameters against D, i.e. 4 * 50 == 200.
    const bool pass = p.uplink_messages > 0 && s.uplink_messages > 0 &&
                      p.uplink_params == 4 * p.uplink_messages && s.uplink_params == 200 * s.uplink_messages &&
                      p.uplink_params * 200 * s.uplink_messages == s.uplink_params * 4 * p.uplink_messages &&
                      50 * 4 == 200;
    report("communication ratio", pass,
           fmt("PAO-Fed %lld params / %lld messages, Online-FedSGD %lld / %lld, ratio per participation %d/%d = 0.02",
               static_cast<long long>(p.uplink_params), static_cast<long long>(p.uplink_messages),
               static_cast<long long>(s.uplink_params), static_cast<long long>(s.uplink_messages), 4, 200));
}

void synchronous_reduction() {
    ExperimentConfig c = desk("ideal");
    c.mask_size = c.rff_dim;
    const ExperimentSetup setup = prepare_experiment(c);
    double worst = 0.0;
    for (int run = 0; run < 3; ++run) {
        const std::uint64_t seed = derive_seed(c.seed, "mc_run", static_cast<std::uint64_t>(run));
        const StreamPlan plan = build_stream_plan(setup.stream, derive_seed(seed, "data"));
        const EnvironmentTrace trace =
            EnvironmentTrace::generate(plan, availability_of(c), delay_of(c), seed);
        for (const char* id : {"pao-c1", "pao-u1"}) {
            auto pao = make_algorithm(id, c, seed);
            auto sgd = make_algorithm("online-fedsgd", c, seed);
            std::vector<FederatedAlgorithm*> algs{pao.get(), sgd.get()};
            simulate(algs, plan, trace, setup.feature_map, [&](int) {
                worst = std::max(worst, (pao->server_model() - sgd->server_model()).cwiseAbs().maxCoeff());
            });
        }
    }
    report("synchronous reduction", worst <= 1e-12, fmt("max coordinate gap %.3g over 2000 iterations (tol 1e-12)", worst));
}

struct Finals {
    ExperimentResult result;
    double operator()(const char* id) const { return result.curve(id).final_mse_db(); }
};

void baseline_and_local_updates(Finals& base) {
    ExperimentConfig c = desk("default-async");
    c.algorithms = {"pao-c0", "pao-c1", "pao-c2", "pao-u0", "pao-u1", "pao-u2", "online-fedsgd", "online-fed", "pso-fed"};
    const CalibrationResult cal = calibrate_step_sizes(c);
    std::ostringstream mu;
    for (const auto& [id, v] : cal.step_sizes)
        mu << id << "=" << v << (cal.matched.at(id) ? "" : "(unmatched)") << " ";
    c = with_step_sizes(c, cal);
    base.result = run_experiment(c);
    const Finals& f = base;
    const double u2 = f("pao-u2"), u1 = f("pao-u1"), sgd = f("online-fedsgd");
    const double of = f("online-fed"), pso = f("pso-fed");
    const bool order = u2 <= u1 && u1 <= sgd + 0.5;
    const bool gap = of >= u2 + 3.0 && pso >= u2 + 3.0;
    report("baseline ordering", order && gap,
           fmt("U2 %.2f, U1 %.2f, Online-FedSGD %.2f, Online-Fed %.2f (+%.2f), PSO-Fed %.2f (+%.2f) dB; "
               "U2<=U1<=FedSGD+0.5 %s, baselines >=3 dB worse %s; reference crossing %d, ",
               u2, u1, sgd, of, of - u2, pso, pso - u2, order ? "yes" : "no", gap ? "yes" : "no",
               cal.reference_crossing) + "calibrated mu " + mu.str());

    const double c0 = f("pao-c0"), c1 = f("pao-c1"), u0 = f("pao-u0");
    report("local-update benefit", c1 <= c0 - 1.0 && u1 <= u0 - 1.0,
           fmt("C0 %.2f -> C1 %.2f (%.2f dB), U0 %.2f -> U1 %.2f (%.2f dB), need >= 1 dB", c0, c1, c0 - c1, u0, u1,
               u0 - u1));
}

void weight_decrease() {
    bool pass = true;
    std::string detail;
    for (const char* name : {"heavy-delay", "sparse-participation"}) {
        ExperimentConfig c = desk(name);
        c.algorithms = {"pao-c1", "pao-c2", "pao-u2"};
        const ExperimentResult r = run_experiment(c);
        const double c1 = r.curve("pao-c1").final_mse_db();
        const double c2 = r.curve("pao-c2").final_mse_db();
        const double u2 = r.curve("pao-u2").final_mse_db();
        const bool ok = c2 <= c1 - 1.0 && std::abs(c2 - u2) <= 0.5;
        pass = pass && ok;
        detail += fmt("%s: C1 %.2f, C2 %.2f (gain %.2f dB, need >= 1), U2 %.2f (|C2-U2| %.2f, need <= 0.5); ", name,
                      c1, c2, c1 - c2, u2, std::abs(c2 - u2));
    }
    report("weight-decrease benefit", pass, detail);
}

void full_downlink(const Finals& base) {
    ExperimentConfig c = desk("full-downlink");
    c.algorithms = {"pao-c1", "pao-c2", "pao-u1", "pao-u2"};
    const ExperimentResult r = run_experiment(c);
    bool pass = true;
    std::string detail;
    for (const auto& id : c.algorithms) {
        const double partial = base(id.c_str());
        const double full = r.curve(id).final_mse_db();
        pass = pass && full >= partial + 1.0;
        detail += fmt("%s %.2f -> %.2f (+%.2f dB) ", id.c_str(), partial, full, full - partial);
    }
    report("full-downlink degradation", pass, detail + "need >= 1 dB");
}

void delay_model() {
    bool pass = true;
    std::string detail;
    const DelayModel models[] = {{0.2, 10, 1}, {0.4, 60, 10}, {0.8, 5, 1}};
    for (const DelayModel& m : models) {
        Rng rng = make_stream(11, "acceptance_delay", static_cast<std::uint64_t>(m.tail * 10));
        const int draws = 1000000;
        std::vector<int> at_least(static_cast<std::size_t>(m.cutoff + 1), 0);
        for (int i = 0; i < draws; ++i) {
            const auto d = sample_delay(m, rng);
            const int v = d ? *d : m.cutoff + m.step;
            for (int l = 0; l <= m.cutoff && l <= v; ++l) ++at_least[static_cast<std::size_t>(l)];
        }
        double worst = 0.0;
        for (int l = 0; l <= m.cutoff; l += m.step) {
            const double p = std::pow(m.tail, static_cast<double>(l) / m.step);
            const double emp = at_least[static_cast<std::size_t>(l)] / static_cast<double>(draws);
            const double sigma = std::sqrt(p * (1 - p) / draws);
            const double z = sigma > 0 ? std::abs(emp - p) / sigma : (emp == p ? 0.0 : INFINITY);
            worst = std::max(worst, z);
        }
        pass = pass && worst <= 3.0;
        detail += fmt("delta %.1f g %d lmax %d: worst |z| %.2f; ", m.tail, m.step, m.cutoff, worst);
    }
    report("delay survival", pass, detail + "need <= 3 sigma at 1e6 draws");
}

ExtendedSystem small_system(const std::vector<double>& weights) {
    ExtendedSystem s;
    s.clients = 2;
    s.dim = 2;
    s.max_delay = 1;
    s.mask_size = 1;
    s.participation = {0.5, 0.25};
    s.delay = DelayModel{0.3, 1, 1};
    s.weights = weights;
    s.correlations.assign(2, Eigen::MatrixXd::Identity(2, 2));
    s.noise_variances.assign(2, 0.01);
    return s;
}

void stochasticity() {
    const ExtendedSystem flat = small_system({1.0, 1.0});
    const ExtendedSystem dec = small_system({1.0, 0.2});
    auto row_err = [](const Eigen::MatrixXd& m) { return (m.rowwise().sum().array() - 1.0).abs().maxCoeff(); };
    const double ea = row_err(expected_A(flat));
    Rng rng(5);
    double sampled = 0.0;
    for (int i = 0; i < 1000; ++i) {
        sampled = std::max(sampled, row_err(Eigen::MatrixXd(sample_A(flat, rng))));
        sampled = std::max(sampled, row_err(Eigen::MatrixXd(sample_B(flat, rng))));
    }
    const SecondMoments q = estimate_Q(flat, 10000, 6);
    const double qa = row_err(Eigen::MatrixXd(q.qa));
    const double qb = row_err(Eigen::MatrixXd(q.qb));
    const SecondMoments qd = estimate_Q(dec, 10000, 7);
    const double qd_max = Eigen::MatrixXd(qd.qb).rowwise().sum().maxCoeff();
    const bool pass = ea <= 1e-12 && sampled == 0.0 && qa <= 3e-2 && qb <= 3e-2 && qd_max <= 1.0 + 1e-12;
    report("stochasticity", pass,
           fmt("E[A] row error %.2g, sampled A/B row error %.2g, Q_A %.2g, Q_B %.2g (<= 3e-2), decreasing Q_B max row sum %.15g",
               ea, sampled, qa, qb, qd_max));
}

void stability_bounds() {
    const StepSizeBounds id = step_size_bounds({Eigen::MatrixXd::Identity(4, 4)});
    const bool id_ok = id.mean == 2.0 && id.mean_square == 1.0;

    bool rho_ok = true;
    std::string detail = fmt("identity bounds (%.6g, %.6g); ", id.mean, id.mean_square);
    const ExperimentConfig c = theory_desk();
    for (const char* alg : {"pao-u1", "pao-u2"}) {
        const TheoryInputs t = theory_inputs(c, alg);
        const SecondMoments q = estimate_Q(t.system, 20000, 8);
        const double lmax = step_size_bounds(t.system.correlations).max_eigenvalue;
        detail += fmt("%s maxlambda %.4f rho:", alg, lmax);
        for (double f : {0.1, 0.5, 0.9}) {
            const double rho = spectral_radius(build_F(t.system, f / lmax, q)).radius;
            rho_ok = rho_ok && rho < 1.0;
            detail += fmt(" %.6f", rho);
        }
        detail += "; ";
    }

    ExtendedSystem s = small_system({1.0});
    s.clients = 1;
    s.dim = 1;
    s.max_delay = 0;
    s.participation = {1.0};
    s.delay = DelayModel{0.0, 0, 1};
    s.correlations = {Eigen::MatrixXd::Constant(1, 1, 0.7)};
    s.noise_variances = {0.02};
    const SecondMoments q = estimate_Q(s, 1, 1);
    double scalar_err = 0.0;
    for (double mu : {0.2, 0.9, 1.5}) {
        const double f00 = Eigen::MatrixXd(build_F(s, mu, q))(0, 0);
        scalar_err = std::max(scalar_err, std::abs(f00 - (1 - mu * 0.7) * (1 - mu * 0.7)));
    }
    report("stability bounds", id_ok && rho_ok && scalar_err <= 1e-12,
           detail + fmt("scalar F error %.2g (tol 1e-12)", scalar_err));
}

void steady_state_msd() {
    ExtendedSystem s;
    s.participation = {1.0};
    s.delay = DelayModel{0.0, 0, 1};
    s.weights = {1.0};
    s.correlations = {Eigen::MatrixXd::Constant(1, 1, 0.7)};
    s.noise_variances = {0.02};
    const SecondMoments q = estimate_Q(s, 1, 1);
    double scalar_err = 0.0;
    for (double mu : {0.1, 0.5, 1.2}) {
        const double ss = msd_steady_state(s, mu, build_F(s, mu, q), noise_vector(s, q)).msd;
        const double ref = mu * mu * 0.7 * 0.02 / (1 - (1 - mu * 0.7) * (1 - mu * 0.7));
        scalar_err = std::max(scalar_err, std::abs(ss - ref));
    }

    // Theory against simulation on the small system.
    ExperimentConfig c = theory_desk();
    const TheoryInputs t = theory_inputs(c, "pao-u1");
    const double lmax = step_size_bounds(t.system.correlations).max_eigenvalue;
    const double mu = 0.2 / lmax;
    c.learning_rates["pao-u1"] = mu;
    const MsdPrediction pred = predict_msd(t.system, mu, t.w_star, c.horizon, 20000, 9);

    const ExperimentSetup setup = prepare_experiment(c);
    const int runs = 200, window = c.horizon / 4;
    double msd = 0.0;
    std::vector<double> curve(static_cast<std::size_t>(c.horizon), 0.0);
    for (int r = 0; r < runs; ++r) {
        const std::uint64_t seed = derive_seed(c.seed, "mc_run", static_cast<std::uint64_t>(r));
        const StreamPlan plan = build_stream_plan(setup.stream, derive_seed(seed, "data"));
        const EnvironmentTrace trace = EnvironmentTrace::generate(plan, availability_of(c), delay_of(c), seed);
        auto pao = make_algorithm("pao-u1", c, seed);
        std::vector<FederatedAlgorithm*> algs{pao.get()};
        simulate(algs, plan, trace, setup.feature_map, [&](int n) {
            const double d = (pao->server_model() - t.w_star).squaredNorm();
            curve[static_cast<std::size_t>(n)] += d / runs;
            if (n >= c.horizon - window) msd += d;
        });
    }
    msd /= static_cast<double>(runs) * window;
    const double gap = std::abs(10 * std::log10(msd / pred.steady_state));
    report("steady-state MSD", scalar_err <= 1e-10 && gap <= 1.5,
           fmt("scalar error %.2g (tol 1e-10); small system mu %.4f rho %.6f: theory %.3f dB, simulation %.3f dB over "
               "%d runs, gap %.2f dB (tol 1.5); after the first update theory %.3f dB, simulation %.3f dB",
               scalar_err, mu, pred.spectral_radius, 10 * std::log10(pred.steady_state), 10 * std::log10(msd), runs,
               gap, 10 * std::log10(pred.transient[1]), 10 * std::log10(curve.front())));
}

void kernel_approximation() {
    const int maps = 10000, pairs = 20, dim = 64;
    const double sigma = 1.0;
    Rng rng(12);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::MatrixXd x(pairs, 4), y(pairs, 4);
    for (int i = 0; i < pairs; ++i)
        for (int j = 0; j < 4; ++j) {
            x(i, j) = u(rng);
            y(i, j) = u(rng);
        }
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(pairs);
    for (int m = 0; m < maps; ++m) {
        const FeatureMap fm = FeatureMap::build(derive_seed(13, "kernel_map", static_cast<std::uint64_t>(m)), 4, dim, sigma);
        mean += (fm.map_rows(x).array() * fm.map_rows(y).array()).rowwise().sum().matrix();
    }
    mean /= maps;
    double worst = 0.0;
    for (int i = 0; i < pairs; ++i) {
        const double k = std::exp(-(x.row(i) - y.row(i)).squaredNorm() / (2 * sigma * sigma));
        worst = std::max(worst, std::abs(mean(i) - k));
    }
    report("RFF kernel approximation", worst <= 0.05, fmt("worst gap %.4f over %d pairs, %d maps (tol 0.05)", worst, pairs, maps));
}

template <class F>
void timed(F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
        f();
    } catch (const std::exception& e) {
        report("unexpected error", false, e.what());
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << "  (" << fmt("%.1f", s) << " s)" << std::endl;
}

}  // namespace

int main() {
    Finals base;
    timed(communication_ratio);
    timed(synchronous_reduction);
    timed([&] { baseline_and_local_updates(base); });
    timed(weight_decrease);
    timed(delay_model);
    timed(stochasticity);
    timed(stability_bounds);
    timed(steady_state_msd);
    timed(kernel_approximation);
    timed([&] { full_downlink(base); });
    std::cout << (failures == 0 ? "all criteria passed" : fmt("%d criteria failed", failures)) << std::endl;
    return failures == 0 ? 0 : 1;
}
