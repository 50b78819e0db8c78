#include "paofed/convergence_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include <Eigen/SparseLU>

namespace paofed {

namespace {

using Triplet = Eigen::Triplet<double>;

void require(bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument(what);
}

void add_identity_block(std::vector<Triplet>& t, int row_block, int col_block, int dim) {
    for (int j = 0; j < dim; ++j) t.emplace_back(row_block * dim + j, col_block * dim + j, 1.0);
}

/// Rows of the local and history blocks of B: locals unchanged, history lag 0
/// copies the fresh local model, lag j copies lag j - 1.
void add_b_copy_rows(const ExtendedSystem& sys, std::vector<Triplet>& t) {
    const int d = sys.dim;
    for (int k = 0; k < sys.clients; ++k) {
        add_identity_block(t, sys.local_block(k), sys.local_block(k), d);
        add_identity_block(t, sys.history_block(k, 0), sys.local_block(k), d);
        for (int lag = 1; lag <= sys.max_delay; ++lag)
            add_identity_block(t, sys.history_block(k, lag), sys.history_block(k, lag - 1), d);
    }
}

SparseMatrix from_triplets(int n, const std::vector<Triplet>& t) {
    SparseMatrix m(n, n);
    m.setFromTriplets(t.begin(), t.end());
    return m;
}

MaskScheduler scheduler_of(const ExtendedSystem& sys) {
    return MaskScheduler(sys.dim, sys.mask_size, sys.coordination);
}

int random_phase(const MaskScheduler& s, Rng& rng) {
    return std::uniform_int_distribution<int>(0, s.period() - 1)(rng);
}

bool bernoulli(double p, Rng& rng) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
}

SparseMatrix sparse_identity(int n) {
    SparseMatrix m(n, n);
    m.setIdentity();
    return m;
}

/// Hager's estimate of ||M^{-1}||_1 given solvers for M and M^T.
template <class Solver, class SolverT>
double inverse_norm1(const Solver& solve, const SolverT& solve_t, int n) {
    Eigen::VectorXd x = Eigen::VectorXd::Constant(n, 1.0 / n);
    double estimate = 0.0;
    for (int it = 0; it < 5; ++it) {
        const Eigen::VectorXd y = solve.solve(x);
        estimate = y.lpNorm<1>();
        const Eigen::VectorXd xi = y.unaryExpr([](double v) { return v >= 0.0 ? 1.0 : -1.0; });
        const Eigen::VectorXd z = solve_t.solve(xi);
        Eigen::Index j = 0;
        const double zmax = z.cwiseAbs().maxCoeff(&j);
        if (zmax <= z.dot(x)) break;
        x.setZero();
        x(j) = 1.0;
    }
    return estimate;
}

double norm1(const SparseMatrix& m) {
    double best = 0.0;
    for (int c = 0; c < m.outerSize(); ++c) {
        double s = 0.0;
        for (SparseMatrix::InnerIterator it(m, c); it; ++it) s += std::abs(it.value());
        best = std::max(best, s);
    }
    return best;
}

}  // namespace

void ExtendedSystem::validate() const {
    require(clients >= 1, "extended system needs at least one client");
    require(dim >= 1, "model dimension must be positive");
    require(max_delay >= 0, "maximum delay must be non-negative");
    require(mask_size >= 1 && mask_size <= dim, "mask size must lie in [1, D]");
    require(static_cast<int>(participation.size()) == clients,
            "one participation probability per client is required");
    for (double p : participation)
        require(p >= 0.0 && p <= 1.0, "participation probabilities must lie in [0, 1]");
    delay.validate();
    require(delay.cutoff == max_delay, "delay cutoff must equal the maximum delay");
    require(static_cast<int>(weights.size()) == max_delay + 1,
            "one aggregation weight per delay is required");
    for (double a : weights) require(a >= 0.0 && a <= 1.0, "aggregation weights must lie in [0, 1]");
    require(static_cast<int>(correlations.size()) == clients, "one correlation matrix per client");
    for (const auto& r : correlations) {
        require(r.rows() == dim && r.cols() == dim, "correlation matrices must be D x D");
        require((r - r.transpose()).cwiseAbs().maxCoeff() <= 1e-10 * std::max(1.0, r.cwiseAbs().maxCoeff()),
                "correlation matrices must be symmetric");
    }
    require(static_cast<int>(noise_variances.size()) == clients, "one noise variance per client");
    for (double s : noise_variances) require(s >= 0.0, "noise variances must be non-negative");
}

SparseMatrix ExtendedSystem::extended_correlation() const {
    std::vector<Triplet> t;
    for (int k = 0; k < clients; ++k) {
        const int off = local_block(k) * dim;
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j)
                if (correlations[static_cast<std::size_t>(k)](i, j) != 0.0)
                    t.emplace_back(off + i, off + j, correlations[static_cast<std::size_t>(k)](i, j));
    }
    return from_triplets(size(), t);
}

NoSteadyStateError::NoSteadyStateError(double radius)
    : std::runtime_error("spectral radius " + std::to_string(radius) +
                         " >= 1: no steady state exists"),
      radius_(radius) {}

SparseMatrix realize_A(const ExtendedSystem& sys, const std::vector<char>& available,
                       int iteration) {
    require(static_cast<int>(available.size()) == sys.clients, "one availability flag per client");
    const int d = sys.dim;
    const MaskScheduler sched = scheduler_of(sys);
    std::vector<Triplet> t;
    add_identity_block(t, ExtendedSystem::server_block(), ExtendedSystem::server_block(), d);
    for (int k = 0; k < sys.clients; ++k) {
        const int row = sys.local_block(k) * d;
        if (!available[static_cast<std::size_t>(k)]) {
            add_identity_block(t, sys.local_block(k), sys.local_block(k), d);
        } else {
            const SelectionMask m = sys.full_downlink ? SelectionMask::full(d)
                                                      : sched.downlink(k, iteration);
            for (int j = 0; j < d; ++j) {
                if (m.contains(j))
                    t.emplace_back(row + j, j, 1.0);
                else
                    t.emplace_back(row + j, row + j, 1.0);
            }
        }
        for (int lag = 0; lag <= sys.max_delay; ++lag)
            add_identity_block(t, sys.history_block(k, lag), sys.history_block(k, lag), d);
    }
    return from_triplets(sys.size(), t);
}

SparseMatrix realize_B(const ExtendedSystem& sys, const Delivery& resolved) {
    const int d = sys.dim;
    std::vector<Triplet> t;
    Eigen::VectorXd diag = Eigen::VectorXd::Ones(d);
    for (const auto& [l, group] : resolved) {
        if (l < 0 || l > sys.max_delay || group.empty()) continue;
        const double coef = sys.weights[static_cast<std::size_t>(l)] / static_cast<double>(group.size());
        for (const auto& msg : group) {
            require(msg.client_id >= 0 && msg.client_id < sys.clients, "message from unknown client");
            const int col_block = l == 0 ? sys.local_block(msg.client_id)
                                         : sys.history_block(msg.client_id, l - 1);
            for (int j : msg.mask.indices()) {
                t.emplace_back(j, col_block * d + j, coef);
                diag(j) -= coef;
            }
        }
    }
    for (int j = 0; j < d; ++j) t.emplace_back(j, j, diag(j));
    add_b_copy_rows(sys, t);
    return from_triplets(sys.size(), t);
}

SparseMatrix sample_A(const ExtendedSystem& sys, Rng& rng) {
    const MaskScheduler sched = scheduler_of(sys);
    const int phase = random_phase(sched, rng);
    std::vector<char> available(static_cast<std::size_t>(sys.clients));
    for (int k = 0; k < sys.clients; ++k)
        available[static_cast<std::size_t>(k)] = bernoulli(sys.participation[static_cast<std::size_t>(k)], rng);
    return realize_A(sys, available, phase);
}

SparseMatrix sample_B(const ExtendedSystem& sys, Rng& rng) {
    const MaskScheduler sched = scheduler_of(sys);
    const int phase = random_phase(sched, rng);
    Delivery delivered;
    for (int l = 0; l <= sys.max_delay; ++l) {
        const double pl = sys.delay.probability(l);
        for (int k = 0; k < sys.clients; ++k) {
            if (!bernoulli(sys.participation[static_cast<std::size_t>(k)] * pl, rng)) continue;
            SelectionMask up = uplink_mask(sched, sys.uplink, k, phase - l);
            std::vector<double> payload(static_cast<std::size_t>(up.size()), 0.0);
            delivered[l].push_back(InFlightMessage{k, phase - l, phase, std::move(up), std::move(payload)});
        }
    }
    return realize_B(sys, resolve_conflicts(std::move(delivered), sys.tie_rule));
}

Eigen::MatrixXd expected_A(const ExtendedSystem& sys) {
    const int d = sys.dim;
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(sys.size(), sys.size());
    const double pm = sys.full_downlink ? 1.0 : sys.mask_density();
    for (int k = 0; k < sys.clients; ++k) {
        const double q = sys.participation[static_cast<std::size_t>(k)] * pm;
        const int row = sys.local_block(k) * d;
        a.block(row, 0, d, d) = q * Eigen::MatrixXd::Identity(d, d);
        a.block(row, row, d, d) = (1.0 - q) * Eigen::MatrixXd::Identity(d, d);
    }
    return a;
}

SecondMoments estimate_Q(const ExtendedSystem& sys, int samples, std::uint64_t seed) {
    sys.validate();
    require(samples >= 1, "at least one sample is required");
    require(sys.size() <= kMaxExtendedSize, "extended system too large for second-order analysis");
    const int n = sys.size();
    const int n2 = n * n;
    SecondMoments out;
    out.qa.resize(n2, n2);
    out.qb.resize(n2, n2);
    out.mean_b = Eigen::MatrixXd::Zero(n, n);
    out.samples = samples;

    constexpr int batch = 32;
    std::vector<Triplet> ta, tb;
    auto flush = [&] {
        SparseMatrix sa(n2, n2), sb(n2, n2);
        sa.setFromTriplets(ta.begin(), ta.end());
        sb.setFromTriplets(tb.begin(), tb.end());
        out.qa += sa;
        out.qb += sb;
        ta.clear();
        tb.clear();
    };
    auto append = [](std::vector<Triplet>& t, const SparseMatrix& m) {
        for (int c = 0; c < m.outerSize(); ++c)
            for (SparseMatrix::InnerIterator it(m, c); it; ++it)
                t.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    };
    for (int i = 0; i < samples; ++i) {
        Rng rng = make_stream(seed, "q_sample", static_cast<std::uint64_t>(i));
        const SparseMatrix a = sample_A(sys, rng);
        const SparseMatrix b = sample_B(sys, rng);
        append(ta, block_kron(a, a, sys.dim));
        append(tb, block_kron(b, b, sys.dim));
        out.mean_b += Eigen::MatrixXd(b);
        if ((i + 1) % batch == 0) flush();
    }
    flush();
    const double inv = 1.0 / samples;
    out.qa *= inv;
    out.qb *= inv;
    out.mean_b *= inv;
    out.qa.prune(0.0);
    out.qb.prune(0.0);
    return out;
}

SparseMatrix build_F(const ExtendedSystem& sys, double mu, const SecondMoments& q, FOrder order) {
    const int n = sys.size();
    const SparseMatrix re = sys.extended_correlation();
    const SparseMatrix eye = sparse_identity(n);
    SparseMatrix mid = sparse_identity(n * n);
    mid -= mu * block_kron(eye, re, sys.dim);
    mid -= mu * block_kron(re, eye, sys.dim);
    if (order == FOrder::second) mid += (mu * mu) * block_kron(re, re, sys.dim);
    mid.prune(0.0);
    SparseMatrix f = q.qb * (mid * q.qa);
    f.prune(0.0);
    return f;
}

SpectralEstimate spectral_radius(const SparseMatrix& m, double tolerance, int max_iterations) {
    const Eigen::Index n = m.rows();
    Eigen::VectorXd x(n);
    for (Eigen::Index i = 0; i < n; ++i) x(i) = 1.0 + 0.5 * std::sin(static_cast<double>(i) + 1.0);
    x.normalize();

    // For a complex or negative dominant pair the per-step growth oscillates;
    // the geometric mean over a trailing window still tends to the radius.
    constexpr int window = 64;
    std::vector<double> growth;
    growth.reserve(static_cast<std::size_t>(max_iterations));
    SpectralEstimate est;
    double prev = -1.0;
    for (int it = 1; it <= max_iterations; ++it) {
        Eigen::VectorXd y = m * x;
        const double g = y.norm();
        est.iterations = it;
        if (g == 0.0) {
            est.radius = 0.0;
            est.converged = true;
            return est;
        }
        growth.push_back(g);
        x = y / g;
        if (prev >= 0.0 && std::abs(g - prev) <= tolerance * g) {
            est.radius = g;
            est.converged = true;
            return est;
        }
        prev = g;
        if (it >= 2 * window && it % window == 0) {
            double a = 0.0, b = 0.0;
            for (int i = it - window; i < it; ++i) a += std::log(growth[static_cast<std::size_t>(i)]);
            for (int i = it - 2 * window; i < it - window; ++i) b += std::log(growth[static_cast<std::size_t>(i)]);
            if (std::abs(a - b) / window <= tolerance) {
                est.radius = std::exp(a / window);
                est.converged = true;
                return est;
            }
        }
    }
    const int w = std::min<int>(window, static_cast<int>(growth.size()));
    double s = 0.0;
    for (int i = static_cast<int>(growth.size()) - w; i < static_cast<int>(growth.size()); ++i)
        s += std::log(growth[static_cast<std::size_t>(i)]);
    est.radius = std::exp(s / w);
    return est;
}

double max_eigenvalue(const Eigen::MatrixXd& symmetric, double tolerance, int max_iterations) {
    require(symmetric.rows() == symmetric.cols() && symmetric.rows() > 0, "square matrix required");
    const Eigen::Index n = symmetric.rows();
    Eigen::VectorXd x(n);
    for (Eigen::Index i = 0; i < n; ++i) x(i) = 1.0 + 0.5 * std::sin(static_cast<double>(i) + 1.0);
    x.normalize();
    double lambda = 0.0;
    for (int it = 0; it < max_iterations; ++it) {
        Eigen::VectorXd y = symmetric * x;
        const double norm = y.norm();
        if (norm == 0.0) return 0.0;
        const double next = x.dot(y);
        x = y / norm;
        if (it > 0 && std::abs(next - lambda) <= tolerance * std::abs(next)) return next;
        lambda = next;
    }
    return lambda;
}

StepSizeBounds step_size_bounds(const std::vector<Eigen::MatrixXd>& correlations) {
    require(!correlations.empty(), "at least one correlation matrix is required");
    StepSizeBounds b;
    for (const auto& r : correlations) b.max_eigenvalue = std::max(b.max_eigenvalue, max_eigenvalue(r));
    require(b.max_eigenvalue > 0.0, "correlation matrices must not all vanish");
    b.mean = 2.0 / b.max_eigenvalue;
    b.mean_square = 1.0 / b.max_eigenvalue;
    return b;
}

Eigen::MatrixXd estimate_correlation(const FeatureMap& fm, const StreamConfig& config,
                                     int samples, std::uint64_t seed) {
    require(samples >= 1, "at least one sample is required");
    require(fm.dim_in() == config.input_dim, "feature map input dimension mismatch");
    Rng rng = make_stream(seed, "correlation");
    std::uniform_real_distribution<double> u(config.input_low, config.input_high);
    constexpr int batch = 1024;
    Eigen::MatrixXd r = Eigen::MatrixXd::Zero(fm.dim_out(), fm.dim_out());
    for (int done = 0; done < samples; done += batch) {
        const int rows = std::min(batch, samples - done);
        Eigen::MatrixXd x(rows, fm.dim_in());
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < fm.dim_in(); ++j) x(i, j) = u(rng);
        const Eigen::MatrixXd z = fm.map_rows(x);
        r.selfadjointView<Eigen::Lower>().rankUpdate(z.transpose());
    }
    r = r.selfadjointView<Eigen::Lower>();
    return r / samples;
}

std::vector<Eigen::VectorXd> mean_trajectory(const ExtendedSystem& sys, double mu,
                                             const Eigen::MatrixXd& mean_a,
                                             const Eigen::MatrixXd& mean_b,
                                             const Eigen::VectorXd& initial, int iterations) {
    const int n = sys.size();
    require(mean_a.rows() == n && mean_b.rows() == n && initial.size() == n,
            "extended dimensions mismatch");
    const Eigen::MatrixXd step =
        mean_b * (Eigen::MatrixXd::Identity(n, n) - mu * Eigen::MatrixXd(sys.extended_correlation())) * mean_a;
    std::vector<Eigen::VectorXd> out;
    out.reserve(static_cast<std::size_t>(std::max(iterations, 0)));
    Eigen::VectorXd w = initial;
    for (int i = 0; i < iterations; ++i) {
        out.push_back(w);
        w = step * w;
    }
    return out;
}

Eigen::VectorXd noise_vector(const ExtendedSystem& sys, const SecondMoments& q) {
    const int n = sys.size();
    Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k < sys.clients; ++k) {
        const int off = sys.local_block(k) * sys.dim;
        phi.block(off, off, sys.dim, sys.dim) =
            sys.noise_variances[static_cast<std::size_t>(k)] * sys.correlations[static_cast<std::size_t>(k)];
    }
    return q.qb * bvec(phi, sys.dim);
}

Eigen::VectorXd server_selector(const ExtendedSystem& sys) {
    const int n = sys.size();
    Eigen::MatrixXd sel = Eigen::MatrixXd::Zero(n, n);
    sel.topLeftCorner(sys.dim, sys.dim).setIdentity();
    return bvec(sel, sys.dim);
}

std::vector<double> msd_transient(const ExtendedSystem& sys, double mu, const SparseMatrix& f,
                                  const Eigen::VectorXd& h, const Eigen::VectorXd& initial_error,
                                  int iterations) {
    require(initial_error.size() == sys.size(), "initial error has the wrong size");
    const Eigen::VectorXd c0 = bvec(initial_error * initial_error.transpose(), sys.dim);
    const SparseMatrix ft = f.transpose();
    Eigen::VectorXd s = server_selector(sys);
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(std::max(iterations, 0)));
    double noise = 0.0;
    for (int i = 0; i < iterations; ++i) {
        out.push_back(c0.dot(s) + mu * mu * noise);
        noise += h.dot(s);
        s = ft * s;
    }
    return out;
}

SteadyState msd_steady_state(const ExtendedSystem& sys, double mu, const SparseMatrix& f,
                             const Eigen::VectorXd& h) {
    SteadyState out;
    out.spectral_radius = spectral_radius(f).radius;
    if (out.spectral_radius >= 1.0) throw NoSteadyStateError(out.spectral_radius);

    const int n = static_cast<int>(f.rows());
    const SparseMatrix eye = sparse_identity(n);
    const SparseMatrix m = eye - SparseMatrix(f.transpose());
    const SparseMatrix mt = eye - f;
    Eigen::SparseLU<SparseMatrix> lu, lu_t;
    lu.compute(m);
    if (lu.info() != Eigen::Success) throw NoSteadyStateError(out.spectral_radius);
    lu_t.compute(mt);
    if (lu_t.info() != Eigen::Success) throw NoSteadyStateError(out.spectral_radius);

    const Eigen::VectorXd rhs = server_selector(sys);
    Eigen::VectorXd sigma = lu.solve(rhs);
    for (int it = 0; it < 3; ++it) {
        const Eigen::VectorXd r = rhs - m * sigma;
        if (r.norm() <= 1e-15 * rhs.norm()) break;
        sigma += lu.solve(r);
    }
    out.condition_estimate = norm1(m) * inverse_norm1(lu, lu_t, n);
    out.msd = std::max(0.0, mu * mu * h.dot(sigma));
    return out;
}

Eigen::VectorXd extended_update(const ExtendedSystem& sys, const SparseMatrix& a,
                                const SparseMatrix& b, const std::vector<Eigen::VectorXd>& features,
                                const Eigen::VectorXd& targets, double mu,
                                const Eigen::VectorXd& state) {
    require(static_cast<int>(features.size()) == sys.clients && targets.size() == sys.clients,
            "one sample per client is required");
    Eigen::VectorXd v = a * state;
    for (int k = 0; k < sys.clients; ++k) {
        auto local = v.segment(sys.local_block(k) * sys.dim, sys.dim);
        const Eigen::VectorXd& z = features[static_cast<std::size_t>(k)];
        const double e = targets(k) - z.dot(local);
        local += (mu * e) * z;
    }
    return b * v;
}

MsdPrediction predict_msd(const ExtendedSystem& sys, double mu, const Eigen::VectorXd& w_star,
                          int iterations, int q_samples, std::uint64_t seed, FOrder order) {
    sys.validate();
    require(w_star.size() == sys.dim, "w_star has the wrong dimension");
    require(mu > 0.0, "step size must be positive");
    MsdPrediction out;
    const StepSizeBounds bounds = step_size_bounds(sys.correlations);
    out.mu_bound_mean = bounds.mean;
    out.mu_bound_ms = bounds.mean_square;

    const SecondMoments q = estimate_Q(sys, q_samples, seed);
    const SparseMatrix f = build_F(sys, mu, q, order);
    const Eigen::VectorXd h = noise_vector(sys, q);
    const Eigen::VectorXd initial = w_star.replicate(sys.block_count(), 1);
    out.transient = msd_transient(sys, mu, f, h, initial, iterations);
    const SteadyState ss = msd_steady_state(sys, mu, f, h);
    out.steady_state = ss.msd;
    out.spectral_radius = ss.spectral_radius;
    out.condition_estimate = ss.condition_estimate;
    return out;
}

}  // namespace paofed
