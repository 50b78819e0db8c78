#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "paofed/async_environment.hpp"
#include "paofed/block_kronecker.hpp"
#include "paofed/fed_algorithms.hpp"
#include "paofed/random.hpp"
#include "paofed/rff_feature_map.hpp"
#include "paofed/stream_data.hpp"

namespace paofed {

/// Stacked state of the server model, the current client models and the
/// client models of the last max_delay + 1 iterations:
///
///   w_e = col{w_n, w_{1..K,n}, w_{1..K,n}, w_{1..K,n-1}, ..., w_{1..K,n-l_max}}
///
/// i.e. 1 + K (l_max + 2) blocks of size D. Every client is assumed to receive
/// a sample at every iteration and participates with constant probability p_k.
struct ExtendedSystem {
    int clients = 1;
    int dim = 1;
    int max_delay = 0;
    int mask_size = 1;
    Coordination coordination = Coordination::uncoordinated;
    UplinkRule uplink = UplinkRule::shifted;
    std::vector<double> participation;   // p_k
    DelayModel delay{0.0, 0, 1};         // cutoff must equal max_delay
    std::vector<double> weights;         // alpha_0..alpha_{max_delay}
    std::vector<Eigen::MatrixXd> correlations;  // R_k
    std::vector<double> noise_variances;        // sigma_{eta,k}^2
    TieRule tie_rule = TieRule::keep_all;
    bool full_downlink = false;

    int block_count() const { return 1 + clients * (max_delay + 2); }
    int size() const { return block_count() * dim; }
    double mask_density() const { return static_cast<double>(mask_size) / dim; }

    static constexpr int server_block() { return 0; }
    int local_block(int k) const { return 1 + k; }
    int history_block(int k, int lag) const { return 1 + clients + lag * clients + k; }

    /// Throws std::invalid_argument on inconsistent fields.
    void validate() const;

    /// R_e = blockdiag{0, R_1, ..., R_K, 0, ..., 0}.
    SparseMatrix extended_correlation() const;
};

/// Largest dimension of the extended state accepted by the second-order
/// routines (their matrices have size()^2 rows).
inline constexpr int kMaxExtendedSize = 256;

class NoSteadyStateError : public std::runtime_error {
public:
    explicit NoSteadyStateError(double radius);
    double spectral_radius() const { return radius_; }

private:
    double radius_;
};

/// A_{e,n} for the given availability flags and downlink masks at `iteration`.
SparseMatrix realize_A(const ExtendedSystem& sys, const std::vector<char>& available,
                       int iteration);

/// B_{e,n} for a conflict-resolved delivery (messages keyed by delay).
SparseMatrix realize_B(const ExtendedSystem& sys, const Delivery& resolved);

/// Random realizations: availability ~ Bernoulli(p_k), a message of client k
/// arrives with delay l with probability p_k P(delay = l) independently per
/// l, and the mask schedule phase is uniform over its period.
SparseMatrix sample_A(const ExtendedSystem& sys, Rng& rng);
SparseMatrix sample_B(const ExtendedSystem& sys, Rng& rng);

/// Closed form: client rows carry p_k (m/D) I in the server column and
/// (1 - p_k m/D) I on the diagonal; every other block row is identity.
Eigen::MatrixXd expected_A(const ExtendedSystem& sys);

struct SecondMoments {
    SparseMatrix qa;         // E[A (x)_b A]
    SparseMatrix qb;         // E[B (x)_b B]
    Eigen::MatrixXd mean_b;  // E[B], Monte-Carlo
    int samples = 0;
};

/// Monte-Carlo averages over `samples` independent realizations; sample i
/// draws from its own substream so the result does not depend on the order
/// of evaluation.
SecondMoments estimate_Q(const ExtendedSystem& sys, int samples, std::uint64_t seed);

enum class FOrder {
    first,   // drops the mu^2 term
    second,  // keeps mu^2 (R_e (x)_b R_e), factorizing the fourth moment
};

/// F = Q_B (I - mu (I (x)_b R_e) - mu (R_e (x)_b I) [+ mu^2 R_e (x)_b R_e]) Q_A.
SparseMatrix build_F(const ExtendedSystem& sys, double mu, const SecondMoments& q,
                     FOrder order = FOrder::second);

struct SpectralEstimate {
    double radius = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Power iteration from a fixed start vector; stops when successive
/// estimates agree to `tolerance` (relative) or after `max_iterations`.
SpectralEstimate spectral_radius(const SparseMatrix& m, double tolerance = 1e-8,
                                 int max_iterations = 10000);

/// Largest eigenvalue of a symmetric positive semidefinite matrix.
double max_eigenvalue(const Eigen::MatrixXd& symmetric, double tolerance = 1e-12,
                      int max_iterations = 100000);

struct StepSizeBounds {
    double max_eigenvalue = 0.0;
    double mean = 0.0;          // 2 / max lambda
    double mean_square = 0.0;   // 1 / max lambda
};

StepSizeBounds step_size_bounds(const std::vector<Eigen::MatrixXd>& correlations);

/// E[z z^T] over `samples` inputs drawn like the stream inputs of `config`.
Eigen::MatrixXd estimate_correlation(const FeatureMap& fm, const StreamConfig& config,
                                     int samples, std::uint64_t seed);

/// E[w~_{e,n+1}] = E[B] (I - mu R_e) E[A] E[w~_{e,n}]; element 0 is `initial`.
std::vector<Eigen::VectorXd> mean_trajectory(const ExtendedSystem& sys, double mu,
                                             const Eigen::MatrixXd& mean_a,
                                             const Eigen::MatrixXd& mean_b,
                                             const Eigen::VectorXd& initial, int iterations);

/// h = Q_B bvec(E[Phi]), E[Phi] = blockdiag{0, s_1^2 R_1, ..., s_K^2 R_K, 0...}.
Eigen::VectorXd noise_vector(const ExtendedSystem& sys, const SecondMoments& q);

/// bvec(blockdiag{I_D, 0, ..., 0}): weights selecting the server block.
Eigen::VectorXd server_selector(const ExtendedSystem& sys);

/// E||w~_n||^2 of the server model for n = 0..iterations-1, starting from the
/// deterministic extended error `initial_error`.
std::vector<double> msd_transient(const ExtendedSystem& sys, double mu, const SparseMatrix& f,
                                  const Eigen::VectorXd& h, const Eigen::VectorXd& initial_error,
                                  int iterations);

struct SteadyState {
    double msd = 0.0;
    double spectral_radius = 0.0;
    double condition_estimate = 0.0;
};

/// mu^2 h^T (I - F^T)^{-1} bvec(blockdiag{I_D, 0, ...}). Throws
/// NoSteadyStateError when rho(F) >= 1.
SteadyState msd_steady_state(const ExtendedSystem& sys, double mu, const SparseMatrix& f,
                             const Eigen::VectorXd& h);

/// One step of the extended recursion: w_e <- B (A w_e + mu Z e)
/// with e_k = y_k - z_k^T (A w_e)_k. `features[k]`, `targets[k]` are client
/// k's sample.
Eigen::VectorXd extended_update(const ExtendedSystem& sys, const SparseMatrix& a,
                                const SparseMatrix& b, const std::vector<Eigen::VectorXd>& features,
                                const Eigen::VectorXd& targets, double mu,
                                const Eigen::VectorXd& state);

struct MsdPrediction {
    std::vector<double> transient;
    double steady_state = 0.0;
    double spectral_radius = 0.0;
    double mu_bound_mean = 0.0;
    double mu_bound_ms = 0.0;
    double condition_estimate = 0.0;
};

/// Full pipeline: Q estimation, F, transient from w~_0 = 1 (x) w_star, and
/// the steady state.
MsdPrediction predict_msd(const ExtendedSystem& sys, double mu, const Eigen::VectorXd& w_star,
                          int iterations, int q_samples, std::uint64_t seed,
                          FOrder order = FOrder::second);

}  // namespace paofed
