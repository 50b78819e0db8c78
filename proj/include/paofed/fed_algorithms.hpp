#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "paofed/async_environment.hpp"
#include "paofed/random.hpp"
#include "paofed/rff_feature_map.hpp"
#include "paofed/selection_mask.hpp"
#include "paofed/stream_data.hpp"

namespace paofed {

enum class UplinkRule {
    echo,     // S_{k,n} = M_{k,n}: send back the portion just received
    shifted,  // S_{k,n} = M_{k,n+1}: send the portion refined the longest
};

enum class WeightRule { flat, decreasing };

/// Knobs distinguishing the PAO-Fed versions. named() maps the C0..U2 labels.
struct VariantConfig {
    Coordination coordination = Coordination::uncoordinated;
    UplinkRule uplink = UplinkRule::shifted;
    WeightRule weights = WeightRule::flat;
    double weight_base = 0.2;
    bool autonomous_updates = true;
    /// Server sends its whole model (M = I); the uplink schedule is unchanged.
    bool full_downlink = false;
    TieRule tie_rule = TieRule::keep_all;

    /// "C0", "C1", "C2", "U0", "U1", "U2" (case-insensitive).
    static VariantConfig named(std::string_view name);
};

/// alpha_0..alpha_{max_delay}: all ones for flat weights, base^l otherwise.
std::vector<double> aggregation_weights(const VariantConfig& variant, int max_delay);

SelectionMask uplink_mask(const MaskScheduler& scheduler, UplinkRule rule, int client,
                          int iteration);

struct ClientState {
    Eigen::VectorXd model;
    double step_size = 0.0;
};

/// Merges the received coordinates into the local model, takes one LMS step
/// on (z, y) against the merged model and returns the `uplink` entries of the
/// result.
std::vector<double> client_step_available(ClientState& client, const SelectionMask& downlink,
                                          std::span<const double> server_values,
                                          const Eigen::Ref<const Eigen::VectorXd>& z, double y,
                                          const SelectionMask& uplink);

/// Local LMS step without communication.
void client_step_autonomous(ClientState& client, const Eigen::Ref<const Eigen::VectorXd>& z,
                            double y);

/// Average masked deviation of one delay group from the server model; zero
/// for an empty group.
Eigen::VectorXd compute_deviation(const std::vector<InFlightMessage>& group,
                                  const Eigen::VectorXd& server);

/// w += sum_l alpha_l * deviation_l. Deviations for delays beyond the weight
/// vector are ignored (alpha_l = 0).
void server_aggregate(Eigen::VectorXd& server, const std::map<int, Eigen::VectorXd>& deviations,
                      std::span<const double> weights);

struct CommCounters {
    std::int64_t uplink_params = 0;
    std::int64_t downlink_params = 0;
    std::int64_t uplink_messages = 0;
    std::int64_t downlink_messages = 0;
};

/// A data sample arriving at a client in the current iteration together with
/// its pre-drawn environment outcome.
struct ArrivingSample {
    int client = 0;
    const SampleEvent* event = nullptr;
    const ClientDraw* draw = nullptr;
    const Eigen::VectorXd* features = nullptr;
};

class FederatedAlgorithm {
public:
    virtual ~FederatedAlgorithm() = default;

    /// Processes iteration n: client updates for the arriving samples, then
    /// server aggregation of whatever reaches the server at n.
    virtual void step(int iteration, std::span<const ArrivingSample> samples) = 0;

    const Eigen::VectorXd& server_model() const { return server_; }
    const CommCounters& counters() const { return counters_; }
    const std::string& id() const { return id_; }

protected:
    FederatedAlgorithm(std::string id, int dim) : server_(Eigen::VectorXd::Zero(dim)), id_(std::move(id)) {}

    Eigen::VectorXd server_;
    CommCounters counters_;
    MessageQueue queue_;

private:
    std::string id_;
};

class PaoFed final : public FederatedAlgorithm {
public:
    PaoFed(std::string id, int dim, int clients, int mask_size, double step_size,
           VariantConfig variant, int max_delay);

    void step(int iteration, std::span<const ArrivingSample> samples) override;

    const Eigen::VectorXd& client_model(int k) const;
    const std::vector<double>& weights() const { return weights_; }
    const VariantConfig& variant() const { return variant_; }

private:
    MaskScheduler scheduler_;
    VariantConfig variant_;
    std::vector<double> weights_;
    std::vector<ClientState> clients_;
};

/// Server picks `subset_size` clients per iteration (all when >= K, which is
/// Online-FedSGD); the picked clients that are available and hold data run one
/// LMS step from the global model and upload full models. The server replaces
/// its model by the mean of the most recent arrivals.
class OnlineFed final : public FederatedAlgorithm {
public:
    OnlineFed(std::string id, int dim, int clients, double step_size, int subset_size,
              std::uint64_t selection_seed);

    void step(int iteration, std::span<const ArrivingSample> samples) override;

private:
    int clients_;
    double step_size_;
    int subset_size_;
    Rng selection_;
    std::vector<int> pool_;
};

/// Partial-sharing online FL with server-side client subsampling. Picked,
/// available clients exchange masked models; every other data-bearing client
/// updates locally. Arrivals are aggregated with unit weight as if undelayed.
class PsoFed final : public FederatedAlgorithm {
public:
    PsoFed(std::string id, int dim, int clients, int mask_size, double step_size,
           int subset_size, Coordination coordination, std::uint64_t selection_seed);

    void step(int iteration, std::span<const ArrivingSample> samples) override;

private:
    MaskScheduler scheduler_;
    int subset_size_;
    Rng selection_;
    std::vector<int> pool_;
    std::vector<ClientState> clients_;
};

/// Draws `subset_size` distinct clients out of `pool` (partial Fisher-Yates);
/// returns a per-client membership flag.
std::vector<char> sample_subset(std::vector<int>& pool, int subset_size, Rng& rng);

/// Runs the algorithms in lock-step over the plan; RFF features of each
/// sample are computed once and shared. `after_iteration(n)` is called once
/// every algorithm has finished iteration n.
void simulate(std::span<FederatedAlgorithm* const> algorithms, const StreamPlan& plan,
              const EnvironmentTrace& trace, const FeatureMap& fm,
              const std::function<void(int)>& after_iteration = {});

}  // namespace paofed
