#include "paofed/fed_algorithms.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

namespace paofed {

VariantConfig VariantConfig::named(std::string_view name) {
    if (name.size() != 2) throw std::invalid_argument("unknown PAO-Fed variant: " + std::string(name));
    VariantConfig v;
    switch (std::toupper(static_cast<unsigned char>(name[0]))) {
        case 'C': v.coordination = Coordination::coordinated; break;
        case 'U': v.coordination = Coordination::uncoordinated; break;
        default: throw std::invalid_argument("unknown PAO-Fed variant: " + std::string(name));
    }
    switch (name[1]) {
        case '0': v.uplink = UplinkRule::echo; v.weights = WeightRule::flat; break;
        case '1': v.uplink = UplinkRule::shifted; v.weights = WeightRule::flat; break;
        case '2': v.uplink = UplinkRule::shifted; v.weights = WeightRule::decreasing; break;
        default: throw std::invalid_argument("unknown PAO-Fed variant: " + std::string(name));
    }
    v.autonomous_updates = true;
    return v;
}

std::vector<double> aggregation_weights(const VariantConfig& variant, int max_delay) {
    if (max_delay < 0) throw std::invalid_argument("maximum delay must be non-negative");
    if (!(variant.weight_base >= 0.0 && variant.weight_base <= 1.0))
        throw std::invalid_argument("weight base must lie in [0, 1]");
    std::vector<double> alpha(static_cast<std::size_t>(max_delay) + 1, 1.0);
    if (variant.weights == WeightRule::decreasing)
        for (int l = 1; l <= max_delay; ++l)
            alpha[static_cast<std::size_t>(l)] = std::pow(variant.weight_base, l);
    return alpha;
}

SelectionMask uplink_mask(const MaskScheduler& scheduler, UplinkRule rule, int client,
                          int iteration) {
    return scheduler.downlink(client, rule == UplinkRule::shifted ? iteration + 1 : iteration);
}

std::vector<double> client_step_available(ClientState& client, const SelectionMask& downlink,
                                          std::span<const double> server_values,
                                          const Eigen::Ref<const Eigen::VectorXd>& z, double y,
                                          const SelectionMask& uplink) {
    const Eigen::Index dim = client.model.size();
    if (z.size() != dim || downlink.dim() != dim || uplink.dim() != dim)
        throw std::invalid_argument("client step dimensions do not match the model");
    if (server_values.size() != static_cast<std::size_t>(downlink.size()))
        throw std::invalid_argument("server values do not match the downlink mask");

    const auto& down = downlink.indices();
    for (std::size_t i = 0; i < down.size(); ++i) client.model(down[i]) = server_values[i];
    const double e = y - client.model.dot(z);
    client.model += (client.step_size * e) * z;

    std::vector<double> payload;
    payload.reserve(static_cast<std::size_t>(uplink.size()));
    for (int j : uplink.indices()) payload.push_back(client.model(j));
    return payload;
}

void client_step_autonomous(ClientState& client, const Eigen::Ref<const Eigen::VectorXd>& z,
                            double y) {
    if (z.size() != client.model.size())
        throw std::invalid_argument("feature length does not match the model");
    const double e = y - client.model.dot(z);
    client.model += (client.step_size * e) * z;
}

Eigen::VectorXd compute_deviation(const std::vector<InFlightMessage>& group,
                                  const Eigen::VectorXd& server) {
    Eigen::VectorXd d = Eigen::VectorXd::Zero(server.size());
    if (group.empty()) return d;
    for (const auto& msg : group) {
        if (msg.mask.dim() != server.size())
            throw std::invalid_argument("message mask does not match the model");
        const auto& idx = msg.mask.indices();
        for (std::size_t i = 0; i < idx.size(); ++i) d(idx[i]) += msg.payload[i] - server(idx[i]);
    }
    return d / static_cast<double>(group.size());
}

void server_aggregate(Eigen::VectorXd& server, const std::map<int, Eigen::VectorXd>& deviations,
                      std::span<const double> weights) {
    for (const auto& [l, d] : deviations) {
        if (l < 0 || static_cast<std::size_t>(l) >= weights.size()) continue;
        const double a = weights[static_cast<std::size_t>(l)];
        if (a != 0.0) server += a * d;
    }
}

std::vector<char> sample_subset(std::vector<int>& pool, int subset_size, Rng& rng) {
    const int n = static_cast<int>(pool.size());
    std::vector<char> picked(pool.size(), 0);
    if (subset_size >= n) {
        std::fill(picked.begin(), picked.end(), 1);
        return picked;
    }
    for (int i = 0; i < subset_size; ++i) {
        std::uniform_int_distribution<int> pick(i, n - 1);
        std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(pick(rng))]);
        picked[static_cast<std::size_t>(pool[static_cast<std::size_t>(i)])] = 1;
    }
    return picked;
}

namespace {

std::vector<int> iota_pool(int n) {
    std::vector<int> pool(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
    return pool;
}

std::vector<ClientState> fresh_clients(int clients, int dim, double step_size) {
    if (clients < 1) throw std::invalid_argument("need at least one client");
    if (!(step_size > 0.0)) throw std::invalid_argument("step size must be positive");
    return std::vector<ClientState>(static_cast<std::size_t>(clients),
                                    ClientState{Eigen::VectorXd::Zero(dim), step_size});
}

}  // namespace

PaoFed::PaoFed(std::string id, int dim, int clients, int mask_size, double step_size,
               VariantConfig variant, int max_delay)
    : FederatedAlgorithm(std::move(id), dim),
      scheduler_(dim, mask_size, variant.coordination),
      variant_(variant),
      weights_(aggregation_weights(variant, max_delay)),
      clients_(fresh_clients(clients, dim, step_size)) {}

const Eigen::VectorXd& PaoFed::client_model(int k) const {
    return clients_.at(static_cast<std::size_t>(k)).model;
}

void PaoFed::step(int n, std::span<const ArrivingSample> samples) {
    const int dim = static_cast<int>(server_.size());
    std::vector<double> values;
    for (const auto& s : samples) {
        ClientState& client = clients_.at(static_cast<std::size_t>(s.client));
        const double y = s.event->target;
        if (!s.draw->available) {
            if (variant_.autonomous_updates) client_step_autonomous(client, *s.features, y);
            continue;
        }
        const SelectionMask down = variant_.full_downlink ? SelectionMask::full(dim)
                                                          : scheduler_.downlink(s.client, n);
        values.clear();
        for (int j : down.indices()) values.push_back(server_(j));
        SelectionMask up = uplink_mask(scheduler_, variant_.uplink, s.client, n);
        std::vector<double> payload =
            client_step_available(client, down, values, *s.features, y, up);

        counters_.downlink_params += down.size();
        counters_.downlink_messages += 1;
        counters_.uplink_params += up.size();
        counters_.uplink_messages += 1;
        if (s.draw->delay)
            queue_.enqueue(InFlightMessage{s.client, n, n + *s.draw->delay, std::move(up),
                                           std::move(payload)},
                           n);
    }

    const Delivery arrived = resolve_conflicts(queue_.deliver(n), variant_.tie_rule);
    std::map<int, Eigen::VectorXd> deviations;
    for (const auto& [l, group] : arrived) deviations.emplace(l, compute_deviation(group, server_));
    server_aggregate(server_, deviations, weights_);
}

OnlineFed::OnlineFed(std::string id, int dim, int clients, double step_size, int subset_size,
                     std::uint64_t selection_seed)
    : FederatedAlgorithm(std::move(id), dim),
      clients_(clients),
      step_size_(step_size),
      subset_size_(subset_size),
      selection_(make_stream(selection_seed, "selection")),
      pool_(iota_pool(clients)) {
    if (clients < 1) throw std::invalid_argument("need at least one client");
    if (!(step_size > 0.0)) throw std::invalid_argument("step size must be positive");
    if (subset_size < 0) throw std::invalid_argument("subset size must be non-negative");
}

void OnlineFed::step(int n, std::span<const ArrivingSample> samples) {
    const int dim = static_cast<int>(server_.size());
    const std::vector<char> picked = sample_subset(pool_, subset_size_, selection_);
    for (const auto& s : samples) {
        if (!picked.at(static_cast<std::size_t>(s.client)) || !s.draw->available) continue;
        const Eigen::VectorXd& z = *s.features;
        const double e = s.event->target - server_.dot(z);
        Eigen::VectorXd local = server_ + (step_size_ * e) * z;

        counters_.downlink_params += dim;
        counters_.downlink_messages += 1;
        counters_.uplink_params += dim;
        counters_.uplink_messages += 1;
        if (s.draw->delay)
            queue_.enqueue(InFlightMessage{s.client, n, n + *s.draw->delay, SelectionMask::full(dim),
                                           std::vector<double>(local.data(), local.data() + dim)},
                           n);
    }

    const Delivery arrived = queue_.deliver(n);
    if (arrived.empty()) return;
    // Full-model uploads all overlap, so only the most recent group counts.
    const auto& group = arrived.begin()->second;
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
    for (const auto& msg : group) mean += Eigen::Map<const Eigen::VectorXd>(msg.payload.data(), dim);
    server_ = mean / static_cast<double>(group.size());
}

PsoFed::PsoFed(std::string id, int dim, int clients, int mask_size, double step_size,
               int subset_size, Coordination coordination, std::uint64_t selection_seed)
    : FederatedAlgorithm(std::move(id), dim),
      scheduler_(dim, mask_size, coordination),
      subset_size_(subset_size),
      selection_(make_stream(selection_seed, "selection")),
      pool_(iota_pool(clients)),
      clients_(fresh_clients(clients, dim, step_size)) {
    if (subset_size < 0) throw std::invalid_argument("subset size must be non-negative");
}

void PsoFed::step(int n, std::span<const ArrivingSample> samples) {
    const std::vector<char> picked = sample_subset(pool_, subset_size_, selection_);
    std::vector<double> values;
    for (const auto& s : samples) {
        ClientState& client = clients_.at(static_cast<std::size_t>(s.client));
        const double y = s.event->target;
        if (!picked.at(static_cast<std::size_t>(s.client)) || !s.draw->available) {
            client_step_autonomous(client, *s.features, y);
            continue;
        }
        const SelectionMask down = scheduler_.downlink(s.client, n);
        values.clear();
        for (int j : down.indices()) values.push_back(server_(j));
        SelectionMask up = uplink_mask(scheduler_, UplinkRule::shifted, s.client, n);
        std::vector<double> payload =
            client_step_available(client, down, values, *s.features, y, up);

        counters_.downlink_params += down.size();
        counters_.downlink_messages += 1;
        counters_.uplink_params += up.size();
        counters_.uplink_messages += 1;
        if (s.draw->delay)
            queue_.enqueue(InFlightMessage{s.client, n, n + *s.draw->delay, std::move(up),
                                           std::move(payload)},
                           n);
    }

    Delivery arrived = queue_.deliver(n);
    std::vector<InFlightMessage> all;
    for (auto& [l, group] : arrived)
        for (auto& msg : group) all.push_back(std::move(msg));
    if (!all.empty()) server_ += compute_deviation(all, server_);
}

void simulate(std::span<FederatedAlgorithm* const> algorithms, const StreamPlan& plan,
              const EnvironmentTrace& trace, const FeatureMap& fm,
              const std::function<void(int)>& after_iteration) {
    const int horizon = plan.horizon;
    std::vector<std::vector<std::pair<int, std::size_t>>> by_iteration(
        static_cast<std::size_t>(horizon));
    for (int k = 0; k < plan.client_count(); ++k) {
        const auto& events = plan.clients[static_cast<std::size_t>(k)];
        for (std::size_t i = 0; i < events.size(); ++i) {
            const int n = events[i].iteration;
            if (n < 0 || n >= horizon) throw std::invalid_argument("sample outside the horizon");
            by_iteration[static_cast<std::size_t>(n)].emplace_back(k, i);
        }
    }

    std::vector<Eigen::VectorXd> features;
    std::vector<ArrivingSample> samples;
    for (int n = 0; n < horizon; ++n) {
        const auto& due = by_iteration[static_cast<std::size_t>(n)];
        features.resize(due.size());
        samples.clear();
        for (std::size_t i = 0; i < due.size(); ++i) {
            const auto [k, e] = due[i];
            const SampleEvent& ev = plan.clients[static_cast<std::size_t>(k)][e];
            features[i].resize(fm.dim_out());
            fm.map_into(ev.input, features[i]);
            samples.push_back(ArrivingSample{k, &ev, &trace.at(k, e), &features[i]});
        }
        for (FederatedAlgorithm* a : algorithms) a->step(n, samples);
        if (after_iteration) after_iteration(n);
    }
}

}  // namespace paofed
