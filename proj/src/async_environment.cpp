#include "paofed/async_environment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace paofed {

AvailabilityModel AvailabilityModel::grouped(int clients, int data_groups,
                                             const std::vector<double>& group_probabilities) {
    if (clients < 1 || data_groups < 1 || clients % data_groups != 0)
        throw std::invalid_argument("clients must split evenly into data groups");
    if (group_probabilities.empty())
        throw std::invalid_argument("need at least one availability group");
    for (double p : group_probabilities)
        if (!(p >= 0.0 && p <= 1.0))
            throw std::invalid_argument("availability probabilities must lie in [0, 1]");
    const int per_group = clients / data_groups;
    const int a = static_cast<int>(group_probabilities.size());
    AvailabilityModel m;
    m.client_probability.resize(static_cast<std::size_t>(clients));
    for (int k = 0; k < clients; ++k) {
        const int rank = k % per_group;
        const int group = static_cast<int>(static_cast<long long>(rank) * a / per_group);
        m.client_probability[static_cast<std::size_t>(k)] =
            group_probabilities[static_cast<std::size_t>(group)];
    }
    return m;
}

AvailabilityModel AvailabilityModel::constant(int clients, double p) {
    if (!(p >= 0.0 && p <= 1.0))
        throw std::invalid_argument("availability probability must lie in [0, 1]");
    return AvailabilityModel{std::vector<double>(static_cast<std::size_t>(clients), p)};
}

double AvailabilityModel::probability(int client, int /*iteration*/, bool has_data) const {
    if (!has_data) return 0.0;
    return client_probability.at(static_cast<std::size_t>(client));
}

bool sample_availability(const AvailabilityModel& model, int client, int iteration,
                         bool has_data, Rng& rng) {
    const double p = model.probability(client, iteration, has_data);
    // One uniform per call keeps the stream aligned whatever p is.
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    return u < p;
}

void DelayModel::validate() const {
    if (!(tail >= 0.0 && tail < 1.0)) throw std::invalid_argument("delay tail must lie in [0, 1)");
    if (cutoff < 0) throw std::invalid_argument("maximum delay must be non-negative");
    if (step < 1) throw std::invalid_argument("delay step must be positive");
}

double DelayModel::survival(int delay) const {
    if (delay <= 0) return 1.0;
    const int j = (delay + step - 1) / step;
    return std::pow(tail, j);
}

double DelayModel::probability(int delay) const {
    if (delay < 0 || delay > cutoff || delay % step != 0) return 0.0;
    return std::pow(tail, delay / step) * (1.0 - tail);
}

std::optional<int> sample_delay(const DelayModel& model, Rng& rng) {
    if (model.tail == 0.0) {
        // Keep one draw per call so streams stay aligned across tail values.
        (void)std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        return 0;
    }
    // Inverse-CDF: G = floor(log(u) / log(tail)), P(G >= j) = tail^j.
    double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    if (u <= 0.0) u = std::numeric_limits<double>::min();
    const double g = std::floor(std::log(u) / std::log(model.tail));
    if (g > static_cast<double>(model.cutoff / model.step)) return std::nullopt;
    const int delay = model.step * static_cast<int>(g);
    if (delay > model.cutoff) return std::nullopt;
    return delay;
}

void MessageQueue::enqueue(InFlightMessage msg, int current_iteration) {
    if (msg.delivery_iteration < current_iteration || msg.delivery_iteration < msg.send_iteration)
        throw std::invalid_argument("message delivery lies in the past");
    if (static_cast<std::size_t>(msg.mask.size()) != msg.payload.size())
        throw std::invalid_argument("mask and payload sizes differ");
    const int key = msg.delivery_iteration;
    pending_.emplace(key, std::move(msg));
}

Delivery MessageQueue::deliver(int iteration) {
    Delivery out;
    auto [first, last] = pending_.equal_range(iteration);
    for (auto it = first; it != last; ++it) {
        auto& msg = it->second;
        out[msg.delay()].push_back(std::move(msg));
    }
    pending_.erase(first, last);
    for (auto& [l, group] : out)
        std::stable_sort(group.begin(), group.end(),
                         [](const auto& a, const auto& b) { return a.client_id < b.client_id; });
    return out;
}

Delivery resolve_conflicts(Delivery delivered, TieRule rule) {
    // Winning (delay, client) per coordinate; std::map iterates delays in
    // increasing order, so the first claim seen has the smallest delay.
    std::map<int, std::pair<int, int>> owner;
    for (const auto& [l, group] : delivered)
        for (const auto& msg : group)
            for (int j : msg.mask.indices()) {
                auto [it, inserted] = owner.try_emplace(j, l, msg.client_id);
                if (!inserted && it->second.first == l && msg.client_id < it->second.second)
                    it->second.second = msg.client_id;
            }

    Delivery out;
    for (auto& [l, group] : delivered) {
        std::vector<InFlightMessage> kept;
        for (auto& msg : group) {
            std::vector<int> idx;
            std::vector<double> values;
            const auto& src = msg.mask.indices();
            for (std::size_t i = 0; i < src.size(); ++i) {
                const auto& [best_l, best_client] = owner.at(src[i]);
                const bool keep = best_l == l &&
                                  (rule == TieRule::keep_all || best_client == msg.client_id);
                if (keep) {
                    idx.push_back(src[i]);
                    values.push_back(msg.payload[i]);
                }
            }
            if (idx.empty()) continue;
            if (idx.size() != src.size()) {
                msg.mask = SelectionMask(std::move(idx), msg.mask.dim());
                msg.payload = std::move(values);
            }
            kept.push_back(std::move(msg));
        }
        if (!kept.empty()) out.emplace(l, std::move(kept));
    }
    return out;
}

EnvironmentTrace EnvironmentTrace::generate(const StreamPlan& plan,
                                            const AvailabilityModel& availability,
                                            const DelayModel& delay, std::uint64_t run_seed) {
    delay.validate();
    if (static_cast<int>(availability.client_probability.size()) != plan.client_count())
        throw std::invalid_argument("availability model does not cover every client");
    EnvironmentTrace t;
    t.draws_.resize(plan.clients.size());
    for (int k = 0; k < plan.client_count(); ++k) {
        Rng avail = make_stream(run_seed, "availability", static_cast<std::uint64_t>(k));
        Rng lag = make_stream(run_seed, "delay", static_cast<std::uint64_t>(k));
        const auto& events = plan.clients[static_cast<std::size_t>(k)];
        auto& draws = t.draws_[static_cast<std::size_t>(k)];
        draws.reserve(events.size());
        for (const auto& e : events) {
            ClientDraw d;
            d.available = sample_availability(availability, k, e.iteration, true, avail);
            d.delay = sample_delay(delay, lag);
            draws.push_back(d);
        }
    }
    return t;
}

const ClientDraw& EnvironmentTrace::at(int client, std::size_t event) const {
    return draws_.at(static_cast<std::size_t>(client)).at(event);
}

std::string EnvironmentTrace::to_csv(const StreamPlan& plan) const {
    std::vector<std::tuple<int, int, std::string, int>> rows;
    for (int k = 0; k < plan.client_count(); ++k) {
        const auto& events = plan.clients[static_cast<std::size_t>(k)];
        for (std::size_t i = 0; i < events.size(); ++i) {
            const ClientDraw& d = at(k, i);
            if (!d.available) rows.emplace_back(events[i].iteration, k, "unavailable", -1);
            else if (!d.delay) rows.emplace_back(events[i].iteration, k, "discarded", -1);
            else rows.emplace_back(events[i].iteration, k, "sent", *d.delay);
        }
    }
    std::sort(rows.begin(), rows.end());
    std::ostringstream out;
    out << "iteration,client,event,delay\n";
    for (const auto& [n, k, ev, l] : rows) {
        out << n << ',' << k << ',' << ev << ',';
        if (l >= 0) out << l;
        out << '\n';
    }
    return out.str();
}

}  // namespace paofed
