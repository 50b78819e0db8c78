#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "paofed/random.hpp"
#include "paofed/selection_mask.hpp"
#include "paofed/stream_data.hpp"

namespace paofed {

/// Per-client participation probability, constant over time. A client that
/// receives no data at an iteration cannot participate there.
struct AvailabilityModel {
    std::vector<double> client_probability;

    /// Clients of each data group are split evenly over the availability
    /// groups in order; client k of a group of size G gets
    /// group_probabilities[floor(i * A / G)] where i is its rank in the group.
    static AvailabilityModel grouped(int clients, int data_groups,
                                     const std::vector<double>& group_probabilities);
    static AvailabilityModel constant(int clients, double p);

    double probability(int client, int iteration, bool has_data) const;
};

bool sample_availability(const AvailabilityModel& model, int client, int iteration,
                         bool has_data, Rng& rng);

/// Client-to-server delay: delay = step * G with G geometric on {0, 1, ...}
/// with success probability 1 - tail, so P(delay >= l) = tail^(l / step) for
/// l a multiple of step. Delays above `cutoff` are discarded.
struct DelayModel {
    double tail = 0.2;
    int cutoff = 10;
    int step = 1;

    void validate() const;
    /// P(delay >= step * j) = tail^j.
    double survival(int delay) const;
    /// P(delay == d), zero for d not a multiple of step or d > cutoff.
    double probability(int delay) const;
};

/// Returns the sampled delay, or std::nullopt when it exceeds the cutoff.
std::optional<int> sample_delay(const DelayModel& model, Rng& rng);

struct InFlightMessage {
    int client_id = 0;
    int send_iteration = 0;
    int delivery_iteration = 0;
    SelectionMask mask;
    std::vector<double> payload;

    int delay() const { return delivery_iteration - send_iteration; }
};

/// Messages arriving at one iteration, grouped by delay l (the sets K_{n,l}).
using Delivery = std::map<int, std::vector<InFlightMessage>>;

class MessageQueue {
public:
    /// Throws std::invalid_argument if the message would arrive in the past
    /// or its mask and payload sizes differ.
    void enqueue(InFlightMessage msg, int current_iteration);
    /// Removes and returns every message due at `iteration`.
    Delivery deliver(int iteration);
    std::size_t in_flight() const { return pending_.size(); }

private:
    std::multimap<int, InFlightMessage> pending_;
};

enum class TieRule {
    /// Every message sharing the smallest delay keeps the coordinate.
    keep_all,
    /// Only the lowest client id among the smallest-delay messages keeps it.
    lowest_client,
};

/// Keeps each coordinate only in the most recent (smallest delay) messages
/// claiming it, shrinking masks and payloads; emptied messages and empty
/// groups are removed.
Delivery resolve_conflicts(Delivery delivered, TieRule rule = TieRule::keep_all);

struct ClientDraw {
    bool available = false;
    std::optional<int> delay;

    friend bool operator==(const ClientDraw&, const ClientDraw&) = default;
};

/// Pre-drawn availability and delay for every data-bearing (client,
/// iteration) pair of a run, shared by every algorithm under comparison.
class EnvironmentTrace {
public:
    static EnvironmentTrace generate(const StreamPlan& plan,
                                     const AvailabilityModel& availability,
                                     const DelayModel& delay, std::uint64_t run_seed);

    /// Draw for the `event`-th sample of `client`.
    const ClientDraw& at(int client, std::size_t event) const;

    /// CSV rows "iteration,client,event,delay" in iteration order.
    std::string to_csv(const StreamPlan& plan) const;

    friend bool operator==(const EnvironmentTrace&, const EnvironmentTrace&) = default;

private:
    std::vector<std::vector<ClientDraw>> draws_;
};

}  // namespace paofed
