#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "mcwlan/metrics.hpp"
#include "mcwlan/params.hpp"

namespace mcwlan {

enum class SimMode {
  /// Each requester succeeds independently with x = (1 - 1/k)^(N_ave - 1),
  /// N_ave being the running mean of realized active counts in this
  /// replication.
  MeanField,
  /// A requester succeeds iff it is alone on its uniformly chosen channel.
  ExactCollision
};

enum class CollideSemantics {
  /// Collided user retransmits w.p. c; success -> st0, anything else -> idle.
  PaperChain,
  /// Collided user retransmits w.p. c; it stays in collide until it succeeds.
  NaturalBackoff
};

std::string_view to_string(SimMode mode);
std::string_view to_string(CollideSemantics semantics);
SimMode parse_sim_mode(std::string_view text);
CollideSemantics parse_collide_semantics(std::string_view text);

struct SimConfig {
  std::int64_t slots = 100000;
  std::optional<std::int64_t> warmup;  // defaults to slots / 10
  std::uint64_t seed = 1;
  int replications = 10;
  SimMode mode = SimMode::MeanField;
  CollideSemantics collide_semantics = CollideSemantics::PaperChain;

  std::int64_t effective_warmup() const { return warmup.value_or(slots / 10); }

  bool operator==(const SimConfig&) const = default;
};

SimConfig validate(const SimConfig& cfg);

/// Seed of replication r: splitmix64(seed + (r + 1) * 0x9E3779B97F4A7C15).
std::uint64_t replication_seed(std::uint64_t seed, int replication);

struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;  // across replications; 0 for a single replication
};

/// Totals of one replication over its post-warmup slots.
struct ReplicationResult {
  std::uint64_t seed = 0;
  std::int64_t measured_slots = 0;
  std::vector<std::int64_t> state_counts;  // user-slots per state, same order as state_vector
  double busy_capped_sum = 0.0;            // sum over slots of min(#transmitting, k)
  double first_capped_sum = 0.0;           // sum over slots of min(#st0, k)
  std::int64_t attempts = 0;               // request + retransmission attempts
  std::int64_t successes = 0;              // attempts that obtained a channel

  std::vector<double> occupancy() const;
};

struct SimEstimate {
  Estimate idle;
  Estimate collide;
  std::vector<Estimate> transmit;
  Estimate transmit_total;
  /// Mean per-slot min(#users in a transmit state, k).
  Estimate throughput;
  /// Mean per-slot min(#users in st0, k).
  Estimate throughput_first;
  /// New channel grants per slot.
  Estimate request_successes;
  /// successes / attempts
  Estimate success_prob;
  /// Request acceptance evaluated per replication from `throughput`.
  Estimate request_acceptance;

  std::int64_t slots = 0;
  std::int64_t warmup = 0;
  int replications = 0;
  std::uint64_t seed = 0;
  std::vector<ReplicationResult> runs;
};

/// Snapshot handed to a SlotObserver after each slot's transitions.
struct SlotRecord {
  int replication;
  std::int64_t slot;
  int active;                               // requesters this slot
  int successes;                            // requesters that obtained a channel
  const std::vector<int>* state_counts;     // users per state after the slot
};
using SlotObserver = std::function<void(const SlotRecord&)>;

/// Slot-level simulation of N user state machines against k request
/// channels. Replications run concurrently unless an observer is given; the
/// result is bit-identical for a fixed (params, cfg) either way.
SimEstimate simulate(const ModelParams& params, const SimConfig& cfg,
                     const SlotObserver& observer = {});

/// Request and data metrics with empirical occupancies substituted.
std::pair<RequestMetrics, DataMetrics> estimate_metrics(
    const SimEstimate& est, const ModelParams& params,
    TransmitOccupancy occupancy = TransmitOccupancy::AllAttempts);

}  // namespace mcwlan
