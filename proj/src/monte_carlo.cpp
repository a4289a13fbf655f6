#include "mcwlan/monte_carlo.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <future>
#include <random>
#include <string>

#include "mcwlan/equilibrium.hpp"
#include "mcwlan/errors.hpp"

namespace mcwlan {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Uniform doubles and bounded integers with platform-independent output.
class Stream {
 public:
  explicit Stream(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  std::uint32_t below(std::uint32_t bound) {
    return static_cast<std::uint32_t>(((engine_() >> 32) * bound) >> 32);
  }

 private:
  std::mt19937_64 engine_;
};

enum State : int { kIdle = 0, kCollide = 1, kTransmit0 = 2 };

ReplicationResult run_replication(const ModelParams& params, const SimConfig& cfg, int index,
                                  const SlotObserver& observer) {
  const int n_users = params.n_users;
  const int k = params.request_channels;
  const int n = params.max_attempts;
  const double a = params.request_prob;
  const double c = params.retx_prob;
  const double e = frame_error_prob(params);
  const int last_transmit = kTransmit0 + n - 1;
  const std::int64_t warmup = cfg.effective_warmup();
  const bool natural = cfg.collide_semantics == CollideSemantics::NaturalBackoff;

  ReplicationResult out;
  out.seed = replication_seed(cfg.seed, index);
  out.state_counts.assign(static_cast<std::size_t>(n + 2), 0);
  Stream rng(out.seed);

  std::vector<int> state(static_cast<std::size_t>(n_users), kIdle);
  std::vector<char> active(state.size(), 0);
  std::vector<char> granted(state.size(), 0);
  std::vector<int> channel(state.size(), 0);
  std::vector<int> per_channel(static_cast<std::size_t>(k), 0);
  std::vector<int> counts(static_cast<std::size_t>(n + 2), 0);
  double active_sum = 0.0;

  for (std::int64_t slot = 0; slot < cfg.slots; ++slot) {
    int n_active = 0;
    for (std::size_t u = 0; u < state.size(); ++u) {
      const double p = state[u] == kIdle ? a : state[u] == kCollide ? c : 0.0;
      active[u] = p > 0.0 && rng.uniform() < p;
      n_active += active[u];
    }

    int n_success = 0;
    if (cfg.mode == SimMode::MeanField) {
      active_sum += n_active;
      const double x = success_probability(k, active_sum / static_cast<double>(slot + 1));
      for (std::size_t u = 0; u < state.size(); ++u) {
        granted[u] = active[u] && rng.uniform() < x;
        n_success += granted[u];
      }
    } else {
      std::fill(per_channel.begin(), per_channel.end(), 0);
      for (std::size_t u = 0; u < state.size(); ++u) {
        if (!active[u]) continue;
        channel[u] = static_cast<int>(rng.below(static_cast<std::uint32_t>(k)));
        ++per_channel[static_cast<std::size_t>(channel[u])];
      }
      for (std::size_t u = 0; u < state.size(); ++u) {
        granted[u] = active[u] && per_channel[static_cast<std::size_t>(channel[u])] == 1;
        n_success += granted[u];
      }
    }

    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t u = 0; u < state.size(); ++u) {
      int& s = state[u];
      if (s == kIdle) {
        s = !active[u] ? kIdle : granted[u] ? kTransmit0 : kCollide;
      } else if (s == kCollide) {
        s = granted[u] ? kTransmit0 : natural ? kCollide : kIdle;
      } else if (s < last_transmit) {
        s = rng.uniform() < e ? s + 1 : kIdle;
      } else {
        s = kIdle;
      }
      ++counts[static_cast<std::size_t>(s)];
    }

    if (observer) observer({index, slot, n_active, n_success, &counts});
    if (slot < warmup) continue;

    ++out.measured_slots;
    int busy = 0;
    for (std::size_t s = 0; s < counts.size(); ++s) {
      out.state_counts[s] += counts[s];
      if (s >= kTransmit0) busy += counts[s];
    }
    out.busy_capped_sum += std::min(busy, k);
    out.first_capped_sum += std::min(counts[kTransmit0], k);
    out.attempts += n_active;
    out.successes += n_success;
  }
  return out;
}

Estimate summarize(const std::vector<double>& samples) {
  Estimate est;
  const auto r = static_cast<double>(samples.size());
  for (double v : samples) est.mean += v;
  est.mean /= r;
  if (samples.size() > 1) {
    double ss = 0.0;
    for (double v : samples) ss += (v - est.mean) * (v - est.mean);
    est.std_error = std::sqrt(ss / (r - 1.0) / r);
  }
  return est;
}

std::string lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return out;
}

}  // namespace

std::string_view to_string(SimMode mode) {
  return mode == SimMode::MeanField ? "mean-field" : "exact-collision";
}

std::string_view to_string(CollideSemantics semantics) {
  return semantics == CollideSemantics::PaperChain ? "paper-chain" : "natural-backoff";
}

SimMode parse_sim_mode(std::string_view text) {
  const auto t = lower(text);
  if (t == "mean-field" || t == "meanfield") return SimMode::MeanField;
  if (t == "exact-collision" || t == "exactcollision" || t == "exact") return SimMode::ExactCollision;
  throw ConfigError("unknown simulation mode '" + std::string(text) + "'");
}

CollideSemantics parse_collide_semantics(std::string_view text) {
  const auto t = lower(text);
  if (t == "paper-chain" || t == "paperchain") return CollideSemantics::PaperChain;
  if (t == "natural-backoff" || t == "naturalbackoff" || t == "natural")
    return CollideSemantics::NaturalBackoff;
  throw ConfigError("unknown collide semantics '" + std::string(text) + "'");
}

SimConfig validate(const SimConfig& cfg) {
  if (cfg.slots < 1) throw ConfigError("slots must be at least 1");
  const auto warmup = cfg.effective_warmup();
  if (warmup < 0 || warmup >= cfg.slots)
    throw ConfigError("warmup must lie in [0, slots), got " + std::to_string(warmup));
  if (cfg.replications < 1) throw ConfigError("replications must be at least 1");
  return cfg;
}

std::uint64_t replication_seed(std::uint64_t seed, int replication) {
  return splitmix64(seed + static_cast<std::uint64_t>(replication + 1) * 0x9E3779B97F4A7C15ULL);
}

std::vector<double> ReplicationResult::occupancy() const {
  std::int64_t total = 0;
  for (auto v : state_counts) total += v;
  std::vector<double> f(state_counts.size());
  for (std::size_t s = 0; s < f.size(); ++s)
    f[s] = static_cast<double>(state_counts[s]) / static_cast<double>(total);
  return f;
}

SimEstimate simulate(const ModelParams& params, const SimConfig& cfg,
                     const SlotObserver& observer) {
  validate(params);
  validate(cfg);

  std::vector<ReplicationResult> runs;
  runs.reserve(static_cast<std::size_t>(cfg.replications));
  if (observer) {
    for (int r = 0; r < cfg.replications; ++r)
      runs.push_back(run_replication(params, cfg, r, observer));
  } else {
    std::vector<std::future<ReplicationResult>> pending;
    for (int r = 0; r < cfg.replications; ++r)
      pending.push_back(std::async(std::launch::async, run_replication, std::cref(params),
                                   std::cref(cfg), r, std::cref(observer)));
    for (auto& f : pending) runs.push_back(f.get());
  }

  const std::size_t n_states = static_cast<std::size_t>(params.max_attempts) + 2;
  const double offered = params.n_users * params.request_prob;
  std::vector<std::vector<double>> per_state(n_states);
  std::vector<double> busy_total, throughput, throughput_first, successes, x_hat, acceptance;
  for (const auto& run : runs) {
    const auto occ = run.occupancy();
    double busy = 0.0;
    for (std::size_t s = 0; s < n_states; ++s) {
      per_state[s].push_back(occ[s]);
      if (s >= kFirstTransmitIndex) busy += occ[s];
    }
    busy_total.push_back(busy);
    const auto slots = static_cast<double>(run.measured_slots);
    throughput.push_back(run.busy_capped_sum / slots);
    throughput_first.push_back(run.first_capped_sum / slots);
    successes.push_back(static_cast<double>(run.successes) / slots);
    x_hat.push_back(run.attempts == 0 ? 1.0
                                      : static_cast<double>(run.successes) /
                                            static_cast<double>(run.attempts));
    acceptance.push_back(acceptance_from_throughput(throughput.back(), offered).acceptance);
  }

  SimEstimate est;
  est.idle = summarize(per_state[kIdleIndex]);
  est.collide = summarize(per_state[kCollideIndex]);
  for (std::size_t s = kFirstTransmitIndex; s < n_states; ++s)
    est.transmit.push_back(summarize(per_state[s]));
  est.transmit_total = summarize(busy_total);
  est.throughput = summarize(throughput);
  est.throughput_first = summarize(throughput_first);
  est.request_successes = summarize(successes);
  est.success_prob = summarize(x_hat);
  est.request_acceptance = summarize(acceptance);
  est.slots = cfg.slots;
  est.warmup = cfg.effective_warmup();
  est.replications = cfg.replications;
  est.seed = cfg.seed;
  est.runs = std::move(runs);
  return est;
}

std::pair<RequestMetrics, DataMetrics> estimate_metrics(const SimEstimate& est,
                                                        const ModelParams& params,
                                                        TransmitOccupancy occupancy) {
  const double offered = params.n_users * params.request_prob;
  const bool first = occupancy == TransmitOccupancy::FirstAttempt;

  RequestMetrics req;
  req.throughput = first ? est.throughput_first.mean : est.throughput.mean;
  auto acc = acceptance_from_throughput(req.throughput, offered);
  req.acceptance = acc.acceptance;
  req.delay = acc.delay;
  req.energy_db = acc.energy_db;

  const double busy = params.n_users * (first ? (est.transmit.empty() ? 0.0 : est.transmit.front().mean)
                                              : est.transmit_total.mean);
  DataMetrics data;
  data.throughput = std::min(static_cast<double>(params.data_channels), busy);
  acc = acceptance_from_throughput(data.throughput, offered);
  data.acceptance = acc.acceptance;
  data.delay = acc.delay;
  data.energy_db = acc.energy_db;
  return {req, data};
}

}  // namespace mcwlan
