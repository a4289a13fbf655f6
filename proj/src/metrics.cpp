#include "mcwlan/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mcwlan/errors.hpp"

namespace mcwlan {

std::string_view to_string(TransmitOccupancy occ) {
  return occ == TransmitOccupancy::AllAttempts ? "all-attempts" : "first-attempt";
}

TransmitOccupancy parse_occupancy(std::string_view text) {
  if (text == "all-attempts") return TransmitOccupancy::AllAttempts;
  if (text == "first-attempt") return TransmitOccupancy::FirstAttempt;
  throw ConfigError("unknown occupancy '" + std::string(text) +
                    "' (expected all-attempts or first-attempt)");
}

double transmit_occupancy(const EquilibriumState& state, TransmitOccupancy occupancy) {
  if (occupancy == TransmitOccupancy::FirstAttempt)
    return state.transmit.empty() ? 0.0 : state.transmit.front();
  return state.transmit_total;
}

AcceptanceTriple acceptance_from_throughput(double throughput, double offered_load) {
  if (offered_load <= 0.0) return {1.0, 0.0, 0.0};
  const double p = std::min(1.0, throughput / offered_load);
  if (p <= 0.0) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    return {0.0, inf, inf};
  }
  // -10 log10(p) is -0.0 at p = 1; normalise the sign.
  return {p, (1.0 - p) / p, p == 1.0 ? 0.0 : -10.0 * std::log10(p)};
}

RequestMetrics request_metrics(const EquilibriumState& state, const ModelParams& params,
                               TransmitOccupancy occupancy) {
  const double busy = params.n_users * transmit_occupancy(state, occupancy);
  RequestMetrics m;
  m.throughput = std::min(busy, static_cast<double>(params.request_channels));
  const auto acc = acceptance_from_throughput(m.throughput, params.n_users * params.request_prob);
  m.acceptance = acc.acceptance;
  m.delay = acc.delay;
  m.energy_db = acc.energy_db;
  return m;
}

DataMetrics data_metrics(const EquilibriumState& state, const ModelParams& params,
                         TransmitOccupancy occupancy) {
  const double busy = params.n_users * transmit_occupancy(state, occupancy);
  DataMetrics m;
  m.throughput = std::min(static_cast<double>(params.data_channels), busy);
  const auto acc = acceptance_from_throughput(m.throughput, params.n_users * params.request_prob);
  m.acceptance = acc.acceptance;
  m.delay = acc.delay;
  m.energy_db = acc.energy_db;
  return m;
}

}  // namespace mcwlan
