#pragma once

#include <string_view>

#include "mcwlan/params.hpp"

namespace mcwlan {

/// Which transmit-state occupancy feeds the throughput formulas.
enum class TransmitOccupancy {
  AllAttempts,  // s_t0 + ... + s_t(n-1); every ARQ attempt holds a channel
  FirstAttempt  // s_t0 only; kept for sensitivity runs
};

/// "all-attempts" / "first-attempt"
std::string_view to_string(TransmitOccupancy occupancy);
TransmitOccupancy parse_occupancy(std::string_view text);

struct RequestMetrics {
  double throughput = 0.0;  // Th = min(N s_t, k)
  double acceptance = 1.0;  // p_a
  double delay = 0.0;       // tau, retry attempts before a grant
  double energy_db = 0.0;   // E_a in dB relative to E0

  bool operator==(const RequestMetrics&) const = default;
};

struct DataMetrics {
  double throughput = 0.0;  // Th_data = min(N s_t, L)
  double acceptance = 1.0;
  double delay = 0.0;
  double energy_db = 0.0;

  bool operator==(const DataMetrics&) const = default;
};

double transmit_occupancy(const EquilibriumState& state, TransmitOccupancy occupancy);

struct AcceptanceTriple {
  double acceptance;
  double delay;
  double energy_db;
};

/// Acceptance, delay and energy for a channel group carrying `throughput`
/// against offered load N a. Acceptance is capped at 1: ARQ retries make
/// N s_t exceed N a at light load. Zero offered load counts as full acceptance.
AcceptanceTriple acceptance_from_throughput(double throughput, double offered_load);

RequestMetrics request_metrics(const EquilibriumState& state, const ModelParams& params,
                               TransmitOccupancy occupancy = TransmitOccupancy::AllAttempts);

DataMetrics data_metrics(const EquilibriumState& state, const ModelParams& params,
                         TransmitOccupancy occupancy = TransmitOccupancy::AllAttempts);

}  // namespace mcwlan
