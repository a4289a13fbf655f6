#pragma once

#include <cstdint>
#include <vector>

namespace mcwlan {

/// Scalar inputs of the request/data channel model. Defaults reproduce the
/// reference operating point (N=50, k=25, L=10, c=0.75, BER 1e-3) with a
/// 424-bit packet and at most 4 transmission attempts.
struct ModelParams {
  int n_users = 50;           // N
  int request_channels = 25;  // k
  int data_channels = 10;     // L
  double request_prob = 0.5;  // a, per-slot request probability of an idle user
  double retx_prob = 0.75;    // c, per-slot retransmission probability after a collision
  int packet_bits = 424;      // b
  double bit_error_rate = 1e-3;  // epsilon
  int max_attempts = 4;       // n
  double request_energy = 1.0;   // E0

  bool operator==(const ModelParams&) const = default;
};

/// Checks every field against its legal range and returns the input
/// unchanged. Throws RangeError naming the first offending field.
ModelParams validate(const ModelParams& params);

/// Probability that a b-bit frame carries at least one bit error,
/// 1 - (1 - epsilon)^b, evaluated without cancellation for small epsilon.
double frame_error_prob(double bit_error_rate, int bits);

inline double frame_error_prob(const ModelParams& params) {
  return frame_error_prob(params.bit_error_rate, params.packet_bits);
}

/// Per-user stationary distribution over [idle, collide, st0..st(n-1)]
/// together with the quantities it was built from.
struct EquilibriumState {
  double idle = 1.0;
  double collide = 0.0;
  std::vector<double> transmit;  // st0..st(n-1)
  double success_prob = 1.0;     // x
  double active_users = 0.0;     // N_ave = N (a s_i + c s_c)
  double grant_weight = 0.0;     // B = a x [1 + c (1 - x)]
  double denominator = 1.0;      // D
  double transmit_total = 0.0;   // sum of transmit

  bool operator==(const EquilibriumState&) const = default;
};

}  // namespace mcwlan
