#include "mcwlan/equilibrium.hpp"

#include <algorithm>
#include <cmath>

#include "mcwlan/errors.hpp"

namespace mcwlan {

SolverConfig validate(const SolverConfig& cfg) {
  if (!(cfg.tol > 0.0)) throw RangeError("tol", "solver tolerance must be positive");
  if (cfg.max_iter < 1) throw RangeError("max_iter", "solver iteration cap must be at least 1");
  if (!(cfg.damping > 0.0 && cfg.damping <= 1.0))
    throw RangeError("damping", "solver damping must lie in (0, 1]");
  return cfg;
}

double success_probability(int request_channels, double active_users) {
  const double base = 1.0 - 1.0 / static_cast<double>(request_channels);
  const double exponent = std::max(active_users - 1.0, 0.0);
  return std::pow(base, exponent);
}

EquilibriumState closed_form_state(const ModelParams& params, double x) {
  const double a = params.request_prob;
  const double c = params.retx_prob;
  const double e = frame_error_prob(params);
  const int n = params.max_attempts;

  EquilibriumState s;
  s.success_prob = x;
  s.grant_weight = a * x * (1.0 + c * (1.0 - x));

  // e^j weights of the ARQ retry chain
  std::vector<double> powers(static_cast<std::size_t>(n));
  double ej = 1.0;
  double geometric = 0.0;
  for (auto& p : powers) {
    p = ej;
    geometric += ej;
    ej *= e;
  }
  s.denominator = 1.0 + s.grant_weight * geometric + a * (1.0 - x);

  s.idle = 1.0 / s.denominator;
  s.collide = a * (1.0 - x) / s.denominator;
  s.transmit.resize(powers.size());
  s.transmit_total = 0.0;
  for (std::size_t j = 0; j < powers.size(); ++j) {
    s.transmit[j] = s.grant_weight * powers[j] / s.denominator;
    s.transmit_total += s.transmit[j];
  }
  s.active_users = params.n_users * (a * s.idle + c * s.collide);
  return s;
}

double fixed_point_residual(const ModelParams& params, double x) {
  const auto s = closed_form_state(params, x);
  return x - success_probability(params.request_channels, s.active_users);
}

FixedPoint solve_fixed_point(const ModelParams& params, const SolverConfig& cfg) {
  validate(cfg);
  const double theta = cfg.damping;
  double x = success_probability(params.request_channels, params.n_users * params.request_prob);
  double residual = 0.0;
  for (int it = 0; it < cfg.max_iter; ++it) {
    auto state = closed_form_state(params, x);
    const double fx = success_probability(params.request_channels, state.active_users);
    residual = std::abs(x - fx);
    if (residual <= cfg.tol) return {std::move(state), it, residual};
    x = (1.0 - theta) * x + theta * fx;
  }
  throw NonConvergence(cfg.max_iter, residual);
}

std::vector<double> state_vector(const EquilibriumState& state) {
  std::vector<double> v;
  v.reserve(state.transmit.size() + 2);
  v.push_back(state.idle);
  v.push_back(state.collide);
  v.insert(v.end(), state.transmit.begin(), state.transmit.end());
  return v;
}

TransitionMatrix build_transition_matrix(const ModelParams& params, double x) {
  const double a = params.request_prob;
  const double c = params.retx_prob;
  const double e = frame_error_prob(params);
  const auto n = static_cast<std::size_t>(params.max_attempts);

  TransitionMatrix p(n + 2);
  p.at(kIdleIndex, kIdleIndex) = 1.0 - a;
  p.at(kIdleIndex, kCollideIndex) = a * (1.0 - x);
  p.at(kIdleIndex, kFirstTransmitIndex) = a * x;

  p.at(kCollideIndex, kFirstTransmitIndex) = c * x;
  p.at(kCollideIndex, kIdleIndex) = 1.0 - c * x;

  for (std::size_t j = 0; j + 1 < n; ++j) {
    const std::size_t from = kFirstTransmitIndex + j;
    p.at(from, from + 1) = e;
    p.at(from, kIdleIndex) = 1.0 - e;
  }
  // Packet is dropped (or delivered) after the n-th attempt.
  p.at(kFirstTransmitIndex + n - 1, kIdleIndex) = 1.0;
  return p;
}

}  // namespace mcwlan
