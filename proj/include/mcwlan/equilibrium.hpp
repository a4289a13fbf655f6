#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mcwlan/params.hpp"

namespace mcwlan {

struct SolverConfig {
  double tol = 1e-12;
  int max_iter = 10000;
  double damping = 0.5;  // relaxation factor in (0, 1]

  bool operator==(const SolverConfig&) const = default;
};

SolverConfig validate(const SolverConfig& cfg);

/// Probability that an active user finds its chosen request channel free,
/// (1 - 1/k)^max(N_ave - 1, 0). The exponent is clamped so x never exceeds 1.
double success_probability(int request_channels, double active_users);

/// Stationary distribution of the per-user chain for a given success
/// probability x, without imposing x = success_probability(k, N_ave).
EquilibriumState closed_form_state(const ModelParams& params, double x);

/// x - success_probability(k, N_ave(x)), the quantity the solver drives to zero.
double fixed_point_residual(const ModelParams& params, double x);

struct FixedPoint {
  EquilibriumState state;
  int iterations = 0;
  double residual = 0.0;  // |x - success_probability(k, N_ave(x))|
};

/// Damped iteration x <- (1 - damping) x + damping f(x), seeded at
/// f evaluated with N_ave = N a. Throws NonConvergence once max_iter is hit.
FixedPoint solve_fixed_point(const ModelParams& params, const SolverConfig& cfg = {});

/// State ordering used by state vectors and the transition matrix.
inline constexpr std::size_t kIdleIndex = 0;
inline constexpr std::size_t kCollideIndex = 1;
inline constexpr std::size_t kFirstTransmitIndex = 2;

/// [s_i, s_c, s_t0, ..., s_t(n-1)]
std::vector<double> state_vector(const EquilibriumState& state);

/// Row-stochastic one-slot transition matrix, entry (from, to). A
/// distribution s (as a row vector) is stationary when s P = s.
class TransitionMatrix {
 public:
  explicit TransitionMatrix(std::size_t states) : size_(states), entries_(states * states, 0.0) {}

  std::size_t size() const noexcept { return size_; }
  double& at(std::size_t from, std::size_t to) { return entries_[from * size_ + to]; }
  double at(std::size_t from, std::size_t to) const { return entries_[from * size_ + to]; }
  std::span<const double> row(std::size_t from) const {
    return {entries_.data() + from * size_, size_};
  }

 private:
  std::size_t size_;
  std::vector<double> entries_;
};

/// Per-user chain: idle -> st0 (a x), idle -> collide (a (1-x)), idle -> idle
/// (1-a); collide -> st0 (c x), collide -> idle (1 - c x); stj -> st(j+1) (e)
/// and stj -> idle (1-e) for j < n-1; st(n-1) -> idle (1).
TransitionMatrix build_transition_matrix(const ModelParams& params, double x);

}  // namespace mcwlan
