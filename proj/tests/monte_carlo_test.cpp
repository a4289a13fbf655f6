#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>

#include "doctest.h"
#include "mcwlan/equilibrium.hpp"
#include "mcwlan/errors.hpp"
#include "mcwlan/monte_carlo.hpp"

using namespace mcwlan;

namespace {

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

bool same_bits(const Estimate& a, const Estimate& b) {
  return same_bits(a.mean, b.mean) && same_bits(a.std_error, b.std_error);
}

bool identical(const SimEstimate& a, const SimEstimate& b) {
  if (a.transmit.size() != b.transmit.size() || a.runs.size() != b.runs.size()) return false;
  bool ok = same_bits(a.idle, b.idle) && same_bits(a.collide, b.collide) &&
            same_bits(a.transmit_total, b.transmit_total) && same_bits(a.throughput, b.throughput) &&
            same_bits(a.success_prob, b.success_prob) &&
            same_bits(a.request_acceptance, b.request_acceptance);
  for (std::size_t j = 0; j < a.transmit.size(); ++j) ok = ok && same_bits(a.transmit[j], b.transmit[j]);
  for (std::size_t r = 0; r < a.runs.size(); ++r)
    ok = ok && a.runs[r].state_counts == b.runs[r].state_counts &&
         a.runs[r].successes == b.runs[r].successes;
  return ok;
}

SimConfig short_run(std::uint64_t seed = 7) {
  SimConfig cfg;
  cfg.slots = 20000;
  cfg.replications = 4;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("no arrivals keeps everyone idle") {
  ModelParams p;
  p.request_prob = 0.0;
  const auto est = simulate(p, short_run());
  CHECK(est.idle.mean == 1.0);
  CHECK(est.collide.mean == 0.0);
  CHECK(est.throughput.mean == 0.0);
  CHECK(est.request_successes.mean == 0.0);
}

TEST_CASE("two users on one channel alternate idle and collide") {
  ModelParams p;
  p.n_users = 2;
  p.request_channels = 1;
  p.request_prob = 1.0;
  p.retx_prob = 1.0;
  SimConfig cfg;
  cfg.slots = 1000;
  cfg.warmup = 100;
  cfg.replications = 3;
  cfg.mode = SimMode::ExactCollision;
  cfg.collide_semantics = CollideSemantics::PaperChain;
  const auto est = simulate(p, cfg);
  CHECK(est.idle.mean == 0.5);
  CHECK(est.collide.mean == 0.5);
  CHECK(est.transmit_total.mean == 0.0);
  CHECK(est.throughput.mean == 0.0);
  CHECK(est.success_prob.mean == 0.0);

  const auto [req, data] = estimate_metrics(est, p);
  CHECK(req.acceptance == 0.0);
  CHECK(std::isinf(req.delay));
  CHECK(std::isinf(req.energy_db));
  CHECK(data.acceptance == 0.0);
}

TEST_CASE("simulation is deterministic for a fixed seed") {
  ModelParams p;
  const auto cfg = short_run(42);
  const auto a = simulate(p, cfg);
  const auto b = simulate(p, cfg);
  CHECK(identical(a, b));
  // the sequential (observed) path produces the same numbers as the threaded one
  const auto c = simulate(p, cfg, [](const SlotRecord&) {});
  CHECK(identical(a, c));
  // different seeds give different sample paths
  const auto d = simulate(p, short_run(43));
  CHECK_FALSE(identical(a, d));
  CHECK(a.runs[0].seed == replication_seed(42, 0));
  CHECK(a.runs[0].seed != a.runs[1].seed);
}

TEST_CASE("per-slot conservation") {
  ModelParams p;
  p.request_prob = 0.6;
  for (auto mode : {SimMode::MeanField, SimMode::ExactCollision}) {
    SimConfig cfg;
    cfg.slots = 3000;
    cfg.replications = 2;
    cfg.mode = mode;
    int violations = 0;
    std::int64_t observed = 0;
    simulate(p, cfg, [&](const SlotRecord& rec) {
      ++observed;
      const int total = std::accumulate(rec.state_counts->begin(), rec.state_counts->end(), 0);
      if (total != p.n_users) ++violations;
      if (rec.successes > rec.active) ++violations;
      if (mode == SimMode::ExactCollision && rec.successes > std::min(rec.active, p.request_channels))
        ++violations;
    });
    CHECK(observed == 6000);
    CHECK(violations == 0);
  }
}

TEST_CASE("occupancy fractions sum to one per replication") {
  ModelParams p;
  const auto est = simulate(p, short_run());
  for (const auto& run : est.runs) {
    const auto occ = run.occupancy();
    CHECK(std::abs(std::accumulate(occ.begin(), occ.end(), 0.0) - 1.0) < 1e-12);
  }
  CHECK(est.idle.std_error >= 0.0);
  CHECK(est.collide.std_error >= 0.0);
}

TEST_CASE("mean-field simulation reproduces the analytic equilibrium") {
  ModelParams p;
  SimConfig cfg;
  cfg.slots = 40000;
  cfg.replications = 8;
  cfg.seed = 2024;
  const auto est = simulate(p, cfg);
  const auto fp = solve_fixed_point(p);
  auto within = [](const Estimate& e, double target) {
    return std::abs(e.mean - target) <= 3.0 * e.std_error;
  };
  CHECK(within(est.idle, fp.state.idle));
  CHECK(within(est.collide, fp.state.collide));
  CHECK(within(est.transmit_total, fp.state.transmit_total));
  for (std::size_t j = 0; j < est.transmit.size(); ++j)
    CHECK(within(est.transmit[j], fp.state.transmit[j]));
}

TEST_CASE("analytic idle probability sits inside the 99% band across 30 seeds") {
  ModelParams p;
  const auto fp = solve_fixed_point(p);
  std::vector<double> means;
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    SimConfig cfg;
    cfg.slots = 10000;
    cfg.replications = 2;
    cfg.seed = seed;
    means.push_back(simulate(p, cfg).idle.mean);
  }
  const double n = static_cast<double>(means.size());
  const double mean = std::accumulate(means.begin(), means.end(), 0.0) / n;
  double ss = 0.0;
  for (double m : means) ss += (m - mean) * (m - mean);
  const double se = std::sqrt(ss / (n - 1.0) / n);
  // two-sided 99% Student t quantile, 29 degrees of freedom
  CHECK(std::abs(mean - fp.state.idle) <= 2.756 * se);
}

TEST_CASE("natural backoff keeps more users in collide at heavy load") {
  ModelParams p;
  p.request_prob = 0.9;
  auto cfg = short_run();
  cfg.collide_semantics = CollideSemantics::PaperChain;
  const auto paper = simulate(p, cfg);
  cfg.collide_semantics = CollideSemantics::NaturalBackoff;
  const auto natural = simulate(p, cfg);
  CHECK(natural.collide.mean >= paper.collide.mean);
}

TEST_CASE("exact collisions versus the mean-field success probability") {
  // The gap is reported, not bounded.
  for (int scale : {1, 2, 4}) {
    ModelParams p;
    p.n_users = 25 * scale;
    p.request_channels = 12 * scale;
    p.request_prob = 0.4;
    SimConfig cfg;
    cfg.slots = 10000;
    cfg.replications = 2;
    cfg.mode = SimMode::ExactCollision;
    const auto exact = simulate(p, cfg);
    const auto fp = solve_fixed_point(p);
    MESSAGE("N=" << p.n_users << " k=" << p.request_channels << " exact x=" << exact.success_prob.mean
                 << " mean-field x=" << fp.state.success_prob);
    CHECK(exact.success_prob.mean >= 0.0);
    CHECK(exact.success_prob.mean <= 1.0);
  }
}

TEST_CASE("estimate metrics reduce to the analytic formulas") {
  ModelParams p;
  const auto fp = solve_fixed_point(p);
  SimEstimate est;
  est.idle.mean = fp.state.idle;
  est.collide.mean = fp.state.collide;
  for (double t : fp.state.transmit) est.transmit.push_back({t, 0.0});
  est.transmit_total.mean = fp.state.transmit_total;
  est.throughput.mean = std::min(p.n_users * fp.state.transmit_total, double(p.request_channels));
  const auto [req, data] = estimate_metrics(est, p);
  const auto r = request_metrics(fp.state, p);
  const auto d = data_metrics(fp.state, p);
  CHECK(std::abs(req.throughput - r.throughput) < 1e-12);
  CHECK(std::abs(req.acceptance - r.acceptance) < 1e-12);
  CHECK(std::abs(req.delay - r.delay) < 1e-12);
  CHECK(std::abs(req.energy_db - r.energy_db) < 1e-12);
  CHECK(std::abs(data.throughput - d.throughput) < 1e-12);
  CHECK(std::abs(data.acceptance - d.acceptance) < 1e-12);
}

TEST_CASE("simulation config validation") {
  ModelParams p;
  SimConfig cfg;
  cfg.slots = 10;
  cfg.warmup = 10;
  CHECK_THROWS_AS(simulate(p, cfg), ConfigError);
  cfg.warmup = 0;
  cfg.replications = 0;
  CHECK_THROWS_AS(simulate(p, cfg), ConfigError);
  cfg.replications = 1;
  cfg.slots = 0;
  CHECK_THROWS_AS(simulate(p, cfg), ConfigError);
  CHECK(parse_sim_mode("exact-collision") == SimMode::ExactCollision);
  CHECK(parse_collide_semantics("natural-backoff") == CollideSemantics::NaturalBackoff);
  CHECK_THROWS_AS(parse_sim_mode("bogus"), ConfigError);
}
