// Command-line front end: solve, sweep, simulate, ber-curve, reproduce-figures.
//
// Exit codes: 0 success, 1 model or convergence failure, 2 usage/config error.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "CLI11.hpp"
#include "mcwlan/channel_ber.hpp"
#include "mcwlan/equilibrium.hpp"
#include "mcwlan/errors.hpp"
#include "mcwlan/experiment.hpp"
#include "mcwlan/metrics.hpp"
#include "mcwlan/monte_carlo.hpp"

namespace {

using namespace mcwlan;

constexpr int kExitModelFailure = 1;
constexpr int kExitUsage = 2;

/// Raw flag values; only those the user actually passed override the config.
struct Flags {
  std::string config_path;
  std::string out_dir;
  std::string label;
  std::uint64_t seed = 0;
  ModelParams p;
  std::string occupancy;
  SolverConfig solver;
  SimConfig sim;
  std::int64_t warmup = 0;
  std::string mode;
  std::string collide;
  bool simulate = false;

  std::string sweep_var;
  std::vector<double> grid;
  double from = 0.0, to = 0.0, step = 0.0;

  std::string modulation = "BPSK";
  std::string fading = "AWGN";
  double k_factor_db = kDefaultRicianKdB;
  double snr_from = 0.0, snr_to = 40.0, snr_step = 0.5;
  double target_ber = 0.0;
};

struct Options {
  CLI::App app{"Request/data channel performance model for multi-channel wireless MAC"};
  Flags f;
  CLI::App* solve = nullptr;
  CLI::App* sweep = nullptr;
  CLI::App* sim = nullptr;
  CLI::App* ber = nullptr;
  CLI::App* figures = nullptr;
};

bool given(const CLI::App& sub, const std::string& name) {
  // Common options live on the root and are reached through fallthrough.
  if (const auto* opt = sub.get_option_no_throw(name)) return opt->count() > 0;
  const CLI::App* root = &sub;
  while (root->get_parent() != nullptr) root = root->get_parent();
  const auto* opt = root->get_option_no_throw(name);
  return opt != nullptr && opt->count() > 0;
}

void define(Options& o) {
  auto& app = o.app;
  auto& f = o.f;
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(kToolVersion));

  app.add_option("--config", f.config_path, "JSON config file or run manifest")
      ->check(CLI::ExistingFile);
  app.add_option("--out", f.out_dir, "Output directory");
  app.add_option("--label", f.label, "Dataset label (sweep file name stem)");
  app.add_option("--seed", f.seed, "Simulation master seed");

  app.add_option("--n-users", f.p.n_users, "Number of users N");
  app.add_option("--k-req", f.p.request_channels, "Request channels k");
  app.add_option("--l-data", f.p.data_channels, "Data channels L");
  app.add_option("--prob-a", f.p.request_prob, "Request probability a");
  app.add_option("--prob-c", f.p.retx_prob, "Retransmission probability c");
  app.add_option("--bits", f.p.packet_bits, "Packet length b in bits");
  app.add_option("--ber", f.p.bit_error_rate, "Channel bit error rate");
  app.add_option("--attempts", f.p.max_attempts, "Maximum transmission attempts n");
  app.add_option("--energy", f.p.request_energy, "Energy per request transmission E0");
  app.add_option("--occupancy", f.occupancy, "Transmit occupancy: all-attempts | first-attempt");

  app.add_option("--tol", f.solver.tol, "Fixed-point tolerance");
  app.add_option("--max-iter", f.solver.max_iter, "Fixed-point iteration cap");
  app.add_option("--damping", f.solver.damping, "Fixed-point relaxation factor");

  app.add_option("--slots", f.sim.slots, "Simulated slots per replication");
  app.add_option("--warmup", f.warmup, "Discarded initial slots (default slots/10)");
  app.add_option("--replications", f.sim.replications, "Independent replications");
  app.add_option("--mode", f.mode, "Simulation mode: mean-field | exact-collision");
  app.add_option("--collide", f.collide, "Collide semantics: paper-chain | natural-backoff");

  o.solve = app.add_subcommand("solve", "Solve one parameter point");
  o.solve->add_flag("--simulate", f.simulate, "Also run the Monte Carlo simulation");

  o.sweep = app.add_subcommand("sweep", "Sweep one parameter over a grid");
  o.sweep->add_option("--sweep", f.sweep_var, "Swept variable: a | k | L | eps | N");
  o.sweep->add_option("--grid", f.grid, "Explicit grid values")->delimiter(',');
  o.sweep->add_option("--from", f.from, "Grid start");
  o.sweep->add_option("--to", f.to, "Grid end (inclusive)");
  o.sweep->add_option("--step", f.step, "Grid step");
  o.sweep->add_flag("--simulate", f.simulate, "Also simulate each point");

  o.sim = app.add_subcommand("simulate", "Monte Carlo simulation of one point");

  o.ber = app.add_subcommand("ber-curve", "BER versus Eb/N0 for one channel");
  o.ber->add_option("--modulation", f.modulation, "BPSK | 16QAM");
  o.ber->add_option("--fading", f.fading, "AWGN | Rayleigh | Rician");
  o.ber->add_option("--k-factor-db", f.k_factor_db, "Rician K-factor in dB");
  o.ber->add_option("--snr-from", f.snr_from, "First Eb/N0 [dB]");
  o.ber->add_option("--snr-to", f.snr_to, "Last Eb/N0 [dB]");
  o.ber->add_option("--snr-step", f.snr_step, "Eb/N0 step [dB]");
  o.ber->add_option("--target-ber", f.target_ber, "Print the Eb/N0 needed for this BER instead");

  o.figures = app.add_subcommand("reproduce-figures", "Write the BER and performance datasets");
  o.figures->add_option("--k-factor-db", f.k_factor_db, "Rician K-factor in dB");
}

/// defaults < config file < flags
ExperimentConfig resolve(const Options& o, const CLI::App& sub) {
  const auto& f = o.f;
  ExperimentConfig cfg;
  cfg.grid = {cfg.base.request_prob};
  if (!f.config_path.empty()) cfg = load_config(f.config_path, cfg);

  auto& p = cfg.base;
  if (given(sub, "--n-users")) p.n_users = f.p.n_users;
  if (given(sub, "--k-req")) p.request_channels = f.p.request_channels;
  if (given(sub, "--l-data")) p.data_channels = f.p.data_channels;
  if (given(sub, "--prob-a")) p.request_prob = f.p.request_prob;
  if (given(sub, "--prob-c")) p.retx_prob = f.p.retx_prob;
  if (given(sub, "--bits")) p.packet_bits = f.p.packet_bits;
  if (given(sub, "--ber")) p.bit_error_rate = f.p.bit_error_rate;
  if (given(sub, "--attempts")) p.max_attempts = f.p.max_attempts;
  if (given(sub, "--energy")) p.request_energy = f.p.request_energy;
  if (given(sub, "--occupancy")) cfg.occupancy = parse_occupancy(f.occupancy);

  if (given(sub, "--tol")) cfg.solver.tol = f.solver.tol;
  if (given(sub, "--max-iter")) cfg.solver.max_iter = f.solver.max_iter;
  if (given(sub, "--damping")) cfg.solver.damping = f.solver.damping;

  if (given(sub, "--out")) cfg.out_dir = f.out_dir;
  if (given(sub, "--label")) cfg.label = f.label;

  const bool sim_flags = given(sub, "--seed") || given(sub, "--slots") || given(sub, "--warmup") ||
                         given(sub, "--replications") || given(sub, "--mode") ||
                         given(sub, "--collide");
  if (f.simulate || sim_flags || &sub == o.sim) {
    SimConfig sim = cfg.sim.value_or(SimConfig{});
    if (given(sub, "--seed")) sim.seed = f.seed;
    if (given(sub, "--slots")) {
      sim.slots = f.sim.slots;
      if (!given(sub, "--warmup")) sim.warmup.reset();
    }
    if (given(sub, "--warmup")) sim.warmup = f.warmup;
    if (given(sub, "--replications")) sim.replications = f.sim.replications;
    if (given(sub, "--mode")) sim.mode = parse_sim_mode(f.mode);
    if (given(sub, "--collide")) sim.collide_semantics = parse_collide_semantics(f.collide);
    cfg.sim = sim;
  }

  if (given(sub, "--k-factor-db")) cfg.figures.k_factor_db = f.k_factor_db;
  return cfg;
}

void write_manifest(const std::filesystem::path& path, const RunManifest& manifest) {
  std::ofstream out(path, std::ios::binary);
  out << manifest.to_json().dump(2) << '\n';
  if (!out) throw std::system_error(errno, std::generic_category(), "cannot write " + path.string());
}

std::filesystem::path prepare_dir(const std::string& dir) {
  std::filesystem::path p = dir.empty() ? "." : dir;
  std::error_code ec;
  std::filesystem::create_directories(p, ec);
  if (ec) throw std::system_error(ec, "cannot create output directory " + p.string());
  return p;
}

std::vector<std::uint64_t> seeds_of(const std::optional<SimConfig>& sim) {
  std::vector<std::uint64_t> seeds;
  if (!sim) return seeds;
  seeds.push_back(sim->seed);
  for (int r = 0; r < sim->replications; ++r) seeds.push_back(replication_seed(sim->seed, r));
  return seeds;
}

void print_point(std::ostream& out, const PointResult& pt) {
  const auto& p = pt.params;
  out << "N=" << p.n_users << " k=" << p.request_channels << " L=" << p.data_channels
      << " a=" << format_number(p.request_prob) << " c=" << format_number(p.retx_prob)
      << " b=" << p.packet_bits << " eps=" << format_number(p.bit_error_rate)
      << " n=" << p.max_attempts << '\n';
  out << "offered load G      " << format_number(p.n_users * p.request_prob) << '\n';
  out << "frame error e       " << format_number(frame_error_prob(p)) << '\n';
  if (!pt.converged) {
    out << "solver              FAILED: " << pt.failure << '\n';
    return;
  }
  out << "solver              converged in " << pt.iterations << " iterations (residual "
      << format_number(pt.residual) << ")\n";
  out << "x                   " << format_number(pt.state.success_prob) << '\n';
  out << "N_ave               " << format_number(pt.state.active_users) << '\n';
  out << "s_i s_c s_t_total   " << format_number(pt.state.idle) << ' '
      << format_number(pt.state.collide) << ' ' << format_number(pt.state.transmit_total) << '\n';
  out << "request Th p_a      " << format_number(pt.request.throughput) << ' '
      << format_number(pt.request.acceptance) << '\n';
  out << "request tau E[dB]   " << format_number(pt.request.delay) << ' '
      << format_number(pt.request.energy_db) << '\n';
  out << "data Th p_a         " << format_number(pt.data.throughput) << ' '
      << format_number(pt.data.acceptance) << '\n';
  out << "data tau E[dB]      " << format_number(pt.data.delay) << ' '
      << format_number(pt.data.energy_db) << '\n';
  if (pt.sim) {
    const auto& s = *pt.sim;
    out << "simulated p_a       " << format_number(s.request_acceptance.mean) << " +/- "
        << format_number(s.request_acceptance.std_error) << " (analytic "
        << format_number(pt.request.acceptance) << ")\n";
    out << "simulated s_i       " << format_number(s.idle.mean) << " +/- "
        << format_number(s.idle.std_error) << '\n';
  }
}

int run_solve(const Options& o) {
  const auto cfg = resolve(o, *o.solve);
  validate(cfg.base);
  validate(cfg.solver);
  if (cfg.sim) validate(*cfg.sim);
  const auto pt =
      evaluate_point(cfg.base, cfg.base.request_prob, cfg.solver, cfg.occupancy, cfg.sim);
  print_point(std::cout, pt);
  std::cout << '\n'
            << join_csv(sweep_header(SweepVariable::RequestProb, cfg.sim.has_value())) << '\n'
            << join_csv(sweep_row(pt, cfg.sim.has_value())) << '\n';
  return pt.converged ? 0 : kExitModelFailure;
}

int run_sweep_cmd(const Options& o) {
  auto cfg = resolve(o, *o.sweep);
  const auto& f = o.f;
  if (given(*o.sweep, "--sweep")) cfg.variable = parse_sweep_variable(f.sweep_var);
  if (given(*o.sweep, "--grid")) {
    cfg.grid = f.grid;
  } else if (given(*o.sweep, "--from") || given(*o.sweep, "--to") || given(*o.sweep, "--step")) {
    if (!(given(*o.sweep, "--from") && given(*o.sweep, "--to") && given(*o.sweep, "--step")))
      throw ConfigError("--from, --to and --step must be given together");
    cfg.grid = make_grid(f.from, f.to, f.step);
  }

  const auto started = std::chrono::steady_clock::now();
  const auto result = run_sweep(cfg);
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  if (cfg.out_dir.empty()) {
    write_sweep_csv(std::cout, result);
  } else {
    const auto dir = prepare_dir(cfg.out_dir);
    const auto csv = dir / (cfg.label + ".csv");
    std::ofstream out(csv, std::ios::binary);
    write_sweep_csv(out, result);
    if (!out) throw std::system_error(errno, std::generic_category(), "cannot write " + csv.string());

    RunManifest manifest;
    manifest.command = "sweep";
    manifest.config = cfg;
    for (const auto& pt : result.points) manifest.points.push_back(point_status(pt));
    manifest.seeds = seeds_of(cfg.sim);
    manifest.outputs.push_back(csv.filename().string());
    manifest.wall_clock_seconds = elapsed;
    write_manifest(dir / (cfg.label + ".manifest.json"), manifest);
    std::cout << "wrote " << csv.string() << " (" << result.points.size() << " rows)\n";
  }
  for (const auto& pt : result.points)
    if (!pt.converged)
      std::cerr << "point " << format_number(pt.value) << " failed: " << pt.failure << '\n';
  return result.all_converged() ? 0 : kExitModelFailure;
}

int run_simulate(const Options& o) {
  const auto cfg = resolve(o, *o.sim);
  validate(cfg.base);
  const auto pt =
      evaluate_point(cfg.base, cfg.base.request_prob, cfg.solver, cfg.occupancy, cfg.sim);
  const auto& s = *pt.sim;
  const auto& [req, data] = *pt.sim_metrics;

  std::ostringstream csv;
  csv << "quantity,estimate,std_error,analytic\n";
  auto line = [&](const char* name, const Estimate& e, double analytic, bool have_analytic) {
    csv << name << ',' << format_number(e.mean) << ',' << format_number(e.std_error) << ','
        << (have_analytic ? format_number(analytic) : "nan") << '\n';
  };
  const bool ok = pt.converged;
  line("s_i", s.idle, pt.state.idle, ok);
  line("s_c", s.collide, pt.state.collide, ok);
  for (std::size_t j = 0; j < s.transmit.size(); ++j) {
    const std::string name = "s_t" + std::to_string(j);
    line(name.c_str(), s.transmit[j], ok ? pt.state.transmit[j] : 0.0, ok);
  }
  line("s_t_total", s.transmit_total, pt.state.transmit_total, ok);
  line("x", s.success_prob, pt.state.success_prob, ok);
  line("Th", s.throughput, pt.request.throughput, ok);
  line("p_a", s.request_acceptance, pt.request.acceptance, ok);
  csv << "tau," << format_number(req.delay) << ",nan,"
      << (ok ? format_number(pt.request.delay) : "nan") << '\n';
  csv << "E_dB," << format_number(req.energy_db) << ",nan,"
      << (ok ? format_number(pt.request.energy_db) : "nan") << '\n';
  csv << "Th_data," << format_number(data.throughput) << ",nan,"
      << (ok ? format_number(pt.data.throughput) : "nan") << '\n';
  csv << "p_a_data," << format_number(data.acceptance) << ",nan,"
      << (ok ? format_number(pt.data.acceptance) : "nan") << '\n';

  std::cout << "# mode=" << to_string(cfg.sim->mode)
            << " collide=" << to_string(cfg.sim->collide_semantics) << " slots=" << s.slots
            << " warmup=" << s.warmup << " replications=" << s.replications
            << " seed=" << s.seed << '\n'
            << csv.str();

  if (!cfg.out_dir.empty()) {
    const auto dir = prepare_dir(cfg.out_dir);
    const auto path = dir / (cfg.label + ".sim.csv");
    std::ofstream out(path, std::ios::binary);
    out << csv.str();
    if (!out) throw std::system_error(errno, std::generic_category(), "cannot write " + path.string());
    RunManifest manifest;
    manifest.command = "simulate";
    manifest.config = cfg;
    manifest.config.grid = {cfg.base.request_prob};
    manifest.points.push_back(point_status(pt));
    manifest.seeds = seeds_of(cfg.sim);
    manifest.outputs.push_back(path.filename().string());
    write_manifest(dir / (cfg.label + ".sim.manifest.json"), manifest);
  }
  return ok ? 0 : kExitModelFailure;
}

int run_ber_curve(const Options& o) {
  const auto& f = o.f;
  ChannelSpec spec{parse_modulation(f.modulation), parse_fading(f.fading),
                   db_to_linear(f.k_factor_db)};
  validate(spec);
  if (given(*o.ber, "--target-ber")) {
    const double snr = required_snr(spec, f.target_ber);
    std::cout << describe(spec) << " reaches BER " << format_number(f.target_ber) << " at "
              << format_number(snr) << " dB Eb/N0\n";
    return 0;
  }
  const auto grid = make_grid(f.snr_from, f.snr_to, f.snr_step);
  std::ostringstream csv;
  csv << "snr_db,ber,log10_ber\n";
  for (const auto& pt : ber_curve(spec, grid))
    csv << format_number(pt.snr_db) << ',' << format_number(pt.ber) << ','
        << format_number(pt.log10_ber) << '\n';
  if (given(*o.ber, "--out")) {
    const auto dir = prepare_dir(f.out_dir);
    const auto label = given(*o.ber, "--label") ? f.label : std::string("ber_curve");
    const auto path = dir / (label + ".csv");
    std::ofstream out(path, std::ios::binary);
    out << csv.str();
    if (!out) throw std::system_error(errno, std::generic_category(), "cannot write " + path.string());
  } else {
    std::cout << csv.str();
  }
  return 0;
}

int run_figures(const Options& o) {
  auto cfg = resolve(o, *o.figures);
  if (cfg.out_dir.empty()) cfg.out_dir = ".";
  const bool ok = reproduce_figures(cfg);
  std::cout << "wrote fig2.csv fig4.csv fig5.csv fig6.csv fig7.csv manifest.json to "
            << cfg.out_dir << '\n';
  return ok ? 0 : kExitModelFailure;
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  define(o);
  try {
    o.app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = o.app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (o.solve->parsed()) return run_solve(o);
    if (o.sweep->parsed()) return run_sweep_cmd(o);
    if (o.sim->parsed()) return run_simulate(o);
    if (o.ber->parsed()) return run_ber_curve(o);
    if (o.figures->parsed()) return run_figures(o);
  } catch (const RangeError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitModelFailure;
  }
  return kExitUsage;
}
