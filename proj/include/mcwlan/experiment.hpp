#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "mcwlan/channel_ber.hpp"
#include "mcwlan/equilibrium.hpp"
#include "mcwlan/metrics.hpp"
#include "mcwlan/monte_carlo.hpp"
#include "mcwlan/params.hpp"

namespace mcwlan {

inline constexpr std::string_view kToolVersion = "mcwlan 1.0.0";

enum class SweepVariable { RequestProb, RequestChannels, DataChannels, BitErrorRate, Users };

/// Column/flag name: "a", "k", "L", "eps", "N".
std::string_view to_string(SweepVariable v);
SweepVariable parse_sweep_variable(std::string_view text);

/// Copy of `base` with the swept field set to `value`.
ModelParams with_value(ModelParams base, SweepVariable variable, double value);

/// start, start + step, ... up to `stop` inclusive (within step/1e6), each
/// value rounded to 12 significant digits so grids print and parse exactly.
std::vector<double> make_grid(double start, double stop, double step);

/// Settings of the figure reproduction run.
struct FigureConfig {
  double k_factor_db = kDefaultRicianKdB;
  double snr_from = 0.0;
  double snr_to = 40.0;
  double snr_step = 0.5;
  double load_from = 0.02;
  double load_to = 1.0;
  double load_step = 0.02;
  std::vector<int> k_family{10, 20, 25};  // at l_for_k_family data channels
  std::vector<int> l_family{1, 5, 10, 15};  // at k_for_l_family request channels
  int k_for_l_family = 25;
  int l_for_k_family = 10;

  bool operator==(const FigureConfig&) const = default;
};

/// Fully resolved inputs of one run. Serialized verbatim into the manifest;
/// a manifest is accepted wherever a config file is.
struct ExperimentConfig {
  ModelParams base;
  SweepVariable variable = SweepVariable::RequestProb;
  std::vector<double> grid;
  SolverConfig solver;
  std::optional<SimConfig> sim;
  TransmitOccupancy occupancy = TransmitOccupancy::AllAttempts;
  FigureConfig figures;
  std::string out_dir;
  std::string label = "sweep";

  bool operator==(const ExperimentConfig&) const = default;
};

/// Grid must be nonempty, strictly increasing and legal for the swept field.
ExperimentConfig validate(const ExperimentConfig& cfg);

nlohmann::json to_json(const ExperimentConfig& cfg);
/// Fields absent from `doc` keep the values already in `into`. Accepts either
/// a config document or a manifest (whose "config" member is used).
ExperimentConfig merge_json(ExperimentConfig into, const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig defaults = {});

/// One evaluated parameter point.
struct PointResult {
  double value = 0.0;  // swept value
  ModelParams params;
  bool converged = false;
  std::string failure;
  int iterations = 0;
  double residual = 0.0;
  EquilibriumState state;
  RequestMetrics request;
  DataMetrics data;
  std::optional<SimEstimate> sim;
  std::optional<std::pair<RequestMetrics, DataMetrics>> sim_metrics;
};

/// Solves one point, and simulates it too when `sim` is given. Never
/// throws NonConvergence; the failure is recorded in the result instead.
PointResult evaluate_point(const ModelParams& params, double value, const SolverConfig& solver,
                           TransmitOccupancy occupancy, const std::optional<SimConfig>& sim);

struct SweepResult {
  SweepVariable variable = SweepVariable::RequestProb;
  bool with_sim = false;
  std::vector<PointResult> points;  // in grid order

  bool all_converged() const;
};

/// Evaluates every grid point concurrently; rows come back in grid order.
SweepResult run_sweep(const ExperimentConfig& cfg);

/// Decimal text with 12 significant digits; "inf"/"-inf"/"nan" otherwise.
std::string format_number(double value);

std::vector<std::string> sweep_header(SweepVariable variable, bool with_sim);
std::vector<std::string> sweep_row(const PointResult& point, bool with_sim);
std::string join_csv(const std::vector<std::string>& cells);
void write_sweep_csv(std::ostream& out, const SweepResult& result);

/// Manifest of a finished run: resolved config, version, per-point status,
/// seeds and duration.
struct RunManifest {
  std::string command;
  ExperimentConfig config;
  std::vector<nlohmann::json> points;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> outputs;
  double wall_clock_seconds = 0.0;

  nlohmann::json to_json() const;
};

nlohmann::json point_status(const PointResult& point);

/// BER dataset: modulation,fading,k_factor,snr_db,ber,log10_ber in long form.
std::vector<std::string> fig2_header();
void write_fig2_csv(std::ostream& out, const FigureConfig& figures);

struct FigureSeries {
  int request_channels;
  int data_channels;
};

/// k-family series followed by the L-family ones not already present.
std::vector<FigureSeries> figure_series(const FigureConfig& figures);

/// Writes fig2.csv, fig4.csv (throughput), fig5.csv (acceptance),
/// fig6.csv (delay), fig7.csv (energy) and manifest.json into cfg.out_dir.
/// Returns false if any load point failed to converge.
bool reproduce_figures(const ExperimentConfig& cfg);

}  // namespace mcwlan
