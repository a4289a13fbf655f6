#include "mcwlan/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <future>
#include <ostream>
#include <sstream>
#include <system_error>

#include "mcwlan/errors.hpp"

namespace mcwlan {

using nlohmann::json;

namespace {

bool is_integral_field(SweepVariable v) {
  return v == SweepVariable::RequestChannels || v == SweepVariable::DataChannels ||
         v == SweepVariable::Users;
}

double round_significant(double v) {
  if (v == 0.0 || !std::isfinite(v)) return v;
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 12);
  double out = v;
  std::from_chars(buf, end, out);
  return out;
}

template <typename T>
void read_if(const json& obj, const char* key, T& field) {
  if (obj.contains(key)) obj.at(key).get_to(field);
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::system_error(errno, std::generic_category(), "cannot write " + path.string());
  return out;
}

void check_written(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw std::system_error(errno, std::generic_category(), "error writing " + path.string());
}

}  // namespace

std::string_view to_string(SweepVariable v) {
  switch (v) {
    case SweepVariable::RequestProb:
      return "a";
    case SweepVariable::RequestChannels:
      return "k";
    case SweepVariable::DataChannels:
      return "L";
    case SweepVariable::BitErrorRate:
      return "eps";
    case SweepVariable::Users:
      return "N";
  }
  return "?";
}

SweepVariable parse_sweep_variable(std::string_view text) {
  if (text == "a" || text == "prob-a") return SweepVariable::RequestProb;
  if (text == "k" || text == "k-req") return SweepVariable::RequestChannels;
  if (text == "L" || text == "l" || text == "l-data") return SweepVariable::DataChannels;
  if (text == "eps" || text == "ber") return SweepVariable::BitErrorRate;
  if (text == "N" || text == "n-users") return SweepVariable::Users;
  throw ConfigError("unknown sweep variable '" + std::string(text) +
                    "' (expected a, k, L, eps or N)");
}

ModelParams with_value(ModelParams base, SweepVariable variable, double value) {
  switch (variable) {
    case SweepVariable::RequestProb:
      base.request_prob = value;
      break;
    case SweepVariable::RequestChannels:
      base.request_channels = static_cast<int>(value);
      break;
    case SweepVariable::DataChannels:
      base.data_channels = static_cast<int>(value);
      break;
    case SweepVariable::BitErrorRate:
      base.bit_error_rate = value;
      break;
    case SweepVariable::Users:
      base.n_users = static_cast<int>(value);
      break;
  }
  return base;
}

std::vector<double> make_grid(double start, double stop, double step) {
  if (!(step > 0.0)) throw ConfigError("grid step must be positive");
  if (!(stop >= start)) throw ConfigError("grid end must not precede its start");
  std::vector<double> grid;
  for (long i = 0;; ++i) {
    const double v = start + static_cast<double>(i) * step;
    if (v > stop + step * 1e-6) break;
    grid.push_back(round_significant(v));
  }
  return grid;
}

ExperimentConfig validate(const ExperimentConfig& cfg) {
  validate(cfg.base);
  validate(cfg.solver);
  if (cfg.sim) validate(*cfg.sim);
  if (cfg.grid.empty()) throw ConfigError("sweep grid must not be empty");
  for (std::size_t i = 0; i < cfg.grid.size(); ++i) {
    const double v = cfg.grid[i];
    if (i > 0 && !(v > cfg.grid[i - 1]))
      throw ConfigError("sweep grid must be strictly increasing");
    if (is_integral_field(cfg.variable) && v != std::floor(v))
      throw RangeError(std::string(to_string(cfg.variable)),
                       "sweep grid for " + std::string(to_string(cfg.variable)) +
                           " must contain integers");
    validate(with_value(cfg.base, cfg.variable, v));
  }
  return cfg;
}

json to_json(const ExperimentConfig& cfg) {
  const auto& p = cfg.base;
  json doc;
  doc["label"] = cfg.label;
  doc["out"] = cfg.out_dir;
  doc["params"] = {{"n_users", p.n_users},
                   {"request_channels", p.request_channels},
                   {"data_channels", p.data_channels},
                   {"request_prob", p.request_prob},
                   {"retx_prob", p.retx_prob},
                   {"packet_bits", p.packet_bits},
                   {"bit_error_rate", p.bit_error_rate},
                   {"max_attempts", p.max_attempts},
                   {"request_energy", p.request_energy}};
  doc["sweep"] = {{"variable", to_string(cfg.variable)}, {"grid", cfg.grid}};
  doc["solver"] = {{"tol", cfg.solver.tol},
                   {"max_iter", cfg.solver.max_iter},
                   {"damping", cfg.solver.damping}};
  doc["occupancy"] = to_string(cfg.occupancy);
  if (cfg.sim) {
    const auto& s = *cfg.sim;
    doc["simulation"] = {{"slots", s.slots},
                         {"warmup", s.effective_warmup()},
                         {"seed", s.seed},
                         {"replications", s.replications},
                         {"mode", to_string(s.mode)},
                         {"collide", to_string(s.collide_semantics)}};
  }
  const auto& f = cfg.figures;
  doc["figures"] = {{"k_factor_db", f.k_factor_db},     {"snr_from", f.snr_from},
                    {"snr_to", f.snr_to},               {"snr_step", f.snr_step},
                    {"load_from", f.load_from},         {"load_to", f.load_to},
                    {"load_step", f.load_step},         {"k_family", f.k_family},
                    {"l_family", f.l_family},           {"k_for_l_family", f.k_for_l_family},
                    {"l_for_k_family", f.l_for_k_family}};
  return doc;
}

ExperimentConfig merge_json(ExperimentConfig cfg, const json& input) {
  const json& doc = input.contains("config") ? input.at("config") : input;
  try {
    read_if(doc, "label", cfg.label);
    read_if(doc, "out", cfg.out_dir);
    if (doc.contains("params")) {
      const auto& p = doc.at("params");
      read_if(p, "n_users", cfg.base.n_users);
      read_if(p, "request_channels", cfg.base.request_channels);
      read_if(p, "data_channels", cfg.base.data_channels);
      read_if(p, "request_prob", cfg.base.request_prob);
      read_if(p, "retx_prob", cfg.base.retx_prob);
      read_if(p, "packet_bits", cfg.base.packet_bits);
      read_if(p, "bit_error_rate", cfg.base.bit_error_rate);
      read_if(p, "max_attempts", cfg.base.max_attempts);
      read_if(p, "request_energy", cfg.base.request_energy);
    }
    if (doc.contains("sweep")) {
      const auto& s = doc.at("sweep");
      if (s.contains("variable"))
        cfg.variable = parse_sweep_variable(s.at("variable").get<std::string>());
      if (s.contains("grid")) {
        s.at("grid").get_to(cfg.grid);
      } else if (s.contains("from") || s.contains("to") || s.contains("step")) {
        cfg.grid = make_grid(s.at("from").get<double>(), s.at("to").get<double>(),
                             s.at("step").get<double>());
      }
    }
    if (doc.contains("solver")) {
      const auto& s = doc.at("solver");
      read_if(s, "tol", cfg.solver.tol);
      read_if(s, "max_iter", cfg.solver.max_iter);
      read_if(s, "damping", cfg.solver.damping);
    }
    if (doc.contains("occupancy")) cfg.occupancy = parse_occupancy(doc.at("occupancy").get<std::string>());
    if (doc.contains("simulation") && !doc.at("simulation").is_null()) {
      const auto& s = doc.at("simulation");
      SimConfig sim = cfg.sim.value_or(SimConfig{});
      read_if(s, "slots", sim.slots);
      if (s.contains("warmup")) sim.warmup = s.at("warmup").get<std::int64_t>();
      read_if(s, "seed", sim.seed);
      read_if(s, "replications", sim.replications);
      if (s.contains("mode")) sim.mode = parse_sim_mode(s.at("mode").get<std::string>());
      if (s.contains("collide"))
        sim.collide_semantics = parse_collide_semantics(s.at("collide").get<std::string>());
      cfg.sim = sim;
    }
    if (doc.contains("figures")) {
      const auto& f = doc.at("figures");
      auto& fig = cfg.figures;
      read_if(f, "k_factor_db", fig.k_factor_db);
      read_if(f, "snr_from", fig.snr_from);
      read_if(f, "snr_to", fig.snr_to);
      read_if(f, "snr_step", fig.snr_step);
      read_if(f, "load_from", fig.load_from);
      read_if(f, "load_to", fig.load_to);
      read_if(f, "load_step", fig.load_step);
      read_if(f, "k_family", fig.k_family);
      read_if(f, "l_family", fig.l_family);
      read_if(f, "k_for_l_family", fig.k_for_l_family);
      read_if(f, "l_for_k_family", fig.l_for_k_family);
    }
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("malformed config: ") + ex.what());
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig defaults) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& ex) {
    throw ConfigError("config file " + path.string() + " is not valid JSON: " + ex.what());
  }
  return merge_json(std::move(defaults), doc);
}

PointResult evaluate_point(const ModelParams& params, double value, const SolverConfig& solver,
                           TransmitOccupancy occupancy, const std::optional<SimConfig>& sim) {
  PointResult pt;
  pt.value = value;
  pt.params = params;
  try {
    auto fp = solve_fixed_point(params, solver);
    pt.converged = true;
    pt.iterations = fp.iterations;
    pt.residual = fp.residual;
    pt.state = std::move(fp.state);
    pt.request = request_metrics(pt.state, params, occupancy);
    pt.data = data_metrics(pt.state, params, occupancy);
  } catch (const NonConvergence& ex) {
    pt.converged = false;
    pt.failure = ex.what();
    pt.iterations = ex.iterations();
    pt.residual = ex.last_residual();
  }
  if (sim) {
    pt.sim = simulate(params, *sim);
    pt.sim_metrics = estimate_metrics(*pt.sim, params, occupancy);
  }
  return pt;
}

bool SweepResult::all_converged() const {
  return std::all_of(points.begin(), points.end(), [](const auto& p) { return p.converged; });
}

SweepResult run_sweep(const ExperimentConfig& cfg) {
  validate(cfg);
  SweepResult result;
  result.variable = cfg.variable;
  result.with_sim = cfg.sim.has_value();

  std::vector<std::future<PointResult>> pending;
  pending.reserve(cfg.grid.size());
  for (double v : cfg.grid) {
    pending.push_back(std::async(std::launch::async, [&cfg, v] {
      return evaluate_point(with_value(cfg.base, cfg.variable, v), v, cfg.solver, cfg.occupancy,
                            cfg.sim);
    }));
  }
  for (auto& f : pending) result.points.push_back(f.get());
  return result;
}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (value == 0.0) return "0";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 12);
  return std::string(buf, end);
}

std::vector<std::string> sweep_header(SweepVariable variable, bool with_sim) {
  std::vector<std::string> h{std::string(to_string(variable)),
                             "G", "x", "s_i", "s_c", "s_t_total",
                             "Th", "p_a", "tau", "E_dB",
                             "Th_data", "p_a_data", "tau_data", "E_data_dB",
                             "iterations", "status"};
  if (with_sim) {
    for (const char* name : {"sim_s_i", "sim_s_c", "sim_s_t_total", "sim_x", "sim_Th", "sim_p_a"}) {
      h.emplace_back(name);
      h.push_back(std::string(name) + "_se");
    }
    h.insert(h.end(), {"sim_tau", "sim_E_dB", "sim_Th_data", "sim_p_a_data"});
  }
  return h;
}

std::vector<std::string> sweep_row(const PointResult& pt, bool with_sim) {
  const auto& p = pt.params;
  std::vector<std::string> r{format_number(pt.value),
                             format_number(p.n_users * p.request_prob)};
  if (pt.converged) {
    for (double v : {pt.state.success_prob, pt.state.idle, pt.state.collide,
                     pt.state.transmit_total, pt.request.throughput, pt.request.acceptance,
                     pt.request.delay, pt.request.energy_db, pt.data.throughput,
                     pt.data.acceptance, pt.data.delay, pt.data.energy_db})
      r.push_back(format_number(v));
  } else {
    r.insert(r.end(), 12, "nan");
  }
  r.push_back(std::to_string(pt.iterations));
  r.emplace_back(pt.converged ? "ok" : "failed");
  if (with_sim) {
    if (pt.sim && pt.sim_metrics) {
      const auto& s = *pt.sim;
      for (const Estimate* e : {&s.idle, &s.collide, &s.transmit_total, &s.success_prob,
                                &s.throughput, &s.request_acceptance}) {
        r.push_back(format_number(e->mean));
        r.push_back(format_number(e->std_error));
      }
      const auto& [req, data] = *pt.sim_metrics;
      for (double v : {req.delay, req.energy_db, data.throughput, data.acceptance})
        r.push_back(format_number(v));
    } else {
      r.insert(r.end(), 16, "nan");
    }
  }
  return r;
}

std::string join_csv(const std::vector<std::string>& cells) {
  std::string line;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) line += ',';
    line += cells[i];
  }
  return line;
}

void write_sweep_csv(std::ostream& out, const SweepResult& result) {
  out << join_csv(sweep_header(result.variable, result.with_sim)) << '\n';
  for (const auto& pt : result.points) out << join_csv(sweep_row(pt, result.with_sim)) << '\n';
}

json point_status(const PointResult& pt) {
  json j = {{"value", pt.value},
            {"status", pt.converged ? "ok" : "failed"},
            {"iterations", pt.iterations},
            {"residual", pt.residual}};
  if (!pt.converged) j["error"] = pt.failure;
  return j;
}

json RunManifest::to_json() const {
  return {{"tool", std::string(kToolVersion)},
          {"command", command},
          {"config", mcwlan::to_json(config)},
          {"points", points},
          {"seeds", seeds},
          {"outputs", outputs},
          {"wall_clock_seconds", wall_clock_seconds}};
}

std::vector<std::string> fig2_header() {
  return {"modulation", "fading", "k_factor", "snr_db", "ber", "log10_ber"};
}

void write_fig2_csv(std::ostream& out, const FigureConfig& figures) {
  const auto grid = make_grid(figures.snr_from, figures.snr_to, figures.snr_step);
  out << join_csv(fig2_header()) << '\n';
  for (auto mod : {Modulation::Bpsk, Modulation::Qam16}) {
    for (auto fading : {Fading::Awgn, Fading::Rayleigh, Fading::Rician}) {
      ChannelSpec spec{mod, fading, db_to_linear(figures.k_factor_db)};
      const double k = fading == Fading::Rician ? spec.k_factor : 0.0;
      for (const auto& pt : ber_curve(spec, grid)) {
        out << join_csv({std::string(to_string(mod)), std::string(to_string(fading)),
                         format_number(k), format_number(pt.snr_db), format_number(pt.ber),
                         format_number(pt.log10_ber)})
            << '\n';
      }
    }
  }
}

std::vector<FigureSeries> figure_series(const FigureConfig& figures) {
  std::vector<FigureSeries> series;
  auto add = [&](int k, int l) {
    for (const auto& s : series)
      if (s.request_channels == k && s.data_channels == l) return;
    series.push_back({k, l});
  };
  for (int k : figures.k_family) add(k, figures.l_for_k_family);
  for (int l : figures.l_family) add(figures.k_for_l_family, l);
  return series;
}

bool reproduce_figures(const ExperimentConfig& cfg) {
  const auto started = std::chrono::steady_clock::now();
  const auto& fig = cfg.figures;
  const auto loads = make_grid(fig.load_from, fig.load_to, fig.load_step);
  const auto series = figure_series(fig);

  // One sweep of a per series; each validates its own grid.
  std::vector<SweepResult> sweeps;
  for (const auto& s : series) {
    ExperimentConfig sc = cfg;
    sc.base.request_channels = s.request_channels;
    sc.base.data_channels = s.data_channels;
    sc.variable = SweepVariable::RequestProb;
    sc.grid = loads;
    sc.sim.reset();
    sweeps.push_back(run_sweep(sc));
  }

  const std::filesystem::path dir = cfg.out_dir.empty() ? "." : cfg.out_dir;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::system_error(ec, "cannot create output directory " + dir.string());

  RunManifest manifest;
  manifest.command = "reproduce-figures";
  manifest.config = cfg;

  {
    const auto path = dir / "fig2.csv";
    auto out = open_output(path);
    write_fig2_csv(out, fig);
    check_written(out, path);
    manifest.outputs.push_back("fig2.csv");
  }

  struct Figure {
    const char* file;
    double RequestMetrics::*request;
    double DataMetrics::*data;
  };
  const Figure figures[] = {
      {"fig4.csv", &RequestMetrics::throughput, &DataMetrics::throughput},
      {"fig5.csv", &RequestMetrics::acceptance, &DataMetrics::acceptance},
      {"fig6.csv", &RequestMetrics::delay, &DataMetrics::delay},
      {"fig7.csv", &RequestMetrics::energy_db, &DataMetrics::energy_db},
  };
  for (const auto& f : figures) {
    std::vector<std::string> header{"a", "G"};
    for (const auto& s : series)
      header.push_back("request_k" + std::to_string(s.request_channels) + "_L" +
                       std::to_string(s.data_channels));
    for (const auto& s : series)
      header.push_back("data_k" + std::to_string(s.request_channels) + "_L" +
                       std::to_string(s.data_channels));

    const auto path = dir / f.file;
    auto out = open_output(path);
    out << join_csv(header) << '\n';
    for (std::size_t i = 0; i < loads.size(); ++i) {
      std::vector<std::string> row{format_number(loads[i]),
                                   format_number(cfg.base.n_users * loads[i])};
      for (const auto& sw : sweeps) {
        const auto& pt = sw.points[i];
        row.push_back(pt.converged ? format_number(pt.request.*(f.request)) : "nan");
      }
      for (const auto& sw : sweeps) {
        const auto& pt = sw.points[i];
        row.push_back(pt.converged ? format_number(pt.data.*(f.data)) : "nan");
      }
      out << join_csv(row) << '\n';
    }
    check_written(out, path);
    manifest.outputs.emplace_back(f.file);
  }

  bool ok = true;
  for (std::size_t s = 0; s < series.size(); ++s) {
    for (const auto& pt : sweeps[s].points) {
      auto status = point_status(pt);
      status["request_channels"] = series[s].request_channels;
      status["data_channels"] = series[s].data_channels;
      manifest.points.push_back(std::move(status));
      ok = ok && pt.converged;
    }
  }
  manifest.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  const auto path = dir / "manifest.json";
  auto out = open_output(path);
  out << manifest.to_json().dump(2) << '\n';
  check_written(out, path);
  return ok;
}

}  // namespace mcwlan
