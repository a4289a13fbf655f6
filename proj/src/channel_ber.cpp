#include "mcwlan/channel_ber.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cctype>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "mcwlan/errors.hpp"

namespace mcwlan {

namespace {

constexpr double kIntegrationRelTol = 1e-6;

/// Conditional BER of the form coef * Q(sqrt(gain * gamma_b)).
struct AwgnShape {
  double coef;
  double gain;
};

AwgnShape awgn_shape(Modulation m) {
  switch (m) {
    case Modulation::Bpsk:
      return {1.0, 2.0};
    case Modulation::Qam16: {
      // (4/log2 M)(1 - 1/sqrt M) Q(sqrt(3 Es/N0 / (M-1))), Es = 4 Eb, M = 16
      constexpr double m_ary = 16.0;
      constexpr double bits = 4.0;
      return {(4.0 / bits) * (1.0 - 1.0 / std::sqrt(m_ary)), 3.0 * bits / (m_ary - 1.0)};
    }
  }
  return {1.0, 2.0};
}

/// I0(z) e^{-z}
double scaled_bessel_i0(double z) {
  if (z < 700.0) return std::cyl_bessel_i(0.0, z) * std::exp(-z);
  // Hankel asymptotic expansion; terms shrink like (1/8z)^k.
  const double inv = 1.0 / (8.0 * z);
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k <= 6; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= odd * odd * inv / k;
    sum += term;
  }
  return sum / std::sqrt(2.0 * std::numbers::pi * z);
}

/// ln of the density of v = sqrt(gamma / mean_gamma) under Rician fading.
/// The exponent -K - (1+K) v^2 + 2 sqrt(K (1+K)) v is kept as a square so the
/// O(K) terms do not cancel.
double log_rician_amplitude_density(double k_factor, double v) {
  const double root = std::sqrt(1.0 + k_factor);
  const double gap = root * v - std::sqrt(k_factor);
  const double z = 2.0 * std::sqrt(k_factor) * root * v;
  return std::log(2.0 * v) + std::log1p(k_factor) - gap * gap + std::log(scaled_bessel_i0(z));
}

/// E[coef Q(sqrt(gain * mean_gamma * u))] over the Rician power density.
double rician_average(const AwgnShape& shape, double mean_gamma, double k_factor) {
  using Quadrature = boost::math::quadrature::gauss_kronrod<double, 15>;

  // Integrate over v = sqrt(u): Q(sqrt(scale u)) has a sqrt kink at u = 0
  // that stalls adaptive refinement, while the v form is smooth.
  const double scale = shape.gain * mean_gamma;
  auto integrand = [&](double v) {
    if (v <= 0.0) return 0.0;
    return std::exp(log_q_function(std::sqrt(scale) * v) +
                    log_rician_amplitude_density(k_factor, v));
  };

  // Density is negligible past v = (sqrt K + 9) / sqrt(1 + K). At high SNR the
  // conditional BER confines the mass to v ~ 1/sqrt(scale), so pieces are
  // also laid out geometrically from there to avoid stepping over it.
  const double upper = (std::sqrt(k_factor) + 9.0) / std::sqrt(1.0 + k_factor);
  std::vector<double> cuts{0.0, upper};
  for (int i = 1; i < 32; ++i) cuts.push_back(upper * i / 32.0);
  // Large K squeezes the density around v = 1 with width ~ 1/sqrt(4(1 + K)).
  const double width = 0.5 / std::sqrt(1.0 + k_factor);
  for (int i = -40; i <= 40; ++i) {
    const double v = 1.0 + 0.25 * i * width;
    if (v > 0.0 && v < upper) cuts.push_back(v);
  }
  for (double v = 0.03 / std::sqrt(scale); v < upper; v *= 2.0) cuts.push_back(v);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  double total = 0.0;
  double total_error = 0.0;
  auto add_piece = [&](double lo, double hi) {
    double error = 0.0;
    total += Quadrature::integrate(integrand, lo, hi, 15, 1e-9, &error);
    total_error += error;
  };
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) add_piece(cuts[i], cuts[i + 1]);
  add_piece(upper, std::numeric_limits<double>::infinity());

  if (!std::isfinite(total) || total_error > kIntegrationRelTol * total) {
    std::ostringstream msg;
    msg << "Rician BER quadrature reached error " << total_error << " on value " << total;
    throw NumericalIntegrationFailure(msg.str());
  }
  return shape.coef * total;
}

/// 1 - sqrt(r / (1 + r)) without cancellation.
double one_minus_sqrt_ratio(double r) {
  return 1.0 / ((1.0 + r) * (1.0 + std::sqrt(r / (1.0 + r))));
}

std::string lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return out;
}

}  // namespace

double default_rician_k() { return db_to_linear(kDefaultRicianKdB); }

ChannelSpec validate(const ChannelSpec& spec) {
  if (!(spec.k_factor >= 0.0) || !std::isfinite(spec.k_factor))
    throw RangeError("k_factor", "Rician K-factor must be finite and >= 0");
  return spec;
}

std::string_view to_string(Modulation m) { return m == Modulation::Bpsk ? "BPSK" : "16QAM"; }

std::string_view to_string(Fading f) {
  switch (f) {
    case Fading::Awgn:
      return "AWGN";
    case Fading::Rayleigh:
      return "Rayleigh";
    case Fading::Rician:
      return "Rician";
  }
  return "?";
}

Modulation parse_modulation(std::string_view text) {
  const auto t = lower(text);
  if (t == "bpsk") return Modulation::Bpsk;
  if (t == "16qam" || t == "qam16" || t == "16-qam") return Modulation::Qam16;
  throw ConfigError("unknown modulation '" + std::string(text) + "' (expected BPSK or 16QAM)");
}

Fading parse_fading(std::string_view text) {
  const auto t = lower(text);
  if (t == "awgn") return Fading::Awgn;
  if (t == "rayleigh") return Fading::Rayleigh;
  if (t == "rician" || t == "rice") return Fading::Rician;
  throw ConfigError("unknown fading '" + std::string(text) + "' (expected AWGN, Rayleigh or Rician)");
}

std::string describe(const ChannelSpec& spec) {
  std::ostringstream out;
  out << to_string(spec.modulation) << '/' << to_string(spec.fading);
  if (spec.fading == Fading::Rician) out << "(K=" << spec.k_factor << ')';
  return out.str();
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

double q_function(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double log_q_function(double x) {
  if (x < 30.0) return std::log(q_function(x));
  // Asymptotic tail: Q(x) ~ phi(x)/x (1 - 1/x^2 + 3/x^4 - 15/x^6 + 105/x^8)
  const double inv2 = 1.0 / (x * x);
  const double series = 1.0 - inv2 * (1.0 - 3.0 * inv2 * (1.0 - 5.0 * inv2 * (1.0 - 7.0 * inv2)));
  return -0.5 * x * x - std::log(x) - 0.5 * std::log(2.0 * std::numbers::pi) + std::log(series);
}

double ber(const ChannelSpec& spec, double snr_db) {
  const auto shape = awgn_shape(spec.modulation);
  const double gamma = db_to_linear(snr_db);
  switch (spec.fading) {
    case Fading::Awgn:
      return shape.coef * q_function(std::sqrt(shape.gain * gamma));
    case Fading::Rayleigh:
      // E[Q(sqrt(g gamma))] = (1 - sqrt(r / (1 + r))) / 2 with r = g mean_gamma / 2
      return shape.coef * 0.5 * one_minus_sqrt_ratio(0.5 * shape.gain * gamma);
    case Fading::Rician:
      return rician_average(shape, gamma, validate(spec).k_factor);
  }
  return 0.0;
}

double log10_ber(const ChannelSpec& spec, double snr_db) {
  if (spec.fading == Fading::Awgn) {
    const auto shape = awgn_shape(spec.modulation);
    const double x = std::sqrt(shape.gain * db_to_linear(snr_db));
    return std::log10(shape.coef) + log_q_function(x) / std::numbers::ln10;
  }
  return std::log10(ber(spec, snr_db));
}

double required_snr(const ChannelSpec& spec, double target_ber) {
  if (!(target_ber > 0.0 && target_ber < 0.5))
    throw RangeError("target_ber", "target BER must lie in (0, 0.5)");
  const double goal = std::log10(target_ber);
  double lo = kSnrSearchLowDb;
  double hi = kSnrSearchHighDb;
  // BER falls with SNR: f(lo) >= goal >= f(hi) must hold.
  if (log10_ber(spec, lo) < goal || log10_ber(spec, hi) > goal) {
    std::ostringstream msg;
    msg << "BER " << target_ber << " is not reachable for " << describe(spec) << " within ["
        << kSnrSearchLowDb << ", " << kSnrSearchHighDb << "] dB";
    throw BracketError(msg.str());
  }
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    if (log10_ber(spec, mid) > goal)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

std::vector<BerPoint> ber_curve(const ChannelSpec& spec, std::span<const double> snr_grid) {
  if (snr_grid.empty()) throw RangeError("snr_grid", "SNR grid must not be empty");
  for (std::size_t i = 1; i < snr_grid.size(); ++i)
    if (!(snr_grid[i] > snr_grid[i - 1]))
      throw RangeError("snr_grid", "SNR grid must be strictly increasing");

  std::vector<BerPoint> curve;
  curve.reserve(snr_grid.size());
  for (double snr : snr_grid) curve.push_back({snr, ber(spec, snr), log10_ber(spec, snr)});
  return curve;
}

}  // namespace mcwlan
