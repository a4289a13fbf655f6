#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mcwlan {

enum class Modulation { Bpsk, Qam16 };
enum class Fading { Awgn, Rayleigh, Rician };

/// Default Rician K-factor, 7 dB. Puts the BPSK/Rician operating point for
/// BER 1e-3 near 13 dB.
inline constexpr double kDefaultRicianKdB = 7.0;
double default_rician_k();

/// Modulation and fading pair. SNR arguments are per-bit Eb/N0 in dB for
/// every modulation; 16-QAM uses Es/N0 = 4 Eb/N0.
struct ChannelSpec {
  Modulation modulation = Modulation::Bpsk;
  Fading fading = Fading::Awgn;
  double k_factor = default_rician_k();  // linear, Rician only

  bool operator==(const ChannelSpec&) const = default;
};

ChannelSpec validate(const ChannelSpec& spec);

std::string_view to_string(Modulation m);
std::string_view to_string(Fading f);
Modulation parse_modulation(std::string_view text);
Fading parse_fading(std::string_view text);
/// "BPSK/Rayleigh", "16QAM/Rician(K=5.01)"
std::string describe(const ChannelSpec& spec);

double db_to_linear(double db);

/// Gaussian tail probability Q(x).
double q_function(double x);
/// ln Q(x), finite far beyond the point where Q underflows.
double log_q_function(double x);

/// Bit error probability at the given Eb/N0. Underflows to 0 for AWGN far
/// above the waterfall; use log10_ber there.
double ber(const ChannelSpec& spec, double snr_db);
double log10_ber(const ChannelSpec& spec, double snr_db);

/// Eb/N0 in dB at which ber(spec, .) equals target_ber. Searches [-10, 80] dB
/// and throws BracketError when the target lies outside that range.
double required_snr(const ChannelSpec& spec, double target_ber);

inline constexpr double kSnrSearchLowDb = -10.0;
inline constexpr double kSnrSearchHighDb = 80.0;

struct BerPoint {
  double snr_db;
  double ber;
  double log10_ber;
};

/// Pointwise ber over a nonempty, strictly increasing grid.
std::vector<BerPoint> ber_curve(const ChannelSpec& spec, std::span<const double> snr_grid);

}  // namespace mcwlan
