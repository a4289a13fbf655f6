#include <cmath>
#include <vector>

#include "doctest.h"
#include "mcwlan/channel_ber.hpp"
#include "mcwlan/errors.hpp"
#include "oracles.hpp"

using namespace mcwlan;

namespace {

const ChannelSpec kBpskAwgn{Modulation::Bpsk, Fading::Awgn};
const ChannelSpec kBpskRayleigh{Modulation::Bpsk, Fading::Rayleigh};
const ChannelSpec kBpskRician{Modulation::Bpsk, Fading::Rician};

std::vector<double> grid(double from, double to, double step) {
  std::vector<double> g;
  for (int i = 0; from + i * step <= to + 1e-9; ++i) g.push_back(from + i * step);
  return g;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_CASE("Gaussian tail") {
  CHECK(q_function(0.0) == 0.5);
  CHECK(q_function(1.0) == doctest::Approx(0.15865525393145705).epsilon(1e-14));
  for (double x : {0.5, 3.0, 10.0, 29.0, 31.0, 36.0})
    CHECK(log_q_function(x) == doctest::Approx(std::log(q_function(x))).epsilon(1e-11));
  // continuity across the asymptotic switch and far beyond underflow
  CHECK(log_q_function(30.0 - 1e-9) == doctest::Approx(log_q_function(30.0)).epsilon(1e-9));
  CHECK(std::isfinite(log_q_function(1e3)));
}

TEST_CASE("closed forms") {
  // 16-QAM/AWGN at 10 dB: 0.75 Q(sqrt(8))
  CHECK(ber({Modulation::Qam16, Fading::Awgn}, 10.0) ==
        doctest::Approx(0.00175415061789272).epsilon(1e-12));
  CHECK(ber(kBpskRayleigh, 24.0) == doctest::Approx(0.000992306076136788).epsilon(1e-12));
  CHECK(ber(kBpskAwgn, 60.0) < 1e-12);
  CHECK(ber(kBpskAwgn, -200.0) == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("BPSK/Rayleigh at 24 dB is near 1e-3") {
  const double b = ber(kBpskRayleigh, 24.0);
  CHECK(b <= 1e-3 * 1.3);
  CHECK(b >= 1e-3 / 1.3);
}

TEST_CASE("Rician quadrature matches the MGF route") {
  const double k = default_rician_k();
  for (double snr : {-10.0, -3.0, 0.0, 5.0, 13.0, 20.0, 30.0, 45.0, 60.0, 80.0}) {
    const double gamma = db_to_linear(snr);
    CHECK(rel(ber(kBpskRician, snr), oracle::rician_ber_mgf(1.0, 2.0, gamma, k)) < 1e-6);
    CHECK(rel(ber({Modulation::Qam16, Fading::Rician}, snr),
              oracle::rician_ber_mgf(0.75, 0.8, gamma, k)) < 1e-6);
  }
  for (double kk : {0.0, 0.5, 20.0, 1000.0}) {
    for (double snr : {0.0, 10.0, 20.0}) {
      ChannelSpec spec{Modulation::Bpsk, Fading::Rician, kk};
      CHECK(rel(ber(spec, snr), oracle::rician_ber_mgf(1.0, 2.0, db_to_linear(snr), kk)) < 1e-6);
    }
  }
  // 30-digit values
  CHECK(rel(ber(kBpskRician, 13.0), 0.0010356984379168662) < 1e-6);
  CHECK(rel(ber(kBpskRician, 60.0), 1.0007581017209575e-8) < 1e-6);
  CHECK(rel(ber({Modulation::Bpsk, Fading::Rician, 1000.0}, 20.0), 1.0061856611951176e-41) < 1e-6);
}

TEST_CASE("Rician with K=0 is Rayleigh") {
  const ChannelSpec k0{Modulation::Bpsk, Fading::Rician, 0.0};
  const ChannelSpec q0{Modulation::Qam16, Fading::Rician, 0.0};
  for (double snr : grid(-10.0, 60.0, 2.5)) {
    CHECK(rel(ber(k0, snr), ber(kBpskRayleigh, snr)) < 1e-6);
    CHECK(rel(ber(q0, snr), ber({Modulation::Qam16, Fading::Rayleigh}, snr)) < 1e-6);
  }
  CHECK(rel(ber(k0, 15.0), ber(kBpskRayleigh, 15.0)) < 1e-6);
}

TEST_CASE("BER is strictly decreasing in SNR") {
  const auto g = grid(-10.0, 60.0, 0.5);
  for (auto mod : {Modulation::Bpsk, Modulation::Qam16}) {
    for (auto fading : {Fading::Awgn, Fading::Rayleigh, Fading::Rician}) {
      const ChannelSpec spec{mod, fading};
      double prev = 1.0;
      for (double snr : g) {
        const double lb = log10_ber(spec, snr);
        CHECK_MESSAGE(lb < prev, describe(spec) << " at " << snr << " dB");
        prev = lb;
      }
    }
  }
}

TEST_CASE("fading and modulation orderings on the figure grid") {
  for (double snr : grid(0.0, 40.0, 0.5)) {
    const double awgn = log10_ber(kBpskAwgn, snr);
    const double rice = log10_ber(kBpskRician, snr);
    const double ray = log10_ber(kBpskRayleigh, snr);
    CHECK(ray >= rice);
    CHECK(rice >= awgn);
    for (auto fading : {Fading::Awgn, Fading::Rayleigh, Fading::Rician})
      CHECK(log10_ber({Modulation::Qam16, fading}, snr) >= log10_ber({Modulation::Bpsk, fading}, snr));
  }
}

TEST_CASE("required SNR") {
  CHECK(std::abs(required_snr(kBpskRayleigh, 1e-3) - 24.0) <= 0.5);
  // invert Q(sqrt(2 g)) = 1e-3 at 30 digits: 6.78952261240417 dB
  CHECK(required_snr(kBpskAwgn, 1e-3) == doctest::Approx(6.78952261240417).epsilon(1e-9));
  CHECK(required_snr(kBpskRician, 1e-3) == doctest::Approx(13.0971309144493).epsilon(1e-6));

  for (auto mod : {Modulation::Bpsk, Modulation::Qam16}) {
    for (auto fading : {Fading::Awgn, Fading::Rayleigh, Fading::Rician}) {
      const ChannelSpec spec{mod, fading};
      for (double target : {1e-2, 1e-3, 1e-4}) {
        const double snr = required_snr(spec, target);
        CHECK(rel(ber(spec, snr), target) < 1e-4);
      }
    }
  }
}

TEST_CASE("required SNR errors") {
  CHECK_THROWS_AS(required_snr(kBpskAwgn, 0.45), BracketError);
  CHECK_THROWS_AS(required_snr(kBpskRayleigh, 1e-12), BracketError);
  CHECK_THROWS_AS(required_snr(kBpskAwgn, 0.0), RangeError);
  CHECK_THROWS_AS(required_snr(kBpskAwgn, 0.5), RangeError);
}

TEST_CASE("BER curve") {
  const double one[] = {7.0};
  const auto single = ber_curve(kBpskAwgn, one);
  REQUIRE(single.size() == 1);
  CHECK(single[0].snr_db == 7.0);
  CHECK(single[0].ber == ber(kBpskAwgn, 7.0));

  const auto g = grid(0.0, 30.0, 1.0);
  const auto curve = ber_curve(kBpskAwgn, g);
  for (std::size_t i = 1; i < curve.size(); ++i) CHECK(curve[i].log10_ber < curve[i - 1].log10_ber);

  const auto wide = grid(0.0, 40.0, 0.5);
  const auto qam = ber_curve({Modulation::Qam16, Fading::Rayleigh}, wide);
  const auto bpsk = ber_curve(kBpskRayleigh, wide);
  for (std::size_t i = 0; i < wide.size(); ++i) CHECK(qam[i].ber >= bpsk[i].ber);

  CHECK_THROWS_AS(ber_curve(kBpskAwgn, std::vector<double>{}), RangeError);
  CHECK_THROWS_AS(ber_curve(kBpskAwgn, std::vector<double>{1.0, 1.0}), RangeError);
}

TEST_CASE("channel spec parsing") {
  CHECK(parse_modulation("bpsk") == Modulation::Bpsk);
  CHECK(parse_modulation("16-QAM") == Modulation::Qam16);
  CHECK(parse_fading("Rician") == Fading::Rician);
  CHECK_THROWS_AS(parse_fading("nakagami"), ConfigError);
  CHECK_THROWS_AS(validate(ChannelSpec{Modulation::Bpsk, Fading::Rician, -1.0}), RangeError);
  CHECK(default_rician_k() == doctest::Approx(5.011872336272722));
}
