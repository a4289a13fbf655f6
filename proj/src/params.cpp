#include "mcwlan/params.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "mcwlan/errors.hpp"

namespace mcwlan {

NonConvergence::NonConvergence(int iterations, double last_residual)
    : std::runtime_error("fixed point did not converge after " + std::to_string(iterations) +
                         " iterations (last residual " + std::to_string(last_residual) + ")"),
      iterations_(iterations),
      last_residual_(last_residual) {}

namespace {

[[noreturn]] void out_of_range(const char* field, double value, const char* range) {
  std::ostringstream msg;
  msg << field << " = " << value << " is outside its legal range " << range;
  throw RangeError(field, msg.str());
}

void require_count(const char* field, int value) {
  if (value < 1) out_of_range(field, value, "[1, inf)");
}

}  // namespace

ModelParams validate(const ModelParams& params) {
  require_count("n_users", params.n_users);
  require_count("request_channels", params.request_channels);
  require_count("data_channels", params.data_channels);
  // Negated comparisons so that NaN is rejected as well.
  if (!(params.request_prob >= 0.0 && params.request_prob <= 1.0))
    out_of_range("request_prob", params.request_prob, "[0, 1]");
  if (!(params.retx_prob > 0.0 && params.retx_prob <= 1.0))
    out_of_range("retx_prob", params.retx_prob, "(0, 1]");
  require_count("packet_bits", params.packet_bits);
  if (!(params.bit_error_rate >= 0.0 && params.bit_error_rate < 1.0))
    out_of_range("bit_error_rate", params.bit_error_rate, "[0, 1)");
  require_count("max_attempts", params.max_attempts);
  if (!(params.request_energy > 0.0) || !std::isfinite(params.request_energy))
    out_of_range("request_energy", params.request_energy, "(0, inf)");
  return params;
}

double frame_error_prob(double bit_error_rate, int bits) {
  // 1 - exp(b log1p(-eps)) keeps full relative precision when eps*b is tiny.
  return -std::expm1(static_cast<double>(bits) * std::log1p(-bit_error_rate));
}

}  // namespace mcwlan
