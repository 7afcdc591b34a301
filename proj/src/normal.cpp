#include "qboost/normal.hpp"

#include <cmath>
#include <limits>

#include "qboost/error.hpp"

namespace qboost {

namespace {

double erfcx_nonnegative(double x) {
  const auto& c = detail::kErfcxCheb;
  const double t = 2.0 / (2.0 + x);
  const double ty = 4.0 * t - 2.0;
  double d = 0.0;
  double dd = 0.0;
  for (std::size_t j = c.size() - 1; j > 0; --j) {
    const double tmp = d;
    d = ty * d - dd + c[j];
    dd = tmp;
  }
  return t * std::exp(0.5 * (c[0] + ty * d) - dd);
}

}  // namespace

double erfcx(double x) {
  if (x >= 0.0) return erfcx_nonnegative(x);
  return 2.0 * std::exp(x * x) - erfcx_nonnegative(-x);
}

double normal_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

double normal_cdf(double z) { return 0.5 * std::erfc(-z * kInvSqrt2); }

double log_normal_cdf(double z) {
  if (z >= 0.0) return std::log1p(-0.5 * std::erfc(z * kInvSqrt2));
  const double a = -z * kInvSqrt2;
  return std::log(0.5 * erfcx_nonnegative(a)) - a * a;
}

double inverse_mills(double z) {
  if (z >= 0.0) return normal_pdf(z) / (1.0 - 0.5 * std::erfc(z * kInvSqrt2));
  return kSqrt2OverPi / erfcx_nonnegative(-z * kInvSqrt2);
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw UsageError("normal_quantile: p outside (0, 1)");
  // 1 - p is exact for p >= 0.5
  if (p > 0.5) return -normal_quantile(1.0 - p);
  // Newton on the concave log Phi(z) = log p. After the first step the
  // iterates approach the root monotonically from the left.
  const double target = std::log(p);
  double z = p > 0.1 ? 0.0 : -std::sqrt(-2.0 * target);
  for (int it = 0; it < 100; ++it) {
    const double step = (target - log_normal_cdf(z)) / inverse_mills(z);
    z += step;
    if (std::abs(step) <= 1e-15 * (1.0 + std::abs(z))) break;
  }
  return z;
}

}  // namespace qboost
