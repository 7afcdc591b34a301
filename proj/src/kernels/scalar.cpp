#include <algorithm>
#include <cmath>

#include "kernels_impl.hpp"
#include "qboost/normal.hpp"

namespace qboost::kernels::scalar {

double dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void symv(const double* a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = dot(a + i * n, x, n);
}

void rank2_update(double* a, const double* s, const double* u, double alpha,
                  double beta, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double cs = alpha * s[i] - beta * u[i];
    const double cu = -beta * s[i];
    double* row = a + i * n;
    for (std::size_t j = 0; j < n; ++j) row[j] += cs * s[j] + cu * u[j];
  }
}

void probit_terms(const double* z, const double* wp, const double* wn, double* ll,
                  double* dll, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) {
    const double a = std::abs(z[k]) * kInvSqrt2;
    const double ex = erfcx(a);
    const double tail = 0.5 * std::erfc(a);  // Phi(-|z|)
    const double log_tail = std::log(0.5 * ex) - a * a;
    const double log_head = std::log1p(-tail);
    const double lam_tail = kSqrt2OverPi / ex;
    const double lam_head = kInvSqrt2Pi * std::exp(-a * a) / (1.0 - tail);
    if (z[k] >= 0.0) {
      ll[k] = wp[k] * log_head + wn[k] * log_tail;
      dll[k] = wp[k] * lam_head - wn[k] * lam_tail;
    } else {
      ll[k] = wp[k] * log_tail + wn[k] * log_head;
      dll[k] = wp[k] * lam_tail - wn[k] * lam_head;
    }
  }
}

void logistic_terms(const double* d, const double* wp, const double* wn, double* ll,
                    double* dll, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) {
    const double x = d[k];
    const double e = std::exp(-std::abs(x));
    const double l1p = std::log1p(e);
    double log_p, log_q, p;
    if (x >= 0.0) {
      log_p = -l1p;
      log_q = -x - l1p;
      p = 1.0 / (1.0 + e);
    } else {
      log_p = x - l1p;
      log_q = -l1p;
      p = e / (1.0 + e);
    }
    ll[k] = wp[k] * log_p + wn[k] * log_q;
    dll[k] = wp[k] * (1.0 - p) - wn[k] * p;
  }
}

void normal_cdf(const double* z, double* out, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) out[k] = 0.5 * std::erfc(-z[k] * kInvSqrt2);
}

namespace {

// p and q = 1 - p, each computed without cancellation.
inline void link_pq(Link link, double x, double& p, double& q) {
  if (link == Link::Probit) {
    const double a = -x * kInvSqrt2;
    const double e = std::erfc(std::abs(a));
    if (a >= 0.0) {
      p = 0.5 * e;
      q = 1.0 - 0.5 * e;
    } else {
      p = 1.0 - 0.5 * e;
      q = 0.5 * e;
    }
  } else {
    const double e = std::exp(-std::abs(x));
    if (x >= 0.0) {
      p = 1.0 / (1.0 + e);
      q = e / (1.0 + e);
    } else {
      p = e / (1.0 + e);
      q = 1.0 / (1.0 + e);
    }
  }
}

inline double xlogx_clamped(double p) {
  const double c = std::clamp(p, kProbabilityFloor, 1.0 - kProbabilityFloor);
  return c * std::log(c);
}

}  // namespace

void expected_gain(Link link, const double* mean, const double* spread,
                   const double* scale, const double* nodes, const double* weights,
                   std::size_t n_nodes, double* out, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) {
    double ep = 0.0, eq = 0.0, eplogp = 0.0, eqlogq = 0.0;
    for (std::size_t m = 0; m < n_nodes; ++m) {
      const double x = scale[k] * (mean[k] + spread[k] * nodes[m]);
      double p, q;
      link_pq(link, x, p, q);
      ep += weights[m] * p;
      eq += weights[m] * q;
      eplogp += weights[m] * xlogx_clamped(p);
      eqlogq += weights[m] * xlogx_clamped(q);
    }
    const double u = eplogp + eqlogq - xlogx_clamped(ep) - xlogx_clamped(eq);
    out[k] = std::max(u, 0.0);
  }
}

}  // namespace qboost::kernels::scalar
