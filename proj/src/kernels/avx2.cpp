#if !defined(__AVX2__) || !defined(__FMA__)
#error "kernels/avx2.cpp must be compiled with -mavx2 -mfma"
#endif

#include <immintrin.h>

#include <algorithm>
#include <array>
#include <cstdint>

#include "kernels_impl.hpp"
#include "qboost/normal.hpp"

namespace qboost::kernels::avx2 {

namespace {

constexpr std::size_t kLanes = 4;

inline __m256d splat(double v) { return _mm256_set1_pd(v); }

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

constexpr std::array<double, 14> make_inverse_factorials() {
  std::array<double, 14> c{};
  double f = 1.0;
  for (std::size_t k = 0; k < c.size(); ++k) {
    if (k > 0) f *= static_cast<double>(k);
    c[k] = 1.0 / f;
  }
  return c;
}
constexpr auto kInvFact = make_inverse_factorials();

constexpr double kLog2e = 1.44269504088896340736;
constexpr double kLn2Hi = 6.93145751953125e-1;
constexpr double kLn2Lo = 1.42860682030941723212e-6;

// exp(x); inputs below -708 flush to zero, above 709 saturate.
inline __m256d exp_pd(__m256d x) {
  const __m256d lo = splat(-708.0);
  const __m256d xc = _mm256_max_pd(_mm256_min_pd(x, splat(709.0)), lo);
  const __m256d n = _mm256_round_pd(_mm256_mul_pd(xc, splat(kLog2e)),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, splat(kLn2Hi), xc);
  r = _mm256_fnmadd_pd(n, splat(kLn2Lo), r);
  __m256d p = splat(kInvFact[13]);
  for (int k = 12; k >= 0; --k) p = _mm256_fmadd_pd(p, r, splat(kInvFact[k]));
  __m256i e = _mm256_cvtepi32_epi64(_mm256_cvtpd_epi32(n));
  e = _mm256_slli_epi64(_mm256_add_epi64(e, _mm256_set1_epi64x(1023)), 52);
  const __m256d res = _mm256_mul_pd(p, _mm256_castsi256_pd(e));
  return _mm256_andnot_pd(_mm256_cmp_pd(x, lo, _CMP_LT_OQ), res);
}

// log(x) for positive normal x.
inline __m256d log_pd(__m256d x) {
  const __m256i bits = _mm256_castpd_si256(x);
  const __m256i exp_bits = _mm256_srli_epi64(bits, 52);
  __m256d m = _mm256_castsi256_pd(
      _mm256_or_si256(_mm256_and_si256(bits, _mm256_set1_epi64x(0x000FFFFFFFFFFFFFLL)),
                      _mm256_set1_epi64x(0x3FF0000000000000LL)));
  const __m256d two52 = splat(4503599627370496.0);
  __m256d e = _mm256_sub_pd(
      _mm256_castsi256_pd(_mm256_or_si256(exp_bits, _mm256_castpd_si256(two52))), two52);
  e = _mm256_sub_pd(e, splat(1023.0));
  const __m256d big = _mm256_cmp_pd(m, splat(kSqrt2), _CMP_GT_OQ);
  m = _mm256_blendv_pd(m, _mm256_mul_pd(m, splat(0.5)), big);
  e = _mm256_add_pd(e, _mm256_and_pd(big, splat(1.0)));

  const __m256d s = _mm256_div_pd(_mm256_sub_pd(m, splat(1.0)), _mm256_add_pd(m, splat(1.0)));
  const __m256d s2 = _mm256_mul_pd(s, s);
  // atanh series: log m = 2 s (1 + s^2/3 + s^4/5 + ... + s^22/23)
  __m256d poly = splat(1.0 / 23.0);
  for (int k = 21; k >= 1; k -= 2) poly = _mm256_fmadd_pd(poly, s2, splat(1.0 / k));
  const __m256d logm = _mm256_mul_pd(_mm256_add_pd(s, s), poly);
  return _mm256_fmadd_pd(e, splat(kLn2Hi), _mm256_fmadd_pd(e, splat(kLn2Lo), logm));
}

// log(1 + x) for x > -1 with the usual rounding correction.
inline __m256d log1p_pd(__m256d x) {
  const __m256d u = _mm256_add_pd(splat(1.0), x);
  const __m256d corr = _mm256_div_pd(_mm256_sub_pd(_mm256_sub_pd(u, splat(1.0)), x), u);
  return _mm256_sub_pd(log_pd(u), corr);
}

// exp(x^2) erfc(x) for x >= 0.
inline __m256d erfcx_pd(__m256d x) {
  const auto& c = detail::kErfcxCheb;
  const __m256d t = _mm256_div_pd(splat(2.0), _mm256_add_pd(splat(2.0), x));
  const __m256d ty = _mm256_fmsub_pd(splat(4.0), t, splat(2.0));
  __m256d d = _mm256_setzero_pd();
  __m256d dd = _mm256_setzero_pd();
  for (std::size_t j = c.size() - 1; j > 0; --j) {
    const __m256d tmp = d;
    d = _mm256_add_pd(_mm256_fmsub_pd(ty, d, dd), splat(c[j]));
    dd = tmp;
  }
  const __m256d arg =
      _mm256_sub_pd(_mm256_mul_pd(splat(0.5), _mm256_fmadd_pd(ty, d, splat(c[0]))), dd);
  return _mm256_mul_pd(t, exp_pd(arg));
}

inline __m256d abs_pd(__m256d x) { return _mm256_andnot_pd(splat(-0.0), x); }

// Runs a four-lane body over n elements; the ragged tail goes through a
// padded buffer so every element sees the same arithmetic.
template <std::size_t In, std::size_t Out, typename Body>
void for_each_lane(const std::array<const double*, In>& in,
                   const std::array<double*, Out>& out, std::size_t n,
                   const std::array<double, In>& pad, Body&& body) {
  std::size_t k = 0;
  std::array<__m256d, In> vin;
  std::array<__m256d, Out> vout;
  for (; k + kLanes <= n; k += kLanes) {
    for (std::size_t a = 0; a < In; ++a) vin[a] = _mm256_loadu_pd(in[a] + k);
    body(vin, vout);
    for (std::size_t b = 0; b < Out; ++b) _mm256_storeu_pd(out[b] + k, vout[b]);
  }
  if (k == n) return;
  const std::size_t rem = n - k;
  alignas(32) double buf[kLanes];
  for (std::size_t a = 0; a < In; ++a) {
    for (std::size_t l = 0; l < kLanes; ++l) buf[l] = l < rem ? in[a][k + l] : pad[a];
    vin[a] = _mm256_load_pd(buf);
  }
  body(vin, vout);
  for (std::size_t b = 0; b < Out; ++b) {
    _mm256_store_pd(buf, vout[b]);
    for (std::size_t l = 0; l < rem; ++l) out[b][k + l] = buf[l];
  }
}

// p = Phi(x), q = Phi(-x).
inline void probit_pq(__m256d x, __m256d& p, __m256d& q) {
  const __m256d a = _mm256_mul_pd(x, splat(-kInvSqrt2));
  const __m256d aa = abs_pd(a);
  const __m256d e = _mm256_mul_pd(erfcx_pd(aa), exp_pd(_mm256_mul_pd(_mm256_sub_pd(_mm256_setzero_pd(), aa), aa)));
  const __m256d small = _mm256_mul_pd(splat(0.5), e);
  const __m256d large = _mm256_sub_pd(splat(1.0), small);
  const __m256d a_nonneg = _mm256_cmp_pd(a, _mm256_setzero_pd(), _CMP_GE_OQ);
  p = _mm256_blendv_pd(large, small, a_nonneg);
  q = _mm256_blendv_pd(small, large, a_nonneg);
}

inline void logistic_pq(__m256d x, __m256d& p, __m256d& q) {
  const __m256d e = exp_pd(_mm256_sub_pd(_mm256_setzero_pd(), abs_pd(x)));
  const __m256d inv = _mm256_div_pd(splat(1.0), _mm256_add_pd(splat(1.0), e));
  const __m256d big = inv;                     // 1 / (1 + e)
  const __m256d small = _mm256_mul_pd(e, inv);  // e / (1 + e)
  const __m256d nonneg = _mm256_cmp_pd(x, _mm256_setzero_pd(), _CMP_GE_OQ);
  p = _mm256_blendv_pd(small, big, nonneg);
  q = _mm256_blendv_pd(big, small, nonneg);
}

inline __m256d xlogx_clamped(__m256d p) {
  const __m256d c = _mm256_min_pd(_mm256_max_pd(p, splat(kProbabilityFloor)),
                                  splat(1.0 - kProbabilityFloor));
  return _mm256_mul_pd(c, log_pd(c));
}

}  // namespace

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = splat(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void symv(const double* a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = dot(a + i * n, x, n);
}

void rank2_update(double* a, const double* s, const double* u, double alpha,
                  double beta, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double cs = alpha * s[i] - beta * u[i];
    const double cu = -beta * s[i];
    const __m256d vcs = splat(cs);
    const __m256d vcu = splat(cu);
    double* row = a + i * n;
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
      __m256d r = _mm256_loadu_pd(row + j);
      r = _mm256_fmadd_pd(vcs, _mm256_loadu_pd(s + j), r);
      r = _mm256_fmadd_pd(vcu, _mm256_loadu_pd(u + j), r);
      _mm256_storeu_pd(row + j, r);
    }
    for (; j < n; ++j) row[j] += cs * s[j] + cu * u[j];
  }
}

void probit_terms(const double* z, const double* wp, const double* wn, double* ll,
                  double* dll, std::size_t n) {
  for_each_lane<3, 2>({z, wp, wn}, {ll, dll}, n, {0.0, 0.0, 0.0}, [](const auto& in, auto& out) {
    const __m256d zv = in[0];
    const __m256d a = _mm256_mul_pd(abs_pd(zv), splat(kInvSqrt2));
    const __m256d a2 = _mm256_mul_pd(a, a);
    const __m256d ex = erfcx_pd(a);
    const __m256d g = exp_pd(_mm256_sub_pd(_mm256_setzero_pd(), a2));
    const __m256d tail = _mm256_mul_pd(_mm256_mul_pd(splat(0.5), ex), g);
    const __m256d log_tail = _mm256_sub_pd(log_pd(_mm256_mul_pd(splat(0.5), ex)), a2);
    const __m256d log_head = log1p_pd(_mm256_sub_pd(_mm256_setzero_pd(), tail));
    const __m256d lam_tail = _mm256_div_pd(splat(kSqrt2OverPi), ex);
    const __m256d lam_head = _mm256_div_pd(_mm256_mul_pd(splat(kInvSqrt2Pi), g),
                                           _mm256_sub_pd(splat(1.0), tail));
    const __m256d nonneg = _mm256_cmp_pd(zv, _mm256_setzero_pd(), _CMP_GE_OQ);
    const __m256d log_pos = _mm256_blendv_pd(log_tail, log_head, nonneg);
    const __m256d log_neg = _mm256_blendv_pd(log_head, log_tail, nonneg);
    const __m256d lam_pos = _mm256_blendv_pd(lam_tail, lam_head, nonneg);
    const __m256d lam_neg = _mm256_blendv_pd(lam_head, lam_tail, nonneg);
    out[0] = _mm256_fmadd_pd(in[1], log_pos, _mm256_mul_pd(in[2], log_neg));
    out[1] = _mm256_fmsub_pd(in[1], lam_pos, _mm256_mul_pd(in[2], lam_neg));
  });
}

void logistic_terms(const double* d, const double* wp, const double* wn, double* ll,
                    double* dll, std::size_t n) {
  for_each_lane<3, 2>({d, wp, wn}, {ll, dll}, n, {0.0, 0.0, 0.0}, [](const auto& in, auto& out) {
    const __m256d x = in[0];
    const __m256d e = exp_pd(_mm256_sub_pd(_mm256_setzero_pd(), abs_pd(x)));
    const __m256d l1p = log1p_pd(e);
    const __m256d nonneg = _mm256_cmp_pd(x, _mm256_setzero_pd(), _CMP_GE_OQ);
    const __m256d neg_l1p = _mm256_sub_pd(_mm256_setzero_pd(), l1p);
    const __m256d log_p = _mm256_blendv_pd(_mm256_sub_pd(x, l1p), neg_l1p, nonneg);
    const __m256d log_q = _mm256_blendv_pd(neg_l1p, _mm256_sub_pd(_mm256_sub_pd(_mm256_setzero_pd(), x), l1p), nonneg);
    __m256d p, q;
    logistic_pq(x, p, q);
    out[0] = _mm256_fmadd_pd(in[1], log_p, _mm256_mul_pd(in[2], log_q));
    out[1] = _mm256_fmsub_pd(in[1], q, _mm256_mul_pd(in[2], p));
  });
}

void normal_cdf(const double* z, double* out, std::size_t n) {
  for_each_lane<1, 1>({z}, {out}, n, {0.0}, [](const auto& in, auto& o) {
    __m256d p, q;
    probit_pq(in[0], p, q);
    o[0] = p;
  });
}

void expected_gain(Link link, const double* mean, const double* spread,
                   const double* scale, const double* nodes, const double* weights,
                   std::size_t n_nodes, double* out, std::size_t n) {
  for_each_lane<3, 1>(
      {mean, spread, scale}, {out}, n, {0.0, 0.0, 1.0}, [&](const auto& in, auto& o) {
        __m256d ep = _mm256_setzero_pd();
        __m256d eq = _mm256_setzero_pd();
        __m256d eplogp = _mm256_setzero_pd();
        __m256d eqlogq = _mm256_setzero_pd();
        for (std::size_t m = 0; m < n_nodes; ++m) {
          const __m256d x = _mm256_mul_pd(in[2], _mm256_fmadd_pd(in[1], splat(nodes[m]), in[0]));
          __m256d p, q;
          if (link == Link::Probit) probit_pq(x, p, q); else logistic_pq(x, p, q);
          const __m256d w = splat(weights[m]);
          ep = _mm256_fmadd_pd(w, p, ep);
          eq = _mm256_fmadd_pd(w, q, eq);
          eplogp = _mm256_fmadd_pd(w, xlogx_clamped(p), eplogp);
          eqlogq = _mm256_fmadd_pd(w, xlogx_clamped(q), eqlogq);
        }
        const __m256d u = _mm256_sub_pd(_mm256_add_pd(eplogp, eqlogq),
                                        _mm256_add_pd(xlogx_clamped(ep), xlogx_clamped(eq)));
        o[0] = _mm256_max_pd(u, _mm256_setzero_pd());
      });
}

}  // namespace qboost::kernels::avx2
