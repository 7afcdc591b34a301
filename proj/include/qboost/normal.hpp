#pragma once

#include <array>

namespace qboost {

inline constexpr double kSqrt2 = 1.41421356237309504880;
inline constexpr double kInvSqrt2 = 0.70710678118654752440;
inline constexpr double kSqrtPi = 1.77245385090551602730;
inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;
inline constexpr double kSqrt2OverPi = 0.79788456080286535588;

// Scaled complementary error function exp(x^2) erfc(x).
double erfcx(double x);

double normal_pdf(double z);
// Standard normal CDF.
double normal_cdf(double z);
// log Phi(z), accurate deep into the lower tail.
double log_normal_cdf(double z);
// phi(z) / Phi(z)
double inverse_mills(double z);
// Phi^-1(p) for p in (0, 1).
double normal_quantile(double p);

namespace detail {

// Chebyshev expansion of log(erfcx(x) / t) in y = 2t - 1, t = 2 / (2 + x),
// valid for x >= 0. Shared by the scalar and vector kernels.
inline constexpr std::array<double, 28> kErfcxCheb = {
    -1.3026537197817094,   6.4196979235649026e-1, 1.9476473204185836e-2,
    -9.561514786808631e-3, -9.46595344482036e-4,  3.66839497852761e-4,
    4.2523324806907e-5,    -2.0278578112534e-5,   -1.624290004647e-6,
    1.303655835580e-6,     1.5626441722e-8,       -8.5238095915e-8,
    6.529054439e-9,        5.059343495e-9,        -9.91364156e-10,
    -2.27365122e-10,       9.6467911e-11,         2.394038e-12,
    -6.886027e-12,         8.94487e-13,           3.13092e-13,
    -1.12708e-13,          3.81e-16,              7.106e-15,
    -1.523e-15,            -9.4e-17,              1.21e-16,
    -2.8e-17};

}  // namespace detail
}  // namespace qboost
