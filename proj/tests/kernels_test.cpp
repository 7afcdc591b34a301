#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "qboost/kernels.hpp"
#include "support.hpp"

using namespace qboost;
using namespace qboost::kernels;

namespace {

// Arguments spanning the ordinary range, both tails and exact zero.
std::vector<double> test_arguments(std::mt19937_64& rng, std::size_t n) {
  std::vector<double> z = {0.0, -0.0, 1e-300, -1e-300, 5.0, -5.0, 37.0, -37.0, 60.0, -60.0, 1e3, -1e3};
  std::normal_distribution<double> wide(0.0, 8.0);
  while (z.size() < n) z.push_back(wide(rng));
  return z;
}

void expect_close(double a, double b, double rel, const char* what, std::size_t k) {
  EXPECT_LE(std::abs(a - b), rel * std::max({std::abs(a), std::abs(b), 1e-300})) << what << " @" << k;
}

class KernelEquivalence : public ::testing::Test {
 protected:
  void SetUp() override {
    vec_ = avx2_table();
    if (vec_ == nullptr) GTEST_SKIP() << "AVX2 kernels unavailable on this CPU";
  }
  const KernelTable& ref_ = scalar_table();
  const KernelTable* vec_ = nullptr;
  std::mt19937_64 rng_{20240611};
};

}  // namespace

TEST(KernelDispatch, ActiveIsOneOfTheTables) {
  const KernelTable& a = active();
  EXPECT_TRUE(&a == &scalar_table() || &a == avx2_table());
}

TEST(ScalarKernels, ProbitTermsMatchLongDoubleOracle) {
  std::mt19937_64 rng(1);
  const auto z = test_arguments(rng, 400);
  const auto wp = test_support::uniform_vector(z.size(), 0.0, 5.0, rng);
  const auto wn = test_support::uniform_vector(z.size(), 0.0, 5.0, rng);
  std::vector<double> ll(z.size()), dll(z.size());
  scalar_table().probit_terms(z.data(), wp.data(), wn.data(), ll.data(), dll.data(), z.size());
  for (std::size_t k = 0; k < z.size(); ++k) {
    if (std::abs(z[k]) > 30.0) continue;  // long double erfc underflows beyond this
    const long double zl = z[k];
    const long double pp = 0.5L * std::erfc(-zl / std::sqrt(2.0L));
    const long double pn = 0.5L * std::erfc(zl / std::sqrt(2.0L));
    const long double pdf = std::exp(-0.5L * zl * zl) / std::sqrt(2.0L * M_PI);
    const long double ref_ll = wp[k] * std::log(pp) + wn[k] * std::log(pn);
    const long double ref_dll = wp[k] * pdf / pp - wn[k] * pdf / pn;
    expect_close(ll[k], static_cast<double>(ref_ll), 1e-12, "ll", k);
    EXPECT_NEAR(dll[k], static_cast<double>(ref_dll), 1e-11 * (1.0 + std::abs(static_cast<double>(ref_dll))))
        << k;
  }
}

TEST(ScalarKernels, ProbitTermsFiniteInTails) {
  const std::vector<double> z = {-1e6, -1e3, -60, 60, 1e3, 1e6};
  const std::vector<double> w(z.size(), 1.0);
  std::vector<double> ll(z.size()), dll(z.size());
  scalar_table().probit_terms(z.data(), w.data(), w.data(), ll.data(), dll.data(), z.size());
  for (std::size_t k = 0; k < z.size(); ++k) {
    EXPECT_TRUE(std::isfinite(ll[k]));
    EXPECT_TRUE(std::isfinite(dll[k]));
  }
}

TEST(ScalarKernels, LogisticTermsMatchDirectFormula) {
  std::mt19937_64 rng(2);
  const auto d = test_arguments(rng, 300);
  const auto wp = test_support::uniform_vector(d.size(), 0.0, 5.0, rng);
  const auto wn = test_support::uniform_vector(d.size(), 0.0, 5.0, rng);
  std::vector<double> ll(d.size()), dll(d.size());
  scalar_table().logistic_terms(d.data(), wp.data(), wn.data(), ll.data(), dll.data(), d.size());
  for (std::size_t k = 0; k < d.size(); ++k) {
    if (std::abs(d[k]) > 30.0) continue;
    const long double p = 1.0L / (1.0L + std::exp(-static_cast<long double>(d[k])));
    const long double q = 1.0L / (1.0L + std::exp(static_cast<long double>(d[k])));
    const long double ref = wp[k] * std::log(p) + wn[k] * std::log(q);
    expect_close(ll[k], static_cast<double>(ref), 1e-12, "ll", k);
    EXPECT_NEAR(dll[k], static_cast<double>(wp[k] * (1 - p) - wn[k] * p), 1e-13 * (wp[k] + wn[k]));
  }
}

TEST_F(KernelEquivalence, LinearAlgebra) {
  for (std::size_t n : {1u, 3u, 4u, 7u, 8u, 33u, 120u}) {
    const auto a = test_support::uniform_vector(n * n, -1, 1, rng_);
    const auto x = test_support::uniform_vector(n, -1, 1, rng_);
    const auto u = test_support::uniform_vector(n, -1, 1, rng_);
    expect_close(ref_.dot(x.data(), u.data(), n), vec_->dot(x.data(), u.data(), n), 1e-13, "dot", n);

    auto y1 = u, y2 = u;
    ref_.axpy(0.37, x.data(), y1.data(), n);
    vec_->axpy(0.37, x.data(), y2.data(), n);
    for (std::size_t k = 0; k < n; ++k) EXPECT_NEAR(y1[k], y2[k], 1e-15);

    std::vector<double> r1(n), r2(n);
    ref_.symv(a.data(), x.data(), r1.data(), n);
    vec_->symv(a.data(), x.data(), r2.data(), n);
    for (std::size_t k = 0; k < n; ++k) EXPECT_NEAR(r1[k], r2[k], 1e-13 * n);

    auto m1 = a, m2 = a;
    ref_.rank2_update(m1.data(), x.data(), u.data(), 1.3, 0.7, n);
    vec_->rank2_update(m2.data(), x.data(), u.data(), 1.3, 0.7, n);
    for (std::size_t k = 0; k < n * n; ++k) EXPECT_NEAR(m1[k], m2[k], 1e-14);
  }
}

TEST_F(KernelEquivalence, ProbitAndLogisticTerms) {
  const auto z = test_arguments(rng_, 1001);  // odd length exercises the tail loop
  const auto wp = test_support::uniform_vector(z.size(), 0.0, 5.0, rng_);
  const auto wn = test_support::uniform_vector(z.size(), 0.0, 5.0, rng_);
  std::vector<double> l1(z.size()), d1(z.size()), l2(z.size()), d2(z.size());
  ref_.probit_terms(z.data(), wp.data(), wn.data(), l1.data(), d1.data(), z.size());
  vec_->probit_terms(z.data(), wp.data(), wn.data(), l2.data(), d2.data(), z.size());
  for (std::size_t k = 0; k < z.size(); ++k) {
    expect_close(l1[k], l2[k], 1e-13, "probit ll", k);
    EXPECT_NEAR(d1[k], d2[k], 1e-13 * (1.0 + std::abs(d1[k]))) << k;
  }
  ref_.logistic_terms(z.data(), wp.data(), wn.data(), l1.data(), d1.data(), z.size());
  vec_->logistic_terms(z.data(), wp.data(), wn.data(), l2.data(), d2.data(), z.size());
  for (std::size_t k = 0; k < z.size(); ++k) {
    expect_close(l1[k], l2[k], 1e-13, "logistic ll", k);
    EXPECT_NEAR(d1[k], d2[k], 1e-13 * (1.0 + std::abs(d1[k]))) << k;
  }
}

TEST_F(KernelEquivalence, NormalCdf) {
  const auto z = test_arguments(rng_, 513);
  std::vector<double> a(z.size()), b(z.size());
  ref_.normal_cdf(z.data(), a.data(), z.size());
  vec_->normal_cdf(z.data(), b.data(), z.size());
  for (std::size_t k = 0; k < z.size(); ++k) {
    if (a[k] < 1e-300) {
      EXPECT_LT(b[k], 1e-290) << k;
      continue;
    }
    expect_close(a[k], b[k], 1e-13, "cdf", k);
  }
}

TEST_F(KernelEquivalence, ExpectedGain) {
  const std::vector<double> nodes = {-2.0201828704560856, -0.9585724646138185, 0.0,
                                     0.9585724646138185, 2.0201828704560856};
  const std::vector<double> w = {0.011257411327720689, 0.22207592200561266, 0.5333333333333333,
                                 0.22207592200561266, 0.011257411327720689};
  const std::size_t n = 257;
  const auto mean = test_support::uniform_vector(n, -6, 6, rng_);
  const auto spread = test_support::uniform_vector(n, 0.0, 4, rng_);
  const auto scale = test_support::uniform_vector(n, 0.1, 3, rng_);
  for (Link link : {Link::Probit, Link::Logistic}) {
    std::vector<double> a(n), b(n);
    ref_.expected_gain(link, mean.data(), spread.data(), scale.data(), nodes.data(), w.data(),
                       nodes.size(), a.data(), n);
    vec_->expected_gain(link, mean.data(), spread.data(), scale.data(), nodes.data(), w.data(),
                        nodes.size(), b.data(), n);
    for (std::size_t k = 0; k < n; ++k) EXPECT_NEAR(a[k], b[k], 1e-13) << k;
  }
}
