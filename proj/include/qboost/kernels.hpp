#pragma once

// Data-parallel inner loops used by the fitters, the optimizer and the
// information-gain sampler.
//
// Every kernel has a scalar reference implementation built on <cmath>, and an
// AVX2/FMA variant that evaluates the same formulas with vectorised
// polynomial exp/log. The variant is picked once at runtime from the CPU
// feature bits; QBOOST_SIMD=scalar in the environment pins the reference
// path. Results agree with the reference to a few ulp (see kernels_test).

#include <cstddef>

namespace qboost::kernels {

enum class Isa { Scalar, Avx2 };

// Pairwise preference link used by the information-gain kernel.
enum class Link {
  Probit,    // p = Phi(scale * x)
  Logistic,  // p = 1 / (1 + exp(-scale * x))
};

struct KernelTable {
  Isa isa;
  const char* name;

  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // y = A x with A row-major n x n
  void (*symv)(const double* a, const double* x, double* y, std::size_t n);
  // A += alpha * s s' - beta * (u s' + s u'), A row-major n x n
  void (*rank2_update)(double* a, const double* s, const double* u, double alpha,
                       double beta, std::size_t n);

  // Per element: ll = wp*log Phi(z) + wn*log Phi(-z),
  //              dll = d ll / dz = wp*lambda(z) - wn*lambda(-z),
  // lambda(z) = phi(z)/Phi(z). Finite for every finite z.
  void (*probit_terms)(const double* z, const double* wp, const double* wn,
                       double* ll, double* dll, std::size_t n);
  // Same with the logistic link, d is the score difference.
  void (*logistic_terms)(const double* d, const double* wp, const double* wn,
                         double* ll, double* dll, std::size_t n);
  // out = Phi(z)
  void (*normal_cdf)(const double* z, double* out, std::size_t n);

  // Expected information gain of a two-outcome comparison whose score
  // difference is x = mean[k] + spread[k] * node, integrated with the
  // normalised quadrature weights (sum of weights == 1). Per element:
  //   U = E[p log p] + E[q log q] - E[p] log E[p] - E[q] log E[q],
  // p = link(scale[k] * x), q = 1 - p, p and q clamped to [1e-12, 1 - 1e-12]
  // before logs, U clamped to >= 0.
  void (*expected_gain)(Link link, const double* mean, const double* spread,
                        const double* scale, const double* nodes,
                        const double* weights, std::size_t n_nodes, double* out,
                        std::size_t n);
};

const KernelTable& scalar_table();

// nullptr when the AVX2 unit was not compiled in or the CPU lacks AVX2/FMA.
const KernelTable* avx2_table();

// Table selected for this process.
const KernelTable& active();

inline constexpr double kProbabilityFloor = 1e-12;

}  // namespace qboost::kernels
