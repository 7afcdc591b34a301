#pragma once

#include "qboost/kernels.hpp"

namespace qboost::kernels {

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void symv(const double* a, const double* x, double* y, std::size_t n);
void rank2_update(double* a, const double* s, const double* u, double alpha,
                  double beta, std::size_t n);
void probit_terms(const double* z, const double* wp, const double* wn, double* ll,
                  double* dll, std::size_t n);
void logistic_terms(const double* d, const double* wp, const double* wn, double* ll,
                    double* dll, std::size_t n);
void normal_cdf(const double* z, double* out, std::size_t n);
void expected_gain(Link link, const double* mean, const double* spread,
                   const double* scale, const double* nodes, const double* weights,
                   std::size_t n_nodes, double* out, std::size_t n);
}  // namespace scalar

namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void symv(const double* a, const double* x, double* y, std::size_t n);
void rank2_update(double* a, const double* s, const double* u, double alpha,
                  double beta, std::size_t n);
void probit_terms(const double* z, const double* wp, const double* wn, double* ll,
                  double* dll, std::size_t n);
void logistic_terms(const double* d, const double* wp, const double* wn, double* ll,
                    double* dll, std::size_t n);
void normal_cdf(const double* z, double* out, std::size_t n);
void expected_gain(Link link, const double* mean, const double* spread,
                   const double* scale, const double* nodes, const double* weights,
                   std::size_t n_nodes, double* out, std::size_t n);
}  // namespace avx2

}  // namespace qboost::kernels
