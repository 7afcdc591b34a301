#include "qboost/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <string>

#include "qboost/error.hpp"
#include "qboost/normal.hpp"

namespace qboost {

namespace {

// Orthonormal Hermite recurrence at x; returns {p_N(x), p_N'(x)}.
std::pair<double, double> orthonormal_hermite(int order, double x) {
  const double p0 = 0.75112554446494248286;  // pi^(-1/4)
  double prev = 0.0;
  double cur = p0;
  for (int k = 1; k <= order; ++k) {
    const double next = x * std::sqrt(2.0 / k) * cur - std::sqrt((k - 1.0) / k) * prev;
    prev = cur;
    cur = next;
  }
  return {cur, std::sqrt(2.0 * order) * prev};
}

}  // namespace

QuadratureRule gauss_hermite_rule(int order) {
  if (order < 1 || order > kMaxQuadratureOrder)
    throw UsageError("quadrature order must be in [1, 128], got " + std::to_string(order));
  const auto n = static_cast<Eigen::Index>(order);

  // Golub-Welsch for starting nodes, then Newton on the recurrence.
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd sub(std::max<Eigen::Index>(n - 1, 0));
  for (Eigen::Index k = 1; k < n; ++k) sub(k - 1) = std::sqrt(static_cast<double>(k) / 2.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("Hermite eigenproblem failed");

  QuadratureRule rule;
  rule.nodes.resize(static_cast<std::size_t>(order));
  rule.weights.resize(static_cast<std::size_t>(order));
  for (int k = 0; k < order; ++k) {
    double x = solver.eigenvalues()(k);
    for (int it = 0; it < 8; ++it) {
      const auto [p, dp] = orthonormal_hermite(order, x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) <= 1e-16 * std::max(1.0, std::abs(x))) break;
    }
    const double dp = orthonormal_hermite(order, x).second;
    rule.nodes[static_cast<std::size_t>(k)] = x;
    rule.weights[static_cast<std::size_t>(k)] = 2.0 / (dp * dp);
  }

  // Symmetrise so that x_k = -x_{N-1-k} holds bit-exactly.
  const std::size_t m = rule.order();
  for (std::size_t k = 0; k < m / 2; ++k) {
    const std::size_t r = m - 1 - k;
    const double x = 0.5 * (rule.nodes[r] - rule.nodes[k]);
    const double w = 0.5 * (rule.weights[r] + rule.weights[k]);
    rule.nodes[k] = -x;
    rule.nodes[r] = x;
    rule.weights[k] = w;
    rule.weights[r] = w;
  }
  if (m % 2 == 1) rule.nodes[m / 2] = 0.0;
  return rule;
}

}  // namespace qboost
