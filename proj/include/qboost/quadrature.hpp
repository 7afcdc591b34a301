#pragma once

#include <vector>

namespace qboost {

// N-point Gauss-Hermite rule for the weight function exp(-x^2).
// Nodes ascending and exactly symmetric about 0; weights sum to sqrt(pi).
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t order() const noexcept { return nodes.size(); }
};

inline constexpr int kMaxQuadratureOrder = 128;

// Throws UsageError unless 1 <= order <= 128.
QuadratureRule gauss_hermite_rule(int order);

}  // namespace qboost
