#pragma once

#include <functional>
#include <span>
#include <vector>

namespace qboost {

struct BfgsOptions {
  double gradient_tolerance = 1e-8;
  int max_iterations = 2000;
  // Armijo sufficient-increase constant.
  double armijo = 1e-4;
  // Re-seed the approximation from the supplied curvature every k accepted
  // iterations (0: only at the start).
  int curvature_refresh = 10;
};

struct BfgsResult {
  std::vector<double> x;
  double value = 0.0;
  double gradient_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Returns f(x) and writes grad f(x). Non-finite values are treated as a
// rejected step by the line search.
using Objective = std::function<double(std::span<const double> x, std::span<double> grad)>;

// Called after every accepted iteration with the new objective value.
using IterationObserver = std::function<void(int iteration, double value)>;

// Writes an inverse of the curvature of -f at x (row-major n x n) to seed
// the BFGS approximation; returns false to use a scaled identity instead.
using InverseCurvature = std::function<bool(std::span<const double> x, std::span<double> hinv)>;

// Quasi-Newton maximisation with a dense inverse-Hessian BFGS update and
// backtracking line search. Every accepted step strictly increases f.
BfgsResult maximize_bfgs(const Objective& f, std::vector<double> x0, const BfgsOptions& opts,
                         const IterationObserver& observer = {},
                         const InverseCurvature& curvature = {});

}  // namespace qboost
