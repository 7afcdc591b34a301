#include "qboost/optimizer.hpp"

#include <algorithm>
#include <cmath>

#include "qboost/error.hpp"
#include "qboost/kernels.hpp"

namespace qboost {

namespace {

void set_identity(std::vector<double>& h, std::size_t n, double scale) {
  std::fill(h.begin(), h.end(), 0.0);
  for (std::size_t i = 0; i < n; ++i) h[i * n + i] = scale;
}

}  // namespace

BfgsResult maximize_bfgs(const Objective& f, std::vector<double> x0, const BfgsOptions& opts,
                         const IterationObserver& observer, const InverseCurvature& curvature) {
  const auto& k = kernels::active();
  const std::size_t n = x0.size();
  BfgsResult res;
  res.x = std::move(x0);

  std::vector<double> grad(n), trial(n), trial_grad(n), dir(n), step(n), ydiff(n), hy(n);
  std::vector<double> hinv(n * n);
  double value = f(res.x, grad);
  if (!std::isfinite(value)) throw NumericalError("objective is not finite at the starting point");

  auto gnorm = [&](const std::vector<double>& g) { return std::sqrt(k.dot(g.data(), g.data(), n)); };
  double gn = gnorm(grad);
  bool fresh = true;  // hinv is a (scaled) identity
  set_identity(hinv, n, 1.0);
  if (curvature && gn > opts.gradient_tolerance && curvature(res.x, hinv)) {
    fresh = false;
  } else {
    set_identity(hinv, n, 1.0);
  }

  int it = 0;
  while (gn > opts.gradient_tolerance && it < opts.max_iterations) {
    k.symv(hinv.data(), grad.data(), dir.data(), n);
    double slope = k.dot(grad.data(), dir.data(), n);
    if (!(slope > 0.0)) {
      set_identity(hinv, n, 1.0);
      fresh = true;
      dir = grad;
      slope = gn * gn;
    }
    double alpha = (it == 0 && fresh) ? std::min(1.0, 1.0 / gn) : 1.0;
    double dir_max = 0.0, x_max = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      dir_max = std::max(dir_max, std::abs(dir[i]));
      x_max = std::max(x_max, std::abs(res.x[i]));
    }
    bool accepted = false;
    double trial_value = value;
    // stop once the step no longer moves x at double precision
    while (alpha * dir_max > 1e-15 * (1.0 + x_max)) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = res.x[i] + alpha * dir[i];
      trial_value = f(trial, trial_grad);
      if (std::isfinite(trial_value) && trial_value >= value + opts.armijo * alpha * slope &&
          trial_value > value) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      if (fresh) break;  // no ascent even along the gradient: numerically stuck
      set_identity(hinv, n, 1.0);
      fresh = true;
      continue;
    }

    for (std::size_t i = 0; i < n; ++i) {
      step[i] = trial[i] - res.x[i];
      ydiff[i] = grad[i] - trial_grad[i];  // gradient difference of -f
    }
    const double sy = k.dot(step.data(), ydiff.data(), n);
    if (sy > 1e-300) {
      if (fresh) {
        const double yy = k.dot(ydiff.data(), ydiff.data(), n);
        set_identity(hinv, n, sy / yy);
      }
      k.symv(hinv.data(), ydiff.data(), hy.data(), n);
      const double yhy = k.dot(ydiff.data(), hy.data(), n);
      const double rho = 1.0 / sy;
      k.rank2_update(hinv.data(), step.data(), hy.data(), (sy + yhy) * rho * rho, rho, n);
      fresh = false;
    }

    res.x.swap(trial);
    grad.swap(trial_grad);
    if (curvature && opts.curvature_refresh > 0 && (it + 1) % opts.curvature_refresh == 0 &&
        curvature(res.x, hinv))
      fresh = false;
    value = trial_value;
    gn = gnorm(grad);
    ++it;
    if (observer) observer(it, value);
  }

  res.value = value;
  res.gradient_norm = gn;
  res.iterations = it;
  res.converged = gn <= opts.gradient_tolerance;
  return res;
}

}  // namespace qboost
