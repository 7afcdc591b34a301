#include "qboost/thurstone.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "qboost/error.hpp"
#include "qboost/hash.hpp"
#include "qboost/kernels.hpp"
#include "qboost/normal.hpp"
#include "qboost/optimizer.hpp"

namespace qboost {

std::string_view model_name(Model m) {
  switch (m) {
    case Model::Case3:
      return "case3";
    case Model::Case5:
      return "case5";
    case Model::BradleyTerry:
      return "bt";
  }
  return "case3";
}

Model parse_model(std::string_view name) {
  if (name == "case3") return Model::Case3;
  if (name == "case5") return Model::Case5;
  if (name == "bt") return Model::BradleyTerry;
  throw UsageError("unknown model '" + std::string(name) + "' (expected case3, case5 or bt)");
}

double conventional_sigma(Model m) {
  switch (m) {
    case Model::Case5:
      return kInvSqrt2;
    case Model::BradleyTerry:
      return std::numbers::pi / std::sqrt(6.0);
    case Model::Case3:
      break;
  }
  return 1.0;
}

namespace {

// Structure-of-arrays view of the pairs that carry mass.
struct PairSet {
  std::vector<std::uint32_t> i, j;
  std::vector<double> wp, wn;
  double mass = 0.0;
  // scratch
  mutable std::vector<double> arg, ll, dll;

  std::size_t size() const noexcept { return i.size(); }
};

PairSet collect_pairs(const PairComparisonMatrix& pcm) {
  PairSet p;
  const std::size_t n = pcm.size();
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) {
      const double wp = pcm.count(a, b);
      const double wn = pcm.count(b, a);
      if (wp == 0.0 && wn == 0.0) continue;
      p.i.push_back(static_cast<std::uint32_t>(a));
      p.j.push_back(static_cast<std::uint32_t>(b));
      p.wp.push_back(wp);
      p.wn.push_back(wn);
      p.mass += wp + wn;
    }
  p.arg.resize(p.size());
  p.ll.resize(p.size());
  p.dll.resize(p.size());
  return p;
}

void check_dimensions(std::size_t n, std::span<const double> s, std::span<const double> sigma) {
  if (s.size() != n || sigma.size() != n) throw UsageError("dimension mismatch");
  for (double v : sigma)
    if (!(v > 0.0) || !std::isfinite(v)) throw UsageError("invalid dispersion");
}

// Case III value and gradient; grad pointers may be null. Returns NaN when
// the dispersions degenerate.
double case3_eval(const PairSet& p, const double* s, const double* sigma, double* gs,
                  double* gsigma, std::size_t n) {
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double si = sigma[p.i[k]], sj = sigma[p.j[k]];
    const double v = si * si + sj * sj;
    if (!(v > 0.0) || !std::isfinite(v)) return std::numeric_limits<double>::quiet_NaN();
    p.arg[k] = (s[p.i[k]] - s[p.j[k]]) / std::sqrt(v);
  }
  kernels::active().probit_terms(p.arg.data(), p.wp.data(), p.wn.data(), p.ll.data(),
                                 p.dll.data(), p.size());
  double total = 0.0;
  for (double v : p.ll) total += v;
  if (gs != nullptr) {
    std::fill(gs, gs + n, 0.0);
    std::fill(gsigma, gsigma + n, 0.0);
    for (std::size_t k = 0; k < p.size(); ++k) {
      const std::size_t a = p.i[k], b = p.j[k];
      const double v = sigma[a] * sigma[a] + sigma[b] * sigma[b];
      const double g = p.dll[k];
      const double ds = g / std::sqrt(v);
      gs[a] += ds;
      gs[b] -= ds;
      const double zv = g * p.arg[k] / v;
      gsigma[a] -= zv * sigma[a];
      gsigma[b] -= zv * sigma[b];
    }
  }
  return total;
}

// Bradley-Terry value and gradient.
double bt_eval(const PairSet& p, const double* s, double* gs, std::size_t n) {
  for (std::size_t k = 0; k < p.size(); ++k) p.arg[k] = s[p.i[k]] - s[p.j[k]];
  kernels::active().logistic_terms(p.arg.data(), p.wp.data(), p.wn.data(), p.ll.data(),
                                   p.dll.data(), p.size());
  double total = 0.0;
  for (double v : p.ll) total += v;
  if (gs != nullptr) {
    std::fill(gs, gs + n, 0.0);
    for (std::size_t k = 0; k < p.size(); ++k) {
      gs[p.i[k]] += p.dll[k];
      gs[p.j[k]] -= p.dll[k];
    }
  }
  return total;
}

// d^2 l / dz^2 and d l / dz of one probit pair term.
std::pair<double, double> probit_derivatives(double z, double wp, double wn) {
  const double lp = inverse_mills(z);
  const double ln = inverse_mills(-z);
  const double g1 = wp * lp - wn * ln;
  const double g2 = -wp * lp * (z + lp) - wn * ln * (-z + ln);
  return {g2, g1};
}

// Coordinates [from, to) whose mean is pinned to zero.
struct Gauge {
  std::size_t from = 0;
  std::size_t to = 0;
};

// The function handed to the optimiser: the raw objective per unit of
// comparison mass, minus half the squared mean of each gauge block. The
// likelihood is flat along those means, so the penalties vanish at the
// pinned optimum and only remove the null directions.
Objective gauged(Objective raw, double mass, std::vector<Gauge> gauges) {
  return [raw = std::move(raw), mass, gauges = std::move(gauges)](std::span<const double> x,
                                                                  std::span<double> grad) {
    double v = raw(x, grad) / mass;
    for (double& g : grad) g /= mass;
    for (const Gauge& gg : gauges) {
      const double m = static_cast<double>(gg.to - gg.from);
      double mean = 0.0;
      for (std::size_t k = gg.from; k < gg.to; ++k) mean += x[k];
      mean /= m;
      v -= 0.5 * mean * mean;
      for (std::size_t k = gg.from; k < gg.to; ++k) grad[k] -= mean / m;
    }
    return v;
  };
}

// Inverse curvature of the gauged objective from the raw negated Hessian;
// declines unless it is positive definite.
InverseCurvature gauged_curvature(std::function<Eigen::MatrixXd(std::span<const double>)> raw,
                                  double mass, std::vector<Gauge> gauges) {
  return [raw = std::move(raw), mass, gauges = std::move(gauges)](std::span<const double> x,
                                                                  std::span<double> out) {
    Eigen::MatrixXd h = raw(x) / mass;
    for (const Gauge& gg : gauges) {
      const auto m = static_cast<Eigen::Index>(gg.to - gg.from);
      const auto f = static_cast<Eigen::Index>(gg.from);
      h.block(f, f, m, m).array() += 1.0 / static_cast<double>(m * m);
    }
    if (!h.allFinite()) return false;
    const Eigen::LLT<Eigen::MatrixXd> llt(h);
    if (llt.info() != Eigen::Success) return false;
    const Eigen::Index d = h.rows();
    const Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(d, d));
    if (!inv.allFinite()) return false;
    for (Eigen::Index r = 0; r < d; ++r)
      for (Eigen::Index q = 0; q < d; ++q)
        out[static_cast<std::size_t>(r * d + q)] = 0.5 * (inv(r, q) + inv(q, r));
    return true;
  };
}

// Curvature of the negated Case III objective in (s, log sigma).
Eigen::MatrixXd case3_curvature(const PairSet& p, std::span<const double> x, std::size_t n,
                                double prior) {
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(2 * n),
                                            static_cast<Eigen::Index>(2 * n));
  for (std::size_t k = 0; k < p.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(p.i[k]), j = static_cast<Eigen::Index>(p.j[k]);
    const Eigen::Index ti = i + static_cast<Eigen::Index>(n), tj = j + static_cast<Eigen::Index>(n);
    const double vi = std::exp(2.0 * x[n + p.i[k]]), vj = std::exp(2.0 * x[n + p.j[k]]);
    const double v2 = vi + vj, v = std::sqrt(v2);
    const double wi = vi / v2, wj = vj / v2;
    const double z = (x[p.i[k]] - x[p.j[k]]) / v;
    const auto [b, a] = probit_derivatives(z, p.wp[k], p.wn[k]);
    // gradient of z over (s_i, s_j, t_i, t_j)
    const Eigen::Index idx[4] = {i, j, ti, tj};
    const double dz[4] = {1.0 / v, -1.0 / v, -z * wi, -z * wj};
    double d2z[4][4] = {};
    d2z[0][2] = d2z[2][0] = -wi / v;
    d2z[0][3] = d2z[3][0] = -wj / v;
    d2z[1][2] = d2z[2][1] = wi / v;
    d2z[1][3] = d2z[3][1] = wj / v;
    d2z[2][2] = 3.0 * z * wi * wi - 2.0 * z * wi;
    d2z[3][3] = 3.0 * z * wj * wj - 2.0 * z * wj;
    d2z[2][3] = d2z[3][2] = 3.0 * z * wi * wj;
    for (int r = 0; r < 4; ++r)
      for (int q = 0; q < 4; ++q) h(idx[r], idx[q]) -= b * dz[r] * dz[q] + a * d2z[r][q];
  }
  if (prior > 0.0) {
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t q = 0; q < n; ++q)
        h(static_cast<Eigen::Index>(n + r), static_cast<Eigen::Index>(n + q)) +=
            prior * ((r == q ? 1.0 : 0.0) - inv_n);
  }
  return h;
}

// Curvature of a negated score-only objective: sum_k c_k (e_i - e_j)(e_i - e_j)'.
template <class PairCurvature>
Eigen::MatrixXd score_curvature(const PairSet& p, std::size_t n, PairCurvature c_of) {
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                            static_cast<Eigen::Index>(n));
  for (std::size_t k = 0; k < p.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(p.i[k]), j = static_cast<Eigen::Index>(p.j[k]);
    const double c = c_of(k);
    h(i, i) += c;
    h(j, j) += c;
    h(i, j) -= c;
    h(j, i) -= c;
  }
  return h;
}

void validate_for_fit(const PairComparisonMatrix& pcm) {
  if (pcm.size() < 2) throw DataError("at least two stimuli are required");
  const auto groups = comparison_components(pcm);
  if (groups.size() > 1) {
    std::string msg = "disconnected design:";
    for (std::size_t g = 0; g < groups.size(); ++g) {
      msg += g == 0 ? " {" : " | {";
      for (std::size_t k = 0; k < groups[g].size(); ++k) {
        if (k > 0) msg += ",";
        msg += pcm.stimulus_ids()[groups[g][k]];
      }
      msg += "}";
    }
    throw DataError(msg);
  }
}

// Probit-of-win-rate starting scores, scaled to the model's link.
std::vector<double> heuristic_scores(const PairComparisonMatrix& pcm, double scale) {
  const std::size_t n = pcm.size();
  std::vector<double> s(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double wins = 0.0, total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      wins += pcm.count(i, j);
      total += pcm.pair_total(i, j);
    }
    const double rate = total > 0.0 ? std::clamp(wins / total, 0.01, 0.99) : 0.5;
    s[i] = scale * normal_quantile(rate);
  }
  return s;
}

double link_scale(Model m) {
  switch (m) {
    case Model::Case3:
      return kSqrt2;
    case Model::Case5:
      return 1.0;
    case Model::BradleyTerry:
      return 1.7;
  }
  return 1.0;
}

void center(std::vector<double>& s) {
  double mean = 0.0;
  for (double v : s) mean += v;
  mean /= static_cast<double>(s.size());
  for (double& v : s) v -= mean;
}

bool usable_warm_start(const QualityEstimate* w, Model m, const PairComparisonMatrix& pcm) {
  return w != nullptr && w->model == m && w->s_hat.size() == pcm.size() &&
         w->sigma_hat.size() == pcm.size() && w->stimulus_ids == pcm.stimulus_ids();
}

// Runs the restarts and keeps the best (lowest index on ties).
BfgsResult run_restarts(const Objective& objective, const std::vector<double>& base,
                        const std::vector<double>* warm, std::size_t score_dims,
                        double score_jitter, double mass, const FitOptions& opts,
                        const InverseCurvature& curvature) {
  if (opts.restarts < 1) throw UsageError("restarts must be >= 1");
  if (opts.max_iterations < 1) throw UsageError("max_iterations must be >= 1");
  if (!(opts.gradient_tolerance > 0.0)) throw UsageError("gradient_tolerance must be positive");
  if (!(opts.dispersion_prior >= 0.0)) throw UsageError("dispersion_prior must be non-negative");
  BfgsOptions bo;
  bo.gradient_tolerance = opts.gradient_tolerance;
  bo.max_iterations = opts.max_iterations;
  BfgsResult best;
  bool have_best = false;
  for (int r = 0; r < opts.restarts; ++r) {
    std::vector<double> x0;
    if (r == 0) {
      x0 = warm != nullptr ? *warm : base;
    } else {
      std::mt19937_64 rng(mix_seed(opts.seed, static_cast<std::uint64_t>(r)));
      std::normal_distribution<double> noise(0.0, 1.0);
      x0 = base;
      for (std::size_t k = 0; k < x0.size(); ++k)
        x0[k] += noise(rng) * (k < score_dims ? score_jitter : 0.3);
    }
    IterationObserver obs;
    if (opts.on_iteration) obs = [&, r](int it, double v) { opts.on_iteration(r, it, v * mass); };
    BfgsResult res = maximize_bfgs(objective, std::move(x0), bo, obs, curvature);
    // values within rounding of each other tie; a converged run wins a tie
    const double tol = 1e-12 * std::max(1.0, std::abs(best.value));
    const bool better = !have_best || res.value > best.value + tol ||
                        (res.value >= best.value - tol && res.converged && !best.converged);
    if (better) {
      best = std::move(res);
      have_best = true;
    }
  }
  return best;
}

}  // namespace

double win_probability(double s_i, double s_j, double sigma_i, double sigma_j) {
  if (!(sigma_i > 0.0) || !(sigma_j > 0.0)) throw UsageError("invalid dispersion");
  return normal_cdf((s_i - s_j) / std::sqrt(sigma_i * sigma_i + sigma_j * sigma_j));
}

double log_likelihood(std::span<const double> s, std::span<const double> sigma,
                      const PairComparisonMatrix& pcm) {
  check_dimensions(pcm.size(), s, sigma);
  const PairSet p = collect_pairs(pcm);
  return case3_eval(p, s.data(), sigma.data(), nullptr, nullptr, pcm.size());
}

LikelihoodGradient log_likelihood_gradient(std::span<const double> s,
                                           std::span<const double> sigma,
                                           const PairComparisonMatrix& pcm) {
  check_dimensions(pcm.size(), s, sigma);
  const PairSet p = collect_pairs(pcm);
  LikelihoodGradient g{std::vector<double>(pcm.size()), std::vector<double>(pcm.size())};
  case3_eval(p, s.data(), sigma.data(), g.d_s.data(), g.d_sigma.data(), pcm.size());
  return g;
}

double bt_log_likelihood(std::span<const double> s, const PairComparisonMatrix& pcm) {
  if (s.size() != pcm.size()) throw UsageError("dimension mismatch");
  return bt_eval(collect_pairs(pcm), s.data(), nullptr, pcm.size());
}

std::vector<double> bt_log_likelihood_gradient(std::span<const double> s,
                                               const PairComparisonMatrix& pcm) {
  if (s.size() != pcm.size()) throw UsageError("dimension mismatch");
  std::vector<double> g(pcm.size());
  bt_eval(collect_pairs(pcm), s.data(), g.data(), pcm.size());
  return g;
}

std::vector<double> score_hessian(std::span<const double> s, std::span<const double> sigma,
                                  const PairComparisonMatrix& pcm) {
  check_dimensions(pcm.size(), s, sigma);
  const std::size_t n = pcm.size();
  std::vector<double> h(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double wp = pcm.count(i, j), wn = pcm.count(j, i);
      if (wp == 0.0 && wn == 0.0) continue;
      const double v = sigma[i] * sigma[i] + sigma[j] * sigma[j];
      const double z = (s[i] - s[j]) / std::sqrt(v);
      const double c = probit_derivatives(z, wp, wn).first / v;
      h[i * n + i] += c;
      h[j * n + j] += c;
      h[i * n + j] -= c;
      h[j * n + i] -= c;
    }
  return h;
}

std::vector<double> sigma_hessian(std::span<const double> s, std::span<const double> sigma,
                                  const PairComparisonMatrix& pcm) {
  check_dimensions(pcm.size(), s, sigma);
  const std::size_t n = pcm.size();
  std::vector<double> h(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double wp = pcm.count(i, j), wn = pcm.count(j, i);
      if (wp == 0.0 && wn == 0.0) continue;
      const double v = sigma[i] * sigma[i] + sigma[j] * sigma[j];
      const double z = (s[i] - s[j]) / std::sqrt(v);
      const auto [g2, g1] = probit_derivatives(z, wp, wn);
      const double zi = -z * sigma[i] / v;
      const double zj = -z * sigma[j] / v;
      const double zii = (z / v) * (3.0 * sigma[i] * sigma[i] / v - 1.0);
      const double zjj = (z / v) * (3.0 * sigma[j] * sigma[j] / v - 1.0);
      const double zij = 3.0 * z * sigma[i] * sigma[j] / (v * v);
      h[i * n + i] += g2 * zi * zi + g1 * zii;
      h[j * n + j] += g2 * zj * zj + g1 * zjj;
      const double off = g2 * zi * zj + g1 * zij;
      h[i * n + j] += off;
      h[j * n + i] += off;
    }
  return h;
}

std::vector<double> bt_score_hessian(std::span<const double> s, const PairComparisonMatrix& pcm) {
  if (s.size() != pcm.size()) throw UsageError("dimension mismatch");
  const std::size_t n = pcm.size();
  std::vector<double> h(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double total = pcm.pair_total(i, j);
      if (total == 0.0) continue;
      const double p = 1.0 / (1.0 + std::exp(-(s[i] - s[j])));
      const double c = -total * p * (1.0 - p);
      h[i * n + i] += c;
      h[j * n + j] += c;
      h[i * n + j] -= c;
      h[j * n + i] -= c;
    }
  return h;
}

std::vector<double> covariance_of_estimates(std::span<const double> hessian, std::size_t n) {
  if (hessian.size() != n * n || n == 0) throw UsageError("hessian must be n x n");
  Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n + 1),
                                              static_cast<Eigen::Index>(n + 1));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j)
      aug(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = -hessian[i * n + j];
    aug(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(n)) = 1.0;
    aug(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(i)) = 1.0;
  }
  if (!aug.allFinite()) throw NumericalError("singular information matrix");
  Eigen::FullPivLU<Eigen::MatrixXd> lu(aug);
  if (!lu.isInvertible()) throw NumericalError("singular information matrix");
  const Eigen::MatrixXd inv = lu.inverse();
  std::vector<double> out(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const auto a = static_cast<Eigen::Index>(i), b = static_cast<Eigen::Index>(j);
      out[i * n + j] = 0.5 * (inv(a, b) + inv(b, a));
    }
  return out;
}

QualityEstimate fit_thurstone_case3(const PairComparisonMatrix& pcm, const FitOptions& opts,
                                    const QualityEstimate* warm_start) {
  const PairComparisonMatrix reg = with_pseudocount(pcm, opts.pseudocount);
  validate_for_fit(reg);
  const std::size_t n = pcm.size();
  const PairSet pairs = collect_pairs(reg);

  std::vector<double> sigma(n), gsig(n);
  Objective raw = [&](std::span<const double> x, std::span<double> grad) {
    for (std::size_t i = 0; i < n; ++i) sigma[i] = std::exp(x[n + i]);
    double v = case3_eval(pairs, x.data(), sigma.data(), grad.data(), gsig.data(), n);
    for (std::size_t i = 0; i < n; ++i) grad[n + i] = gsig[i] * sigma[i];
    if (opts.dispersion_prior > 0.0) {
      double mean_t = 0.0;
      for (std::size_t i = 0; i < n; ++i) mean_t += x[n + i];
      mean_t /= static_cast<double>(n);
      for (std::size_t i = 0; i < n; ++i) {
        const double d = x[n + i] - mean_t;
        v -= 0.5 * opts.dispersion_prior * d * d;
        grad[n + i] -= opts.dispersion_prior * d;
      }
    }
    return v;
  };

  std::vector<double> base = heuristic_scores(reg, link_scale(Model::Case3));
  base.resize(2 * n, 0.0);
  std::vector<double> warm;
  if (usable_warm_start(warm_start, Model::Case3, pcm)) {
    warm = warm_start->s_hat;
    for (double sg : warm_start->sigma_hat) warm.push_back(std::log(sg));
  }
  const std::vector<Gauge> gauges{{0, n}, {n, 2 * n}};
  const Objective objective = gauged(std::move(raw), pairs.mass, gauges);
  const InverseCurvature curvature = gauged_curvature(
      [&](std::span<const double> x) {
        return case3_curvature(pairs, x, n, opts.dispersion_prior);
      },
      pairs.mass, gauges);
  const BfgsResult best = run_restarts(objective, base, warm.empty() ? nullptr : &warm, n,
                                       0.5 * link_scale(Model::Case3), pairs.mass, opts, curvature);

  QualityEstimate est;
  est.model = Model::Case3;
  est.stimulus_ids = pcm.stimulus_ids();
  est.s_hat.assign(best.x.begin(), best.x.begin() + static_cast<std::ptrdiff_t>(n));
  est.sigma_hat.resize(n);
  for (std::size_t i = 0; i < n; ++i) est.sigma_hat[i] = std::exp(best.x[n + i]);
  center(est.s_hat);
  double ms = 0.0;
  for (double v : est.sigma_hat) ms += v * v;
  const double c = std::sqrt(ms / static_cast<double>(n));
  for (double& v : est.s_hat) v /= c;
  for (double& v : est.sigma_hat) v /= c;

  est.log_likelihood = case3_eval(pairs, est.s_hat.data(), est.sigma_hat.data(), nullptr, nullptr, n);
  est.converged = best.converged;
  est.iterations = best.iterations;
  est.covariance = covariance_of_estimates(score_hessian(est.s_hat, est.sigma_hat, reg), n);
  return est;
}

QualityEstimate fit_thurstone_case5(const PairComparisonMatrix& pcm, const FitOptions& opts,
                                    const QualityEstimate* warm_start) {
  const PairComparisonMatrix reg = with_pseudocount(pcm, opts.pseudocount);
  validate_for_fit(reg);
  const std::size_t n = pcm.size();
  const PairSet pairs = collect_pairs(reg);
  const std::vector<double> sigma(n, kInvSqrt2);
  std::vector<double> gsig(n);

  const std::vector<Gauge> gauges{{0, n}};
  const Objective objective = gauged(
      [&](std::span<const double> x, std::span<double> grad) {
        return case3_eval(pairs, x.data(), sigma.data(), grad.data(), gsig.data(), n);
      },
      pairs.mass, gauges);
  const std::vector<double> base = heuristic_scores(reg, link_scale(Model::Case5));
  const std::vector<double>* warm =
      usable_warm_start(warm_start, Model::Case5, pcm) ? &warm_start->s_hat : nullptr;
  const InverseCurvature curvature = gauged_curvature(
      [&](std::span<const double> x) {
        return score_curvature(pairs, n, [&](std::size_t k) {
          const double z = x[pairs.i[k]] - x[pairs.j[k]];
          return -probit_derivatives(z, pairs.wp[k], pairs.wn[k]).first;
        });
      },
      pairs.mass, gauges);
  const BfgsResult best = run_restarts(objective, base, warm, n, 0.5, pairs.mass, opts, curvature);

  QualityEstimate est;
  est.model = Model::Case5;
  est.stimulus_ids = pcm.stimulus_ids();
  est.s_hat = best.x;
  center(est.s_hat);
  est.sigma_hat = sigma;
  est.log_likelihood = case3_eval(pairs, est.s_hat.data(), sigma.data(), nullptr, nullptr, n);
  est.converged = best.converged;
  est.iterations = best.iterations;
  est.covariance = covariance_of_estimates(score_hessian(est.s_hat, sigma, reg), n);
  return est;
}

QualityEstimate fit_bradley_terry(const PairComparisonMatrix& pcm, const FitOptions& opts,
                                  const QualityEstimate* warm_start) {
  const PairComparisonMatrix reg = with_pseudocount(pcm, opts.pseudocount);
  validate_for_fit(reg);
  const std::size_t n = pcm.size();
  const PairSet pairs = collect_pairs(reg);

  const std::vector<Gauge> gauges{{0, n}};
  const Objective objective = gauged(
      [&](std::span<const double> x, std::span<double> grad) {
        return bt_eval(pairs, x.data(), grad.data(), n);
      },
      pairs.mass, gauges);
  const std::vector<double> base = heuristic_scores(reg, link_scale(Model::BradleyTerry));
  const std::vector<double>* warm =
      usable_warm_start(warm_start, Model::BradleyTerry, pcm) ? &warm_start->s_hat : nullptr;
  const InverseCurvature curvature = gauged_curvature(
      [&](std::span<const double> x) {
        return score_curvature(pairs, n, [&](std::size_t k) {
          const double pr = 1.0 / (1.0 + std::exp(-(x[pairs.i[k]] - x[pairs.j[k]])));
          return (pairs.wp[k] + pairs.wn[k]) * pr * (1.0 - pr);
        });
      },
      pairs.mass, gauges);
  const BfgsResult best = run_restarts(objective, base, warm, n, 0.85, pairs.mass, opts, curvature);

  QualityEstimate est;
  est.model = Model::BradleyTerry;
  est.stimulus_ids = pcm.stimulus_ids();
  est.s_hat = best.x;
  center(est.s_hat);
  est.sigma_hat.assign(n, conventional_sigma(Model::BradleyTerry));
  est.log_likelihood = bt_eval(pairs, est.s_hat.data(), nullptr, n);
  est.converged = best.converged;
  est.iterations = best.iterations;
  est.covariance = covariance_of_estimates(bt_score_hessian(est.s_hat, reg), n);
  return est;
}

QualityEstimate fit_model(Model model, const PairComparisonMatrix& pcm, const FitOptions& opts,
                          const QualityEstimate* warm_start) {
  switch (model) {
    case Model::Case3:
      return fit_thurstone_case3(pcm, opts, warm_start);
    case Model::Case5:
      return fit_thurstone_case5(pcm, opts, warm_start);
    case Model::BradleyTerry:
      return fit_bradley_terry(pcm, opts, warm_start);
  }
  throw UsageError("unknown model");
}

std::vector<double> sigma_covariance(const PairComparisonMatrix& pcm, const QualityEstimate& est,
                                     const FitOptions& opts) {
  if (est.model != Model::Case3) throw UsageError("sigma covariance needs a case3 estimate");
  const PairComparisonMatrix reg = with_pseudocount(pcm, opts.pseudocount);
  const std::size_t n = pcm.size();
  std::vector<double> h = sigma_hessian(est.s_hat, est.sigma_hat, reg);
  // sigma_hat maximises the penalised objective, so its curvature includes
  // the dispersion penalty (w/2) sum (t_i - mean t)^2, t = log sigma
  const double w = opts.dispersion_prior;
  if (w > 0.0) {
    double mean_t = 0.0;
    for (double sg : est.sigma_hat) mean_t += std::log(sg);
    mean_t /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const double si = est.sigma_hat[i], sj = est.sigma_hat[j];
        double q = w * ((i == j ? 1.0 : 0.0) - 1.0 / static_cast<double>(n)) / (si * sj);
        if (i == j) q -= w * (std::log(si) - mean_t) / (si * si);
        h[i * n + j] -= q;
      }
  }
  return covariance_of_estimates(h, n);
}

}  // namespace qboost
