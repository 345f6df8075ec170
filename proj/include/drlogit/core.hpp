#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "drlogit/rng.hpp"
#include "drlogit/types.hpp"

namespace drlogit {

struct ClipCounter {
  long exp_clamps = 0;
};

// exp with saturating argument clamp; never returns inf.
inline double clamped_exp(double u, ClipCounter* counter = nullptr) {
  if (u > kExpArgMax || u < -kExpArgMax) {
    if (counter) ++counter->exp_clamps;
    u = std::clamp(u, -kExpArgMax, kExpArgMax);
  }
  return std::exp(u);
}

// Estimating function h(y,a; beta, r, m) = {y e^{-beta a} - (1-y) e^{r}} (a - m).
inline double eval_h(double y, double a, double beta, double r_val,
                     double m_val, ClipCounter* counter = nullptr) {
  const double term = y * clamped_exp(-beta * a, counter) -
                      (1.0 - y) * clamped_exp(r_val, counter);
  return term * (a - m_val);
}

// d/dbeta of eval_h; the (1-y) e^{r} part is constant in beta.
inline double eval_h_dbeta(double y, double a, double beta, double m_val,
                           ClipCounter* counter = nullptr) {
  return -y * a * clamped_exp(-beta * a, counter) * (a - m_val);
}

struct BracketConfig {
  double b_init = 1.0;
  double expand_factor = 2.0;
  double b_max = 50.0;
  int max_iter = 200;
  double tol_scale = 1e-10;  // tol_eq = tol_scale * (1 + mean |w|(|a|+|m|))
};

struct SolveResult {
  double beta_hat = 0.0;
  bool converged = false;
  int iters = 0;
  double eq_value = std::numeric_limits<double>::quiet_NaN();
  double tol_eq = 0.0;
  long exp_clamps = 0;
};

namespace detail {

inline double weighted_equation(const Dataset& data,
                                const NuisancePredictions& preds, double beta,
                                ClipCounter* counter) {
  const Eigen::Index n = data.n();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    sum += preds.w_hat[i] * eval_h(data.y[i], data.a[i], beta, preds.r_hat[i],
                                   preds.m_hat[i], counter);
  const double value = sum / static_cast<double>(n);
  if (std::isnan(value))
    throw std::runtime_error("solve_beta: NaN in estimating equation");
  return value;
}

inline double weighted_equation_dbeta(const Dataset& data,
                                      const NuisancePredictions& preds,
                                      double beta, ClipCounter* counter) {
  const Eigen::Index n = data.n();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    sum += preds.w_hat[i] *
           eval_h_dbeta(data.y[i], data.a[i], beta, preds.m_hat[i], counter);
  return sum / static_cast<double>(n);
}

}  // namespace detail

// Solves mean_i w_i h(Y_i, A_i; beta, r_i, m_i) = 0 by safeguarded Newton
// inside a sign-changing bracket grown geometrically from [-1, 1]. When no
// sign change exists within [-b_max, b_max], returns the evaluated point
// minimizing |equation| with converged = false.
inline SolveResult solve_beta(const Dataset& data,
                              const NuisancePredictions& preds,
                              const BracketConfig& cfg = {}) {
  if (preds.n() != data.n())
    throw std::invalid_argument("solve_beta: predictions/data size mismatch");
  const Eigen::Index n = data.n();
  ClipCounter counter;
  SolveResult out;

  double scale = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    scale += std::abs(preds.w_hat[i]) *
             (std::abs(data.a[i]) + std::abs(preds.m_hat[i]));
  out.tol_eq = cfg.tol_scale * (1.0 + scale / static_cast<double>(n));

  auto f = [&](double beta) {
    return detail::weighted_equation(data, preds, beta, &counter);
  };

  // Evaluate on the geometric ladder 0, +-1, +-2, ... up to b_max.
  std::vector<double> points{0.0};
  for (double b = cfg.b_init; ; b *= cfg.expand_factor) {
    if (b > cfg.b_max) b = cfg.b_max;
    points.push_back(-b);
    points.push_back(b);
    if (b >= cfg.b_max) break;
  }
  std::sort(points.begin(), points.end());
  std::vector<double> values(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) values[i] = f(points[i]);

  double lo = 0.0, hi = 0.0, flo = 0.0, fhi = 0.0;
  bool bracketed = false;
  // Prefer the sign change closest to 0.
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    if (values[i] == 0.0) {
      out.beta_hat = points[i];
      out.converged = true;
      out.eq_value = 0.0;
      out.exp_clamps = counter.exp_clamps;
      return out;
    }
    if (values[i] * values[i + 1] < 0.0) {
      const double dist =
          std::min(std::abs(points[i]), std::abs(points[i + 1]));
      if (dist < best_dist) {
        best_dist = dist;
        lo = points[i];
        hi = points[i + 1];
        flo = values[i];
        fhi = values[i + 1];
        bracketed = true;
      }
    }
  }

  if (!bracketed) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i)
      if (std::abs(values[i]) < std::abs(values[best])) best = i;
    out.beta_hat = points[best];
    out.eq_value = values[best];
    out.converged = std::abs(values[best]) <= out.tol_eq;
    out.exp_clamps = counter.exp_clamps;
    return out;
  }

  // Safeguarded Newton: fall back to bisection whenever the Newton step
  // leaves the bracket or fails to shrink |f|.
  double x = 0.5 * (lo + hi);
  double fx = f(x);
  for (int it = 0; it < cfg.max_iter; ++it) {
    out.iters = it + 1;
    if (std::abs(fx) <= out.tol_eq) {
      out.converged = true;
      break;
    }
    if (fx * flo < 0.0) {
      hi = x;
      fhi = fx;
    } else {
      lo = x;
      flo = fx;
    }
    double x_next;
    const double dfx = detail::weighted_equation_dbeta(data, preds, x, &counter);
    bool use_newton = std::abs(dfx) > 1e-14;
    if (use_newton) {
      x_next = x - fx / dfx;
      if (!(x_next > lo && x_next < hi)) use_newton = false;
    }
    if (!use_newton) x_next = 0.5 * (lo + hi);
    if (x_next == x) break;  // bracket exhausted at machine precision
    x = x_next;
    fx = f(x);
  }
  out.beta_hat = x;
  out.eq_value = fx;
  if (std::abs(fx) <= out.tol_eq) out.converged = true;
  out.exp_clamps = counter.exp_clamps;
  return out;
}

// Influence-function (sandwich) standard error:
//   se = sqrt(Vhat / n),  Vhat = mean[(w h)^2] / mean[w dh/dbeta]^2.
inline double sandwich_se(const Dataset& data, const NuisancePredictions& preds,
                          double beta_hat) {
  if (preds.n() != data.n())
    throw std::invalid_argument("sandwich_se: predictions/data size mismatch");
  const Eigen::Index n = data.n();
  ClipCounter counter;
  double num = 0.0, den = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double wh =
        preds.w_hat[i] * eval_h(data.y[i], data.a[i], beta_hat, preds.r_hat[i],
                                preds.m_hat[i], &counter);
    num += wh * wh;
    den += preds.w_hat[i] *
           eval_h_dbeta(data.y[i], data.a[i], beta_hat, preds.m_hat[i],
                        &counter);
  }
  num /= static_cast<double>(n);
  den /= static_cast<double>(n);
  if (std::abs(den) < 1e-12)
    throw std::runtime_error("sandwich_se: degenerate score derivative");
  return std::sqrt(num / (den * den) / static_cast<double>(n));
}

// Deterministic balanced fold assignment; labels 1..k, sizes differ by <= 1.
inline FoldPlan make_folds(Eigen::Index n, int k, std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("make_folds: need k >= 2");
  if (static_cast<Eigen::Index>(k) > n)
    throw std::invalid_argument("make_folds: k exceeds n");
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  auto eng = make_engine(derive_seed(seed, 0x666f6c64ULL));  // "fold"
  for (std::size_t i = order.size(); i > 1; --i) {
    const std::size_t j =
        static_cast<std::size_t>(eng() % static_cast<std::uint64_t>(i));
    std::swap(order[i - 1], order[j]);
  }
  FoldPlan plan;
  plan.k = k;
  plan.assignments.assign(static_cast<std::size_t>(n), 0);
  for (std::size_t pos = 0; pos < order.size(); ++pos)
    plan.assignments[static_cast<std::size_t>(order[pos])] =
        static_cast<int>(pos % static_cast<std::size_t>(k)) + 1;
  return plan;
}

}  // namespace drlogit
