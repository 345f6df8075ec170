#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "drlogit/core.hpp"
#include "drlogit/efficiency.hpp"
#include "drlogit/link.hpp"
#include "drlogit/types.hpp"

namespace drlogit {

struct GammaMleFit {
  double beta_init = 0.0;       // coefficient on A
  Eigen::VectorXd gamma;        // intercept first, then X coefficients
  int iters = 0;
  double grad_norm = 0.0;
};

namespace detail {

inline double logistic_nll(const Eigen::MatrixXd& z, const Eigen::VectorXd& y,
                           const Eigen::VectorXd& theta) {
  const Eigen::VectorXd eta = z * theta;
  double nll = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double e = eta[i];
    // log(1 + exp(e)) - y e, stable on both tails
    nll += (e > 0.0 ? e + std::log1p(std::exp(-e)) : std::log1p(std::exp(e))) -
           y[i] * e;
  }
  return nll / static_cast<double>(y.size());
}

}  // namespace detail

// Logistic maximum likelihood of Y on (1, A, X) by damped Newton.
// Throws on rank deficiency or quasi-separation.
inline GammaMleFit fit_gamma_mle(const Dataset& data, bool intercept = true) {
  data.validate();
  const Eigen::Index n = data.n(), p = data.p();
  if (p >= n / 5)
    throw std::invalid_argument("fit_gamma_mle: p too large for MLE (p >= n/5)");
  const Eigen::Index q = p + 1 + (intercept ? 1 : 0);
  Eigen::MatrixXd z(n, q);
  Eigen::Index col = 0;
  if (intercept) z.col(col++).setOnes();
  z.col(col++) = data.a;
  z.rightCols(p) = data.x;

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(z);
  if (qr.rank() < q)
    throw std::invalid_argument("fit_gamma_mle: rank-deficient design");

  Eigen::VectorXd theta = Eigen::VectorXd::Zero(q);
  double nll = detail::logistic_nll(z, data.y, theta);
  GammaMleFit fit;
  const int max_iter = 100;
  for (int it = 0; it < max_iter; ++it) {
    fit.iters = it + 1;
    const Eigen::VectorXd eta = z * theta;
    Eigen::VectorXd mu(n), wdiag(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      mu[i] = expit(eta[i]);
      wdiag[i] = std::max(mu[i] * (1.0 - mu[i]), 1e-10);
    }
    const Eigen::VectorXd grad =
        z.transpose() * (mu - data.y) / static_cast<double>(n);
    fit.grad_norm = grad.norm();
    if (fit.grad_norm <= 1e-8) break;
    const Eigen::MatrixXd hess =
        z.transpose() * wdiag.asDiagonal() * z / static_cast<double>(n);
    Eigen::VectorXd step = hess.ldlt().solve(grad);
    double t = 1.0;
    bool improved = false;
    for (int half = 0; half < 30; ++half) {
      const Eigen::VectorXd cand = theta - t * step;
      const double cand_nll = detail::logistic_nll(z, data.y, cand);
      if (cand_nll < nll) {
        theta = cand;
        nll = cand_nll;
        improved = true;
        break;
      }
      t *= 0.5;
    }
    if (!improved) break;
  }
  // Separation check: extreme linear predictors with an unconverged gradient.
  if (fit.grad_norm > 1e-8) {
    const Eigen::VectorXd eta = z * theta;
    if (eta.cwiseAbs().maxCoeff() > 30.0)
      throw std::runtime_error("fit_gamma_mle: quasi-separation");
    throw std::runtime_error("fit_gamma_mle: Newton failed to converge");
  }
  col = 0;
  fit.gamma.resize(q - 1);
  if (intercept) fit.gamma[0] = theta[col++];
  fit.beta_init = theta[col++];
  fit.gamma.tail(p) = theta.tail(p);
  return fit;
}

// Solves sum_{Y=0} (A_i - g(x_i'alpha)) x_i = 0 by damped Newton on the
// convex objective sum G(x_i'alpha) - A_i x_i'alpha. Returns intercept-first
// coefficients.
inline Eigen::VectorXd fit_alpha_glm(const Dataset& data,
                                     const LinkFunction& link,
                                     bool intercept = true) {
  data.validate();
  const Eigen::Index n = data.n(), p = data.p();
  std::vector<Eigen::Index> ctrl;
  for (Eigen::Index i = 0; i < n; ++i)
    if (data.y[i] == 0.0) ctrl.push_back(i);
  const Eigen::Index n0 = static_cast<Eigen::Index>(ctrl.size());
  if (n0 < 5 * p)
    throw std::invalid_argument("fit_alpha_glm: Y=0 subsample below 5p");
  const Eigen::Index q = p + (intercept ? 1 : 0);
  Eigen::MatrixXd z(n0, q);
  Eigen::VectorXd av(n0);
  for (Eigen::Index r = 0; r < n0; ++r) {
    Eigen::Index col = 0;
    if (intercept) z(r, col++) = 1.0;
    z.row(r).tail(p) = data.x.row(ctrl[static_cast<std::size_t>(r)]);
    av[r] = data.a[ctrl[static_cast<std::size_t>(r)]];
  }

  auto objective = [&](const Eigen::VectorXd& alpha) {
    const Eigen::VectorXd eta = z * alpha;
    double obj = 0.0;
    for (Eigen::Index i = 0; i < n0; ++i)
      obj += link.G(eta[i]) - av[i] * eta[i];
    return obj / static_cast<double>(n0);
  };

  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(q);
  double obj = objective(alpha);
  for (int it = 0; it < 100; ++it) {
    const Eigen::VectorXd eta = z * alpha;
    Eigen::VectorXd resid(n0), wdiag(n0);
    for (Eigen::Index i = 0; i < n0; ++i) {
      resid[i] = link.g(eta[i]) - av[i];
      wdiag[i] = std::max(link.dg(eta[i]), 1e-10);
    }
    const Eigen::VectorXd grad = z.transpose() * resid / static_cast<double>(n0);
    if (grad.norm() <= 1e-8) return alpha;
    const Eigen::MatrixXd hess =
        z.transpose() * wdiag.asDiagonal() * z / static_cast<double>(n0);
    Eigen::VectorXd step = hess.ldlt().solve(grad);
    double t = 1.0;
    bool improved = false;
    for (int half = 0; half < 30; ++half) {
      const Eigen::VectorXd cand = alpha - t * step;
      const double cand_obj = objective(cand);
      if (cand_obj < obj) {
        alpha = cand;
        obj = cand_obj;
        improved = true;
        break;
      }
      t *= 0.5;
    }
    if (!improved) break;
  }
  {
    const Eigen::VectorXd eta = z * alpha;
    Eigen::VectorXd resid(n0);
    for (Eigen::Index i = 0; i < n0; ++i) resid[i] = link.g(eta[i]) - av[i];
    if ((z.transpose() * resid / static_cast<double>(n0)).norm() > 1e-8)
      throw std::runtime_error("fit_alpha_glm: Newton failed to converge");
  }
  return alpha;
}

// Residual variance of A - g(x'alpha) over the Y=0 subsample; working
// sigma^2 for the Gaussian phi_opt law.
inline double control_residual_variance(const Dataset& data,
                                        const Eigen::VectorXd& m_hat) {
  double ss = 0.0;
  Eigen::Index n0 = 0;
  for (Eigen::Index i = 0; i < data.n(); ++i)
    if (data.y[i] == 0.0) {
      const double d = data.a[i] - m_hat[i];
      ss += d * d;
      ++n0;
    }
  if (n0 < 2) throw std::runtime_error("control_residual_variance: no controls");
  return ss / static_cast<double>(n0);
}

// Fixed-dimensional doubly robust estimate: logistic MLE for gamma, GLM for
// alpha, then the weighted estimating equation for beta.
inline EstimateReport estimate_lowdim(const Dataset& data,
                                      const LinkFunction& link,
                                      PhiSpec phi = {}, double level = 0.95,
                                      bool intercept = true) {
  const GammaMleFit gfit = fit_gamma_mle(data, intercept);
  const Eigen::VectorXd alpha = fit_alpha_glm(data, link, intercept);
  const Eigen::Index n = data.n(), p = data.p();

  Eigen::VectorXd r_hat(n), m_hat(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double r = intercept ? gfit.gamma[0] : 0.0;
    r += data.x.row(i).dot(gfit.gamma.tail(p));
    r_hat[i] = r;
    double eta = intercept ? alpha[0] : 0.0;
    eta += data.x.row(i).dot(alpha.tail(p));
    m_hat[i] = link.g(eta);
  }

  if (phi.kind == PhiKind::opt) {
    if (phi.quadrature == PhiQuadrature::gauss_hermite)
      phi.sigma2 = control_residual_variance(data, m_hat);
    // Pilot beta from a phi_simp pass.
    PhiSpec simp = phi;
    simp.kind = PhiKind::simp;
    auto pilot_preds = NuisancePredictions::make(
        r_hat, m_hat, build_weights(r_hat, m_hat, simp));
    phi.beta_pilot = solve_beta(data, pilot_preds).beta_hat;
  }

  auto preds = NuisancePredictions::make(r_hat, m_hat,
                                         build_weights(r_hat, m_hat, phi));
  const SolveResult sol = solve_beta(data, preds);
  EstimateReport rep;
  rep.method = Method::lowdim;
  rep.beta_hat = sol.beta_hat;
  rep.converged = sol.converged;
  rep.se = sandwich_se(data, preds, sol.beta_hat);
  rep.level = level;
  fill_ci(rep);
  rep.diagnostics["root_iters"] = sol.iters;
  rep.diagnostics["eq_value"] = sol.eq_value;
  rep.diagnostics["exp_clamps"] = static_cast<double>(sol.exp_clamps);
  rep.diagnostics["r_clip_count"] = static_cast<double>(preds.r_clip_count);
  rep.diagnostics["beta_mle"] = gfit.beta_init;
  return rep;
}

}  // namespace drlogit
