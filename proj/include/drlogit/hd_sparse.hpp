#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include "drlogit/core.hpp"
#include "drlogit/efficiency.hpp"
#include "drlogit/link.hpp"
#include "drlogit/lowdim.hpp"
#include "drlogit/prox.hpp"
#include "drlogit/types.hpp"

namespace drlogit {

// p (or p+1 with an intercept) coefficient vector with sparse support.
// When fitted with an intercept, index 0 is the intercept on the original
// covariate scale.
struct SparseCoef {
  Eigen::Index dim = 0;
  std::map<Eigen::Index, double> entries;

  static SparseCoef from_dense(const Eigen::VectorXd& v, double tol = 0.0) {
    SparseCoef out;
    out.dim = v.size();
    for (Eigen::Index j = 0; j < v.size(); ++j)
      if (std::abs(v[j]) > tol) out.entries[j] = v[j];
    return out;
  }

  Eigen::VectorXd to_dense() const {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(dim);
    for (const auto& [j, val] : entries) v[j] = val;
    return v;
  }

  Eigen::Index s_hat() const {
    return static_cast<Eigen::Index>(entries.size());
  }

  double operator[](Eigen::Index j) const {
    const auto it = entries.find(j);
    return it == entries.end() ? 0.0 : it->second;
  }
};

struct HdConfig {
  double lambda_alpha = 0.0;   // <= 0 means auto
  double lambda_gamma = 0.0;
  double lambda_init = 0.0;
  double auto_constant = 1.0;
  int max_outer = 50;
  double tol_outer = 1e-7;
  int max_prox_iter = 5000;
  double tol_prox = 1e-9;
  bool intercept = true;

  double resolve(double lambda, Eigen::Index n, Eigen::Index p) const {
    if (lambda > 0.0) return lambda;
    return auto_constant * std::sqrt(std::log(std::max<Eigen::Index>(p, 2)) /
                                     static_cast<double>(n));
  }
};

namespace hd_detail {

// Internal design: [1 | standardized X] when intercept is on, raw X otherwise.
// Coefficients are mapped back to the original covariate scale on output.
struct HdDesign {
  Eigen::MatrixXd z;
  Eigen::VectorXd mean, scale;
  bool intercept = true;

  static HdDesign build(const Eigen::MatrixXd& x, bool intercept) {
    HdDesign d;
    d.intercept = intercept;
    const Eigen::Index n = x.rows(), p = x.cols();
    if (!intercept) {
      d.z = x;
      d.mean = Eigen::VectorXd::Zero(p);
      d.scale = Eigen::VectorXd::Ones(p);
      return d;
    }
    d.mean = x.colwise().mean();
    d.scale.resize(p);
    for (Eigen::Index j = 0; j < p; ++j) {
      const double var =
          (x.col(j).array() - d.mean[j]).square().sum() / static_cast<double>(n);
      d.scale[j] = var > 1e-12 ? std::sqrt(var) : 1.0;
    }
    d.z.resize(n, p + 1);
    d.z.col(0).setOnes();
    for (Eigen::Index j = 0; j < p; ++j)
      d.z.col(j + 1) = (x.col(j).array() - d.mean[j]) / d.scale[j];
    return d;
  }

  Eigen::Index q() const { return z.cols(); }

  Eigen::VectorXd penalty_weights() const {
    Eigen::VectorXd w = Eigen::VectorXd::Ones(q());
    if (intercept) w[0] = 0.0;
    return w;
  }

  // Standardized-scale coefficients -> original scale (intercept first).
  Eigen::VectorXd to_original(const Eigen::VectorXd& c) const {
    if (!intercept) return c;
    const Eigen::Index p = q() - 1;
    Eigen::VectorXd out(p + 1);
    double icpt = c[0];
    for (Eigen::Index j = 0; j < p; ++j) {
      out[j + 1] = c[j + 1] / scale[j];
      icpt -= c[j + 1] * mean[j] / scale[j];
    }
    out[0] = icpt;
    return out;
  }

  Eigen::VectorXd to_std(const Eigen::VectorXd& orig) const {
    if (!intercept) return orig;
    const Eigen::Index p = q() - 1;
    Eigen::VectorXd c(p + 1);
    double icpt = orig[0];
    for (Eigen::Index j = 0; j < p; ++j) {
      c[j + 1] = orig[j + 1] * scale[j];
      icpt += orig[j + 1] * mean[j];
    }
    c[0] = icpt;
    return c;
  }
};

// Weighted logistic deviance for the initial l1 fit; design passed in full
// (may include the unpenalized exposure column).
struct LogisticLoss {
  const Eigen::MatrixXd& z;
  const Eigen::VectorXd& y;

  double value(const Eigen::VectorXd& theta) const {
    const Eigen::VectorXd eta = z * theta;
    double nll = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const double e = eta[i];
      nll += (e > 0.0 ? e + std::log1p(std::exp(-e))
                      : std::log1p(std::exp(e))) -
             y[i] * e;
    }
    return nll / static_cast<double>(y.size());
  }

  void gradient(const Eigen::VectorXd& theta, Eigen::VectorXd& grad) const {
    const Eigen::VectorXd eta = z * theta;
    Eigen::VectorXd resid(y.size());
    for (Eigen::Index i = 0; i < y.size(); ++i)
      resid[i] = expit(eta[i]) - y[i];
    grad.noalias() = z.transpose() * resid / static_cast<double>(y.size());
  }
};

// Bregman loss for the alpha moment equation:
//   n^-1 sum v_i [G(z_i'a) - A_i z_i'a],   v_i = w_i (1-Y_i) e^{r_tilde_i}.
struct AlphaLoss {
  const Eigen::MatrixXd& z;
  const Eigen::VectorXd& a;
  const Eigen::VectorXd& v;
  const LinkFunction& link;

  double value(const Eigen::VectorXd& alpha) const {
    const Eigen::VectorXd eta = z * alpha;
    double obj = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i)
      obj += v[i] * (link.G(eta[i]) - a[i] * eta[i]);
    return obj / static_cast<double>(a.size());
  }

  void gradient(const Eigen::VectorXd& alpha, Eigen::VectorXd& grad) const {
    const Eigen::VectorXd eta = z * alpha;
    Eigen::VectorXd resid(a.size());
    for (Eigen::Index i = 0; i < a.size(); ++i)
      resid[i] = v[i] * (link.g(eta[i]) - a[i]);
    grad.noalias() = z.transpose() * resid / static_cast<double>(a.size());
  }
};

// Gamma step of the joint problem at fixed beta:
//   n^-1 sum u_i [(1-Y_i) e^{z_i'g} - Y_i e^{-beta A_i} z_i'g],
//   u_i = w_i g'(x_i'alpha_hat).
struct GammaLoss {
  const Eigen::MatrixXd& z;
  const Eigen::VectorXd& y;
  const Eigen::VectorXd& u;       // u_i = w_i g'(eta_alpha_i)
  const Eigen::VectorXd& case_w;  // y_i e^{-beta a_i}

  double value(const Eigen::VectorXd& gamma) const {
    const Eigen::VectorXd eta = z * gamma;
    double obj = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const double e = std::exp(std::min(eta[i], kExpArgMax));
      obj += u[i] * ((1.0 - y[i]) * e - case_w[i] * eta[i]);
    }
    return obj / static_cast<double>(y.size());
  }

  void gradient(const Eigen::VectorXd& gamma, Eigen::VectorXd& grad) const {
    const Eigen::VectorXd eta = z * gamma;
    Eigen::VectorXd resid(y.size());
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const double e = std::exp(std::min(eta[i], kExpArgMax));
      resid[i] = u[i] * ((1.0 - y[i]) * e - case_w[i]);
    }
    grad.noalias() = z.transpose() * resid / static_cast<double>(y.size());
  }
};

inline Eigen::VectorXd linear_predictor(const Eigen::MatrixXd& x,
                                        const SparseCoef& coef,
                                        bool intercept) {
  const Eigen::Index n = x.rows();
  Eigen::VectorXd eta =
      Eigen::VectorXd::Constant(n, intercept ? coef[0] : 0.0);
  for (const auto& [j, val] : coef.entries) {
    if (intercept && j == 0) continue;
    eta += val * x.col(intercept ? j - 1 : j);
  }
  return eta;
}

}  // namespace hd_detail

struct HdGammaInit {
  double beta_tilde = 0.0;
  SparseCoef gamma_tilde;
  int iters = 0;
};

// Initial l1-penalized logistic regression of Y on (A, X); A and the
// intercept are unpenalized.
inline HdGammaInit fit_gamma_initial(const Dataset& data, const HdConfig& cfg) {
  data.validate();
  const Eigen::Index n = data.n(), p = data.p();
  if (n < 10) throw std::invalid_argument("fit_gamma_initial: need n >= 10");
  const double lambda = cfg.resolve(cfg.lambda_init, n, p);

  const auto design = hd_detail::HdDesign::build(data.x, cfg.intercept);
  const Eigen::Index q = design.q();
  Eigen::MatrixXd z(n, q + 1);  // exposure column first after the intercept
  z.col(cfg.intercept ? 1 : 0) = data.a;
  if (cfg.intercept) {
    z.col(0) = design.z.col(0);
    z.rightCols(q - 1) = design.z.rightCols(q - 1);
  } else {
    z.rightCols(q) = design.z;
  }
  Eigen::VectorXd pen = Eigen::VectorXd::Ones(q + 1);
  pen[cfg.intercept ? 1 : 0] = 0.0;  // exposure unpenalized
  if (cfg.intercept) pen[0] = 0.0;

  hd_detail::LogisticLoss loss{z, data.y};
  ProxResult res =
      fista_kkt(loss, lambda, pen, Eigen::VectorXd::Zero(q + 1),
                cfg.max_prox_iter, cfg.tol_prox,
                kkt_tolerance(lambda));
  if (!res.converged)
    throw std::runtime_error("fit_gamma_initial: proximal solver failed");

  HdGammaInit out;
  out.iters = res.iters;
  const Eigen::Index a_col = cfg.intercept ? 1 : 0;
  out.beta_tilde = res.coef[a_col];
  Eigen::VectorXd gamma_std(q);
  Eigen::Index k = 0;
  for (Eigen::Index j = 0; j < q + 1; ++j)
    if (j != a_col) gamma_std[k++] = res.coef[j];
  out.gamma_tilde =
      SparseCoef::from_dense(design.to_original(gamma_std), 1e-12);
  out.gamma_tilde.dim = q;
  return out;
}

// Moment vector of the alpha equation on the internal standardized design;
// its max-norm is the feasibility quantity bounded by lambda_alpha.
inline Eigen::VectorXd alpha_moment(const Dataset& data,
                                    const SparseCoef& gamma_tilde,
                                    const SparseCoef& alpha,
                                    const LinkFunction& link,
                                    const Eigen::VectorXd& weights,
                                    bool intercept = true) {
  const Eigen::Index n = data.n();
  const auto design = hd_detail::HdDesign::build(data.x, intercept);
  const Eigen::VectorXd r_t =
      hd_detail::linear_predictor(data.x, gamma_tilde, intercept);
  const Eigen::VectorXd eta_a =
      hd_detail::linear_predictor(data.x, alpha, intercept);
  Eigen::VectorXd resid(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double v = weights.size() ? weights[i] : 1.0;
    resid[i] = v * (1.0 - data.y[i]) *
               std::exp(std::clamp(r_t[i], -kRClip, kRClip)) *
               (data.a[i] - link.g(eta_a[i]));
  }
  return design.z.transpose() * resid / static_cast<double>(n);
}

// Solves the l1-penalized form of the alpha moment equation; the returned
// coefficients satisfy ||moment||_inf <= lambda (1 + 1e-6) on the internal
// design, which is checked before returning.
inline SparseCoef fit_alpha_dantzig(const Dataset& data,
                                    const SparseCoef& gamma_tilde,
                                    const LinkFunction& link, double lambda,
                                    const Eigen::VectorXd& weights = {},
                                    const HdConfig& cfg = {}) {
  data.validate();
  const Eigen::Index n = data.n();
  const auto design = hd_detail::HdDesign::build(data.x, cfg.intercept);
  const Eigen::VectorXd r_t =
      hd_detail::linear_predictor(data.x, gamma_tilde, cfg.intercept);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double w = weights.size() ? weights[i] : 1.0;
    v[i] = w * (1.0 - data.y[i]) *
           std::exp(std::clamp(r_t[i], -kRClip, kRClip));
  }
  hd_detail::AlphaLoss loss{design.z, data.a, v, link};
  ProxResult res = fista_kkt(loss, lambda, design.penalty_weights(),
                             Eigen::VectorXd::Zero(design.q()),
                             cfg.max_prox_iter, cfg.tol_prox,
                             kkt_tolerance(lambda));
  if (!res.converged)
    throw std::runtime_error("fit_alpha_dantzig: proximal solver failed");
  SparseCoef alpha =
      SparseCoef::from_dense(design.to_original(res.coef), 1e-12);
  alpha.dim = design.q();
  const double viol =
      alpha_moment(data, gamma_tilde, alpha, link, weights, cfg.intercept)
          .cwiseAbs()
          .maxCoeff();
  if (viol > lambda * (1.0 + 1e-6))
    throw std::runtime_error("fit_alpha_dantzig: KKT violation");
  return alpha;
}

// Moment vector of the first constraint of the joint problem.
inline Eigen::VectorXd gamma_moment(const Dataset& data,
                                    const SparseCoef& alpha_hat,
                                    const SparseCoef& gamma_hat, double beta,
                                    const LinkFunction& link,
                                    const Eigen::VectorXd& weights,
                                    bool intercept = true) {
  const Eigen::Index n = data.n();
  const auto design = hd_detail::HdDesign::build(data.x, intercept);
  const Eigen::VectorXd eta_a =
      hd_detail::linear_predictor(data.x, alpha_hat, intercept);
  const Eigen::VectorXd r_h =
      hd_detail::linear_predictor(data.x, gamma_hat, intercept);
  Eigen::VectorXd resid(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double w = weights.size() ? weights[i] : 1.0;
    resid[i] =
        w * link.dg(eta_a[i]) *
        ((1.0 - data.y[i]) * std::exp(std::min(r_h[i], kExpArgMax)) -
         data.y[i] * std::exp(std::clamp(-beta * data.a[i], -kExpArgMax,
                                         kExpArgMax)));
  }
  return design.z.transpose() * resid / static_cast<double>(n);
}

struct JointFit {
  double beta_hat = 0.0;
  SparseCoef gamma_hat;
  int outer_iters = 0;
  double gamma_slack = 0.0;  // max-norm feasibility margin used vs bound
  double eq_value = 0.0;
};

// Alternating solution of the joint (beta, gamma) problem: an l1 gamma step
// at fixed beta, then the scalar estimating equation at fixed gamma.
inline JointFit fit_gamma_beta_joint(const Dataset& data,
                                     const SparseCoef& alpha_hat,
                                     const LinkFunction& link,
                                     double lambda_gamma, double beta_init,
                                     const HdConfig& cfg = {},
                                     const Eigen::VectorXd& weights = {}) {
  data.validate();
  const Eigen::Index n = data.n();
  const auto design = hd_detail::HdDesign::build(data.x, cfg.intercept);
  const Eigen::VectorXd eta_a =
      hd_detail::linear_predictor(data.x, alpha_hat, cfg.intercept);
  Eigen::VectorXd m_hat(n), u(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double w = weights.size() ? weights[i] : 1.0;
    m_hat[i] = link.g(eta_a[i]);
    u[i] = w * link.dg(eta_a[i]);
  }
  const Eigen::VectorXd w_eq =
      weights.size() ? weights : Eigen::VectorXd::Ones(n);

  double beta = beta_init;
  Eigen::VectorXd gamma_std = Eigen::VectorXd::Zero(design.q());
  JointFit out;
  SolveResult sol;
  for (int sweep = 0; sweep < cfg.max_outer; ++sweep) {
    out.outer_iters = sweep + 1;
    Eigen::VectorXd case_w(n);
    for (Eigen::Index i = 0; i < n; ++i)
      case_w[i] = data.y[i] * std::exp(std::clamp(-beta * data.a[i],
                                                  -kExpArgMax, kExpArgMax));
    hd_detail::GammaLoss loss{design.z, data.y, u, case_w};
    ProxResult res = fista_kkt(loss, lambda_gamma, design.penalty_weights(),
                               gamma_std, cfg.max_prox_iter, cfg.tol_prox,
                               kkt_tolerance(lambda_gamma));
    if (!res.converged)
      throw std::runtime_error("fit_gamma_beta_joint: gamma step failed");
    const double dgamma = (res.coef - gamma_std).lpNorm<1>();
    gamma_std = res.coef;

    auto preds = NuisancePredictions::make(design.z * gamma_std, m_hat, w_eq);
    sol = solve_beta(data, preds);
    if (!sol.converged)
      throw std::runtime_error("fit_gamma_beta_joint: beta step failed");
    const double dbeta = std::abs(sol.beta_hat - beta);
    beta = sol.beta_hat;
    if (dbeta + dgamma <= cfg.tol_outer) {
      out.beta_hat = beta;
      out.gamma_hat =
          SparseCoef::from_dense(design.to_original(gamma_std), 1e-12);
      out.gamma_hat.dim = design.q();
      out.eq_value = sol.eq_value;
      const double viol = gamma_moment(data, alpha_hat, out.gamma_hat, beta,
                                       link, weights, cfg.intercept)
                              .cwiseAbs()
                              .maxCoeff();
      out.gamma_slack = viol;
      if (viol > lambda_gamma * (1.0 + 1e-6))
        throw std::runtime_error("fit_gamma_beta_joint: KKT violation");
      return out;
    }
  }
  std::ostringstream msg;
  msg << "fit_gamma_beta_joint: no outer convergence in " << cfg.max_outer
      << " sweeps (last beta=" << beta << ")";
  throw std::runtime_error(msg.str());
}

// Row subset of a dataset (used for cross-fitted weight construction).
inline Dataset subset_dataset(const Dataset& data,
                              const std::vector<Eigen::Index>& idx) {
  Dataset out;
  const Eigen::Index m = static_cast<Eigen::Index>(idx.size());
  out.y.resize(m);
  out.a.resize(m);
  out.x.resize(m, data.p());
  for (Eigen::Index r = 0; r < m; ++r) {
    out.y[r] = data.y[idx[static_cast<std::size_t>(r)]];
    out.a[r] = data.a[idx[static_cast<std::size_t>(r)]];
    out.x.row(r) = data.x.row(idx[static_cast<std::size_t>(r)]);
  }
  out.column_names = data.column_names;
  return out;
}

// Full high-dimensional pipeline: gamma_tilde -> alpha_hat -> joint
// (beta_hat, gamma_hat). When phi != none, weights are built from a
// cross-fitted unweighted first stage (K = 5) and applied to both moment
// fits and the final equation.
inline EstimateReport estimate_hd(const Dataset& data, const LinkFunction& link,
                                  const HdConfig& cfg = {}, PhiSpec phi = {},
                                  double level = 0.95,
                                  std::uint64_t seed = 0) {
  data.validate();
  const Eigen::Index n = data.n(), p = data.p();
  const double lambda_a = cfg.resolve(cfg.lambda_alpha, n, p);
  const double lambda_g = cfg.resolve(cfg.lambda_gamma, n, p);

  Eigen::VectorXd weights;  // empty = unweighted
  std::vector<int> fold_id;
  if (phi.kind != PhiKind::none) {
    const int k_folds = 5;
    const FoldPlan plan = make_folds(n, k_folds, derive_seed(seed, 0x686477ULL));
    weights.resize(n);
    fold_id = plan.assignments;
    for (int k = 1; k <= k_folds; ++k) {
      const auto train_idx = plan.complement_indices(k);
      const Dataset train = subset_dataset(data, train_idx);
      HdConfig sub_cfg = cfg;
      sub_cfg.lambda_alpha = cfg.resolve(cfg.lambda_alpha,
                                         train.n(), p);
      sub_cfg.lambda_gamma = cfg.resolve(cfg.lambda_gamma, train.n(), p);
      sub_cfg.lambda_init = cfg.resolve(cfg.lambda_init, train.n(), p);
      const HdGammaInit init = fit_gamma_initial(train, sub_cfg);
      const SparseCoef alpha = fit_alpha_dantzig(
          train, init.gamma_tilde, link, sub_cfg.lambda_alpha, {}, sub_cfg);
      const JointFit joint =
          fit_gamma_beta_joint(train, alpha, link, sub_cfg.lambda_gamma,
                               init.beta_tilde, sub_cfg);
      PhiSpec fold_phi = phi;
      fold_phi.beta_pilot = joint.beta_hat;
      if (fold_phi.kind == PhiKind::opt &&
          fold_phi.quadrature == PhiQuadrature::gauss_hermite) {
        const Eigen::VectorXd eta_a_train =
            hd_detail::linear_predictor(train.x, alpha, cfg.intercept);
        Eigen::VectorXd m_train(train.n());
        for (Eigen::Index i = 0; i < train.n(); ++i)
          m_train[i] = link.g(eta_a_train[i]);
        fold_phi.sigma2 = control_residual_variance(train, m_train);
      }
      const auto eval_idx = plan.fold_indices(k);
      const Dataset eval = subset_dataset(data, eval_idx);
      const Eigen::VectorXd r_eval =
          hd_detail::linear_predictor(eval.x, joint.gamma_hat, cfg.intercept);
      const Eigen::VectorXd eta_eval =
          hd_detail::linear_predictor(eval.x, alpha, cfg.intercept);
      Eigen::VectorXd m_eval(eval.n());
      for (Eigen::Index i = 0; i < eval.n(); ++i)
        m_eval[i] = link.g(eta_eval[i]);
      const Eigen::VectorXd w_eval = build_weights(r_eval, m_eval, fold_phi);
      for (Eigen::Index r = 0; r < eval.n(); ++r)
        weights[eval_idx[static_cast<std::size_t>(r)]] = w_eval[r];
    }
  }

  HdConfig run_cfg = cfg;
  run_cfg.lambda_alpha = lambda_a;
  run_cfg.lambda_gamma = lambda_g;
  run_cfg.lambda_init = cfg.resolve(cfg.lambda_init, n, p);
  const HdGammaInit init = fit_gamma_initial(data, run_cfg);
  const SparseCoef alpha =
      fit_alpha_dantzig(data, init.gamma_tilde, link, lambda_a, weights, run_cfg);
  const JointFit joint = fit_gamma_beta_joint(data, alpha, link, lambda_g,
                                              init.beta_tilde, run_cfg, weights);

  const Eigen::VectorXd r_hat =
      hd_detail::linear_predictor(data.x, joint.gamma_hat, cfg.intercept);
  const Eigen::VectorXd eta_a =
      hd_detail::linear_predictor(data.x, alpha, cfg.intercept);
  Eigen::VectorXd m_hat(n);
  for (Eigen::Index i = 0; i < n; ++i) m_hat[i] = link.g(eta_a[i]);
  const Eigen::VectorXd w_eq =
      weights.size() ? weights : Eigen::VectorXd::Ones(n);
  auto preds = NuisancePredictions::make(r_hat, m_hat, w_eq, fold_id);

  EstimateReport rep;
  rep.method = Method::hd_sparse;
  rep.beta_hat = joint.beta_hat;
  rep.converged = true;
  rep.se = sandwich_se(data, preds, joint.beta_hat);
  rep.level = level;
  fill_ci(rep);
  rep.diagnostics["lambda_alpha"] = lambda_a;
  rep.diagnostics["lambda_gamma"] = lambda_g;
  rep.diagnostics["alpha_s_hat"] = static_cast<double>(alpha.s_hat());
  rep.diagnostics["gamma_s_hat"] = static_cast<double>(joint.gamma_hat.s_hat());
  rep.diagnostics["outer_iters"] = joint.outer_iters;
  rep.diagnostics["alpha_slack"] =
      lambda_a -
      alpha_moment(data, init.gamma_tilde, alpha, link, weights, cfg.intercept)
          .cwiseAbs()
          .maxCoeff();
  rep.diagnostics["gamma_slack"] = lambda_g - joint.gamma_slack;
  rep.diagnostics["eq_value"] = joint.eq_value;
  rep.diagnostics["r_clip_count"] = static_cast<double>(preds.r_clip_count);
  return rep;
}

}  // namespace drlogit
