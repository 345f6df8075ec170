#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <vector>

#include "drlogit/core.hpp"
#include "drlogit/efficiency.hpp"
#include "drlogit/learners.hpp"
#include "drlogit/lowdim.hpp"
#include "drlogit/types.hpp"

namespace drlogit {

enum class RVariant { t_refit, ratio_refit };

struct RefitConfig {
  int k_outer = 5;
  int k_inner = 5;
  RVariant r_variant = RVariant::t_refit;
  double prob_clip = kProbClip;
  std::uint64_t seed = 0;

  void validate() const {
    // k_outer == 1 is a test-only mode that reduces cross-fitting to the
    // plain in-sample equation.
    if (k_outer < 1 || k_inner < 2)
      throw std::invalid_argument("RefitConfig: bad fold counts");
    if (!(prob_clip > 0.0 && prob_clip < 0.1))
      throw std::invalid_argument("RefitConfig: prob_clip outside (0, 0.1)");
  }
};

namespace ml_detail {

inline std::vector<Eigen::Index> filter_y(const Dataset& data,
                                          const std::vector<Eigen::Index>& idx,
                                          double y_value) {
  std::vector<Eigen::Index> out;
  for (const auto i : idx)
    if (data.y[i] == y_value) out.push_back(i);
  return out;
}

// Fold plan restricted to an index subset; labels over the subset positions.
inline std::vector<std::vector<Eigen::Index>> split_subset(
    const std::vector<Eigen::Index>& idx, int k, std::uint64_t seed) {
  const FoldPlan plan =
      make_folds(static_cast<Eigen::Index>(idx.size()), k, seed);
  std::vector<std::vector<Eigen::Index>> folds(static_cast<std::size_t>(k));
  for (std::size_t pos = 0; pos < idx.size(); ++pos)
    folds[static_cast<std::size_t>(plan.assignments[pos] - 1)].push_back(
        idx[pos]);
  return folds;
}

}  // namespace ml_detail

// K out-of-fold predictors for m0 = E[A | Y=0, X]; each trained on the fold
// complement restricted to controls.
struct MHatFit {
  std::vector<std::unique_ptr<Predictor>> per_fold;  // index k-1
  Eigen::VectorXd m_hat;                             // out-of-fold values
};

inline MHatFit fit_m_hat(const Dataset& data, const Learner& learner,
                         const FoldPlan& plan) {
  MHatFit out;
  out.m_hat.resize(data.n());
  for (int k = 1; k <= plan.k; ++k) {
    const auto train = ml_detail::filter_y(
        data, plan.k == 1 ? plan.fold_indices(1) : plan.complement_indices(k),
        0.0);
    if (train.empty())
      throw std::runtime_error("fit_m_hat: empty Y=0 training subfold");
    auto pred = learner.fit(data.a, data.x, train);
    for (const auto i : plan.fold_indices(k))
      out.m_hat[i] = pred->predict(data.x.row(i).transpose());
    out.per_fold.push_back(std::move(pred));
  }
  return out;
}

// Inner-fold fits of the full model M(A, X) = P(Y=1 | A, X) and of
// a(X) = E[A | X] within one outer-fold complement.
struct FullModelFit {
  std::vector<std::vector<Eigen::Index>> inner_folds;    // indices into data
  std::vector<std::unique_ptr<Predictor>> m_full;        // per inner fold j
  std::vector<std::unique_ptr<Predictor>> a_hat;         // per inner fold j
  long clamp_count = 0;
};

inline FullModelFit fit_full_and_a(const Dataset& data, const Learner& learner,
                                   const std::vector<Eigen::Index>& train_idx,
                                   int k_inner, std::uint64_t seed) {
  FullModelFit out;
  out.inner_folds = ml_detail::split_subset(train_idx, k_inner, seed);
  Eigen::MatrixXd ax(data.n(), data.p() + 1);
  ax.col(0) = data.a;
  ax.rightCols(data.p()) = data.x;
  for (int j = 0; j < k_inner; ++j) {
    std::vector<Eigen::Index> inner_train;
    for (int jj = 0; jj < k_inner; ++jj)
      if (jj != j)
        inner_train.insert(inner_train.end(),
                           out.inner_folds[static_cast<std::size_t>(jj)].begin(),
                           out.inner_folds[static_cast<std::size_t>(jj)].end());
    out.m_full.push_back(learner.fit(data.y, ax, inner_train));
    out.a_hat.push_back(learner.fit(data.a, data.x, inner_train));
  }
  return out;
}

// Least-squares slope of logit M on exposure residuals (the cross-fitted
// initial beta of the refitting construction).
inline double estimate_beta_init(const Eigen::VectorXd& logit_m,
                                 const Eigen::VectorXd& a_resid) {
  if (logit_m.size() != a_resid.size())
    throw std::invalid_argument("estimate_beta_init: length mismatch");
  const double denom = a_resid.squaredNorm();
  if (denom <= 0.0)
    throw std::runtime_error("estimate_beta_init: no exposure variation");
  return logit_m.dot(a_resid) / denom;
}

// r estimator assembled from a refit of t(x) = E[logit M(A,X) | X = x]:
//   r_hat(x) = t_hat(x) - breve_beta * mean_j a_hat^{[-k,-j]}(x).
class TRefitPredictor final : public Predictor {
 public:
  TRefitPredictor(std::unique_ptr<Predictor> t_hat,
                  std::vector<const Predictor*> a_hats, double breve_beta)
      : t_hat_(std::move(t_hat)),
        a_hats_(std::move(a_hats)),
        breve_beta_(breve_beta) {}

  double predict(const Eigen::Ref<const Eigen::VectorXd>& row) const override {
    double a_avg = 0.0;
    for (const auto* p : a_hats_) a_avg += p->predict(row);
    a_avg /= static_cast<double>(a_hats_.size());
    return t_hat_->predict(row) - breve_beta_ * a_avg;
  }

 private:
  std::unique_ptr<Predictor> t_hat_;
  std::vector<const Predictor*> a_hats_;
  double breve_beta_;
};

inline std::unique_ptr<Predictor> refit_r_t(
    const Dataset& data, const Learner& learner,
    const std::vector<Eigen::Index>& train_idx, const Eigen::VectorXd& w_all,
    double breve_beta, std::vector<const Predictor*> a_hats) {
  auto t_hat = learner.fit(w_all, data.x, train_idx);
  return std::make_unique<TRefitPredictor>(std::move(t_hat), std::move(a_hats),
                                           breve_beta);
}

// Alternative r estimator from the identifying ratio
//   e^{r0(x)} = E[e^{-beta0 A} | X=x, Y=1] / E[1-Y | X=x].
class RatioPredictor final : public Predictor {
 public:
  RatioPredictor(std::unique_ptr<Predictor> num, std::unique_ptr<Predictor> den,
                 double prob_clip)
      : num_(std::move(num)), den_(std::move(den)), prob_clip_(prob_clip) {}

  double predict(const Eigen::Ref<const Eigen::VectorXd>& row) const override {
    const double num = std::max(num_->predict(row), 1e-12);
    const double den = std::max(den_->predict(row), prob_clip_);
    return std::log(num / den);
  }

  bool denominator_clamped(const Eigen::Ref<const Eigen::VectorXd>& row) const {
    return den_->predict(row) < prob_clip_;
  }

 private:
  std::unique_ptr<Predictor> num_;
  std::unique_ptr<Predictor> den_;
  double prob_clip_;
};

inline std::unique_ptr<Predictor> refit_r_ratio(
    const Dataset& data, const Learner& learner,
    const std::vector<Eigen::Index>& train_idx, double breve_beta,
    double prob_clip = kProbClip) {
  const auto cases = ml_detail::filter_y(data, train_idx, 1.0);
  if (cases.empty())
    throw std::runtime_error("refit_r_ratio: no Y=1 rows in training fold");
  Eigen::VectorXd resp_num(data.n());
  for (Eigen::Index i = 0; i < data.n(); ++i)
    resp_num[i] =
        std::exp(std::clamp(-breve_beta * data.a[i], -kExpArgMax, kExpArgMax));
  auto num = learner.fit(resp_num, data.x, cases);
  const Eigen::VectorXd one_minus_y = Eigen::VectorXd::Ones(data.n()) - data.y;
  auto den = learner.fit(one_minus_y, data.x, train_idx);

  // Reject a denominator model clamped everywhere on its training fold.
  bool any_unclamped = false;
  for (const auto i : train_idx)
    if (den->predict(data.x.row(i).transpose()) >= prob_clip) {
      any_unclamped = true;
      break;
    }
  if (!any_unclamped)
    throw std::runtime_error("refit_r_ratio: degenerate Y=0 frequency model");
  return std::make_unique<RatioPredictor>(std::move(num), std::move(den),
                                          prob_clip);
}

struct CrossfitNuisances {
  NuisancePredictions preds;
  std::vector<double> breve_beta;                   // per outer fold
  std::vector<std::unique_ptr<Predictor>> r_hats;   // per outer fold
  long clamp_count = 0;                             // M outputs clamped
};

// Assembles out-of-fold r_hat and m_hat over the whole sample via the
// refitting construction.
inline CrossfitNuisances fit_nuisances_ml(const Dataset& data,
                                          const Learner& learner,
                                          const RefitConfig& cfg) {
  data.validate();
  cfg.validate();
  const Eigen::Index n = data.n();
  FoldPlan plan;
  if (cfg.k_outer == 1) {
    plan.k = 1;
    plan.assignments.assign(static_cast<std::size_t>(n), 1);
  } else {
    plan = make_folds(n, cfg.k_outer, derive_seed(cfg.seed, 0x6f75746572ULL));
  }

  CrossfitNuisances out;
  const MHatFit m_fit = fit_m_hat(data, learner, plan);
  Eigen::VectorXd r_hat(n);

  for (int k = 1; k <= plan.k; ++k) {
    const auto train_idx =
        plan.k == 1 ? plan.fold_indices(1) : plan.complement_indices(k);
    FullModelFit full = fit_full_and_a(
        data, learner, train_idx, cfg.k_inner,
        derive_seed(cfg.seed, 0x696e6e6572ULL, static_cast<std::uint64_t>(k)));

    // Out-of-inner-fold W_i and exposure residuals over the training set.
    Eigen::VectorXd w_all = Eigen::VectorXd::Zero(n);
    std::vector<double> logit_m, a_resid;
    for (int j = 0; j < cfg.k_inner; ++j) {
      const auto& fold = full.inner_folds[static_cast<std::size_t>(j)];
      for (const auto i : fold) {
        Eigen::VectorXd axi(data.p() + 1);
        axi[0] = data.a[i];
        axi.tail(data.p()) = data.x.row(i).transpose();
        double m_val = full.m_full[static_cast<std::size_t>(j)]->predict(axi);
        if (m_val < cfg.prob_clip || m_val > 1.0 - cfg.prob_clip) {
          m_val = clamp_prob(m_val, cfg.prob_clip);
          ++out.clamp_count;
        }
        const double w = logit(m_val);
        const double resid =
            data.a[i] -
            full.a_hat[static_cast<std::size_t>(j)]->predict(
                data.x.row(i).transpose());
        w_all[i] = w;
        logit_m.push_back(w);
        a_resid.push_back(resid);
      }
    }
    const double breve_beta = estimate_beta_init(
        Eigen::Map<Eigen::VectorXd>(logit_m.data(),
                                    static_cast<Eigen::Index>(logit_m.size())),
        Eigen::Map<Eigen::VectorXd>(a_resid.data(),
                                    static_cast<Eigen::Index>(a_resid.size())));
    out.breve_beta.push_back(breve_beta);

    std::unique_ptr<Predictor> r_pred;
    if (cfg.r_variant == RVariant::t_refit) {
      std::vector<const Predictor*> a_hats;
      for (const auto& p : full.a_hat) a_hats.push_back(p.get());
      r_pred = refit_r_t(data, learner, train_idx, w_all, breve_beta,
                         std::move(a_hats));
      // Keep the averaged-a predictors alive alongside the refit predictor.
      for (auto& p : full.a_hat) out.r_hats.push_back(std::move(p));
    } else {
      r_pred = refit_r_ratio(data, learner, train_idx, breve_beta,
                             cfg.prob_clip);
    }
    for (const auto i : plan.fold_indices(k))
      r_hat[i] = r_pred->predict(data.x.row(i).transpose());
    out.r_hats.push_back(std::move(r_pred));
  }

  out.preds = NuisancePredictions::make(r_hat, m_fit.m_hat, {},
                                        plan.assignments);
  return out;
}

// Cross-fitted doubly robust estimate with machine-learning nuisances.
inline EstimateReport estimate_ml(const Dataset& data, const Learner& learner,
                                  const RefitConfig& cfg = {}, PhiSpec phi = {},
                                  double level = 0.95) {
  CrossfitNuisances nuis = fit_nuisances_ml(data, learner, cfg);
  if (phi.kind != PhiKind::none) {
    if (phi.kind == PhiKind::opt) {
      if (phi.quadrature == PhiQuadrature::gauss_hermite)
        phi.sigma2 = control_residual_variance(data, nuis.preds.m_hat);
      PhiSpec simp = phi;
      simp.kind = PhiKind::simp;
      auto pilot = NuisancePredictions::make(
          nuis.preds.r_hat, nuis.preds.m_hat,
          build_weights(nuis.preds.r_hat, nuis.preds.m_hat, simp),
          nuis.preds.fold_id);
      phi.beta_pilot = solve_beta(data, pilot).beta_hat;
    }
    nuis.preds = NuisancePredictions::make(
        nuis.preds.r_hat, nuis.preds.m_hat,
        build_weights(nuis.preds.r_hat, nuis.preds.m_hat, phi),
        nuis.preds.fold_id);
  }
  const SolveResult sol = solve_beta(data, nuis.preds);
  EstimateReport rep;
  rep.method = Method::ml_crossfit;
  rep.beta_hat = sol.beta_hat;
  rep.converged = sol.converged;
  rep.se = sandwich_se(data, nuis.preds, sol.beta_hat);
  rep.level = level;
  fill_ci(rep);
  rep.diagnostics["root_iters"] = sol.iters;
  rep.diagnostics["eq_value"] = sol.eq_value;
  rep.diagnostics["prob_clamps"] = static_cast<double>(nuis.clamp_count);
  rep.diagnostics["r_clip_count"] =
      static_cast<double>(nuis.preds.r_clip_count);
  double bb = 0.0;
  for (const double b : nuis.breve_beta) bb += b;
  rep.diagnostics["breve_beta_mean"] =
      bb / static_cast<double>(nuis.breve_beta.size());
  return rep;
}

}  // namespace drlogit
