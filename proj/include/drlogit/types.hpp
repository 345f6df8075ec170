#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace drlogit {

// Clamp bounds shared across the library.
inline constexpr double kRClip = 30.0;       // bound on r before exponentiation
inline constexpr double kExpArgMax = 700.0;  // largest safe argument of std::exp
inline constexpr double kProbClip = 1e-6;    // probability floor/ceiling before logit
inline constexpr double kWeightClipLo = 1e-6;
inline constexpr double kWeightClipHi = 1e6;

inline double expit(double u) { return 1.0 / (1.0 + std::exp(-u)); }

inline double logit(double p) { return std::log(p / (1.0 - p)); }

inline double clamp_prob(double p, double clip = kProbClip) {
  return std::clamp(p, clip, 1.0 - clip);
}

enum class Method { lowdim, hd_sparse, ml_crossfit };

inline const char* method_name(Method m) {
  switch (m) {
    case Method::lowdim: return "lowdim";
    case Method::hd_sparse: return "hd_sparse";
    case Method::ml_crossfit: return "ml_crossfit";
  }
  return "?";
}

// Observed sample: binary outcome y, scalar exposure a, covariate rows x.
struct Dataset {
  Eigen::VectorXd y;
  Eigen::VectorXd a;
  Eigen::MatrixXd x;
  std::vector<std::string> column_names;  // optional, size p when present

  Eigen::Index n() const { return y.size(); }
  Eigen::Index p() const { return x.cols(); }

  void validate() const {
    const Eigen::Index nn = y.size();
    if (nn < 2) throw std::invalid_argument("Dataset: need n >= 2");
    if (a.size() != nn || x.rows() != nn)
      throw std::invalid_argument("Dataset: y, a, x must share n rows");
    if (!column_names.empty() &&
        static_cast<Eigen::Index>(column_names.size()) != x.cols())
      throw std::invalid_argument("Dataset: column_names size mismatch");
    bool has0 = false, has1 = false;
    for (Eigen::Index i = 0; i < nn; ++i) {
      const double yi = y[i];
      if (yi != 0.0 && yi != 1.0)
        throw std::invalid_argument("Dataset: y entries must be 0 or 1");
      (yi == 0.0 ? has0 : has1) = true;
      if (!std::isfinite(a[i]))
        throw std::invalid_argument("Dataset: non-finite exposure value");
    }
    if (!has0 || !has1)
      throw std::invalid_argument("Dataset: y must contain both classes");
    if (!x.allFinite())
      throw std::invalid_argument("Dataset: non-finite covariate value");
  }
};

// Balanced fold assignment; labels are 1..k.
struct FoldPlan {
  int k = 1;
  std::vector<int> assignments;

  std::vector<Eigen::Index> fold_indices(int fold) const {
    std::vector<Eigen::Index> idx;
    for (std::size_t i = 0; i < assignments.size(); ++i)
      if (assignments[i] == fold) idx.push_back(static_cast<Eigen::Index>(i));
    return idx;
  }
  std::vector<Eigen::Index> complement_indices(int fold) const {
    std::vector<Eigen::Index> idx;
    for (std::size_t i = 0; i < assignments.size(); ++i)
      if (assignments[i] != fold) idx.push_back(static_cast<Eigen::Index>(i));
    return idx;
  }
};

// Per-observation (out-of-fold) nuisance values feeding the estimating
// equation. r_hat is clamped to [-kRClip, kRClip] on construction; the number
// of clamped entries is kept for diagnostics.
struct NuisancePredictions {
  Eigen::VectorXd r_hat;
  Eigen::VectorXd m_hat;
  Eigen::VectorXd w_hat;        // strictly positive; all ones by default
  std::vector<int> fold_id;     // all ones when no cross-fitting
  long r_clip_count = 0;

  static NuisancePredictions make(Eigen::VectorXd r, Eigen::VectorXd m,
                                  Eigen::VectorXd w = {},
                                  std::vector<int> folds = {}) {
    NuisancePredictions out;
    const Eigen::Index n = r.size();
    if (m.size() != n)
      throw std::invalid_argument("NuisancePredictions: length mismatch");
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!std::isfinite(r[i]))
        throw std::invalid_argument("NuisancePredictions: non-finite r_hat");
      if (r[i] > kRClip || r[i] < -kRClip) {
        r[i] = std::clamp(r[i], -kRClip, kRClip);
        ++out.r_clip_count;
      }
    }
    if (w.size() == 0) w = Eigen::VectorXd::Ones(n);
    if (w.size() != n)
      throw std::invalid_argument("NuisancePredictions: w_hat length mismatch");
    for (Eigen::Index i = 0; i < n; ++i)
      if (!(w[i] > 0.0) || !std::isfinite(w[i]))
        throw std::invalid_argument(
            "NuisancePredictions: w_hat must be positive and finite");
    if (folds.empty()) folds.assign(static_cast<std::size_t>(n), 1);
    if (static_cast<Eigen::Index>(folds.size()) != n)
      throw std::invalid_argument("NuisancePredictions: fold_id length mismatch");
    out.r_hat = std::move(r);
    out.m_hat = std::move(m);
    out.w_hat = std::move(w);
    out.fold_id = std::move(folds);
    return out;
  }

  Eigen::Index n() const { return r_hat.size(); }
};

// Point estimate with influence-function inference and solver diagnostics.
struct EstimateReport {
  double beta_hat = 0.0;
  double se = 0.0;
  double ci_lower = 0.0;
  double ci_upper = 0.0;
  double level = 0.95;
  Method method = Method::lowdim;
  bool converged = false;
  std::map<std::string, double> diagnostics;
};

// Two-sided normal quantile via Acklam's rational approximation refined by one
// Halley step; accurate to ~1e-15, no external dependency.
inline double normal_quantile(double prob) {
  if (!(prob > 0.0 && prob < 1.0))
    throw std::invalid_argument("normal_quantile: p outside (0,1)");
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double q, x;
  if (prob < plow) {
    q = std::sqrt(-2.0 * std::log(prob));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (prob <= 1.0 - plow) {
    q = prob - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
        q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    q = std::sqrt(-2.0 * std::log(1.0 - prob));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // One Halley refinement against erfc.
  const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - prob;
  const double u = e * std::sqrt(2.0 * M_PI) * std::exp(x * x / 2.0);
  x = x - u / (1.0 + x * u / 2.0);
  return x;
}

inline void fill_ci(EstimateReport& rep) {
  const double z = normal_quantile(1.0 - (1.0 - rep.level) / 2.0);
  rep.ci_lower = rep.beta_hat - z * rep.se;
  rep.ci_upper = rep.beta_hat + z * rep.se;
}

}  // namespace drlogit
