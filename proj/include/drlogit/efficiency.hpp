#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

#include "drlogit/types.hpp"

namespace drlogit {

enum class PhiKind { none, simp, opt };

inline PhiKind phi_kind_from_name(std::string_view s) {
  if (s == "none") return PhiKind::none;
  if (s == "simp") return PhiKind::simp;
  if (s == "opt") return PhiKind::opt;
  throw std::invalid_argument("unknown phi: " + std::string(s));
}

enum class PhiQuadrature { binary_closed_form, gauss_hermite };

// Gauss-Hermite rule for weight e^{-t^2}, built by Golub-Welsch from the
// symmetric tridiagonal Jacobi matrix.
struct GaussHermite {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;

  static GaussHermite make(int n) {
    if (n < 5) throw std::invalid_argument("GaussHermite: need >= 5 nodes");
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i) {
      const double off = std::sqrt(i / 2.0);
      jac(i, i - 1) = off;
      jac(i - 1, i) = off;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
    GaussHermite gh;
    gh.nodes = es.eigenvalues();
    gh.weights.resize(n);
    const double sqrt_pi = std::sqrt(M_PI);
    for (int i = 0; i < n; ++i) {
      const double v0 = es.eigenvectors()(0, i);
      gh.weights[i] = sqrt_pi * v0 * v0;
    }
    return gh;
  }

  // E[f(Z)] for Z ~ Normal(mean, sd^2).
  template <typename F>
  double normal_expectation(F&& f, double mean, double sd) const {
    const double c = 1.0 / std::sqrt(M_PI);
    double sum = 0.0;
    for (Eigen::Index i = 0; i < nodes.size(); ++i)
      sum += weights[i] * f(mean + std::sqrt(2.0) * sd * nodes[i]);
    return c * sum;
  }
};

struct PhiSpec {
  PhiKind kind = PhiKind::none;
  PhiQuadrature quadrature = PhiQuadrature::gauss_hermite;
  int nodes = 20;
  double beta_pilot = 0.0;  // required for kind == opt
  double sigma2 = 1.0;      // working Var(A | X, Y=0) for the Gaussian law
};

inline double phi_simp(double r_val) { return expit(r_val); }

// Variance-optimal weight for binary A with P(A=1 | X, Y=0) = m.
inline double phi_opt_binary(double m_val, double r_val, double beta) {
  const double pm = std::clamp(m_val, 0.0, 1.0);
  const double num = (1.0 - pm) * (0.0 - pm) * (0.0 - pm) +
                     pm * (1.0 - pm) * (1.0 - pm);
  const double den =
      (1.0 - pm) * (0.0 - pm) * (0.0 - pm) / expit(r_val) +
      pm * (1.0 - pm) * (1.0 - pm) / expit(beta + r_val);
  if (std::abs(den) < 1e-12)
    throw std::runtime_error("phi_opt: degenerate denominator");
  return num / den;
}

// Variance-optimal weight under the Gaussian working law
// A | X, Y=0 ~ Normal(m, sigma2), integrated by Gauss-Hermite.
inline double phi_opt_gaussian(double m_val, double r_val, double beta,
                               double sigma2, const GaussHermite& gh) {
  const double sd = std::sqrt(sigma2);
  const double num = gh.normal_expectation(
      [&](double av) { const double d = av - m_val; return d * d; }, m_val, sd);
  const double den = gh.normal_expectation(
      [&](double av) {
        const double d = av - m_val;
        return d * d / expit(beta * av + r_val);
      },
      m_val, sd);
  if (std::abs(den) < 1e-12)
    throw std::runtime_error("phi_opt: degenerate denominator");
  return num / den;
}

inline double phi_value(double r_val, double m_val, const PhiSpec& spec,
                        const GaussHermite* gh = nullptr) {
  switch (spec.kind) {
    case PhiKind::none: return 1.0;
    case PhiKind::simp: return phi_simp(r_val);
    case PhiKind::opt:
      if (spec.quadrature == PhiQuadrature::binary_closed_form)
        return phi_opt_binary(m_val, r_val, spec.beta_pilot);
      if (!gh) throw std::invalid_argument("phi_value: quadrature rule missing");
      return phi_opt_gaussian(m_val, r_val, spec.beta_pilot, spec.sigma2, *gh);
  }
  return 1.0;
}

// w_i = phi(X_i) e^{-r_hat_i}, clamped to [1e-6, 1e6]. r_hat and m_hat must
// already be the out-of-fold values when cross-fitting is in effect.
inline Eigen::VectorXd build_weights(const Eigen::VectorXd& r_hat,
                                     const Eigen::VectorXd& m_hat,
                                     const PhiSpec& spec) {
  const Eigen::Index n = r_hat.size();
  if (m_hat.size() != n)
    throw std::invalid_argument("build_weights: length mismatch");
  Eigen::VectorXd w(n);
  if (spec.kind == PhiKind::none) {
    w.setOnes();
    return w;
  }
  GaussHermite gh;
  const bool need_gh = spec.kind == PhiKind::opt &&
                       spec.quadrature == PhiQuadrature::gauss_hermite;
  if (need_gh) gh = GaussHermite::make(spec.nodes);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double phi =
        phi_value(r_hat[i], m_hat[i], spec, need_gh ? &gh : nullptr);
    const double wi = phi * std::exp(-std::clamp(r_hat[i], -kRClip, kRClip));
    w[i] = std::clamp(wi, kWeightClipLo, kWeightClipHi);
  }
  return w;
}

}  // namespace drlogit
