#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "drlogit/core.hpp"
#include "drlogit/hd_sparse.hpp"
#include "drlogit/lowdim.hpp"
#include "drlogit/ml_crossfit.hpp"
#include "drlogit/parallel.hpp"
#include "drlogit/rng.hpp"
#include "drlogit/types.hpp"

namespace drlogit {

enum class DgpKind { cond_gaussian, logistic_linear, nonlinear };

// Data-generating process. For cond_gaussian the truth follows from
// (mu0, mu1, sigma): the exposure coefficient is the first entry of
// sigma^{-1} (mu1 - mu0), so beta0 here is a *target* honoured only by the
// canonical builder (which solves mu1 = mu0 + sigma * theta).
struct DgpSpec {
  DgpKind kind = DgpKind::cond_gaussian;
  Eigen::Index n = 1000;
  Eigen::Index p = 5;
  double beta0 = 0.5;
  Eigen::VectorXd mu0, mu1;  // length p+1, A coordinate first
  Eigen::MatrixXd sigma;     // (p+1) x (p+1), positive definite
  double pi_y = 0.5;
  Eigen::Index sparsity = 3;     // support size of gamma0 in canonical builds
  double nonlinear_scale = 0.5;  // curvature of the misspecified components
  double noise_sd = 1.0;         // sd of A given X in the non-Gaussian kinds

  // AR(1) joint covariance, sparse gamma0, mu1 placed so the implied
  // logistic coefficients are exactly (beta0, gamma0).
  static DgpSpec canonical(Eigen::Index n, Eigen::Index p, double beta0,
                           Eigen::Index sparsity = 3, double rho = 0.3) {
    DgpSpec spec;
    spec.n = n;
    spec.p = p;
    spec.beta0 = beta0;
    spec.sparsity = std::min(sparsity, p);
    const Eigen::Index d = p + 1;
    spec.sigma.resize(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j)
        spec.sigma(i, j) = std::pow(rho, std::abs(i - j));
    spec.mu0 = Eigen::VectorXd::Zero(d);
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(d);
    theta[0] = beta0;
    for (Eigen::Index j = 0; j < spec.sparsity; ++j) theta[j + 1] = 0.5;
    spec.mu1 = spec.mu0 + spec.sigma * theta;
    return spec;
  }
};

enum class Scenario { both_correct, r_correct_only, m_correct_only, both_wrong };

inline Scenario scenario_from_name(std::string_view s) {
  if (s == "both_correct") return Scenario::both_correct;
  if (s == "r_correct_only") return Scenario::r_correct_only;
  if (s == "m_correct_only") return Scenario::m_correct_only;
  if (s == "both_wrong") return Scenario::both_wrong;
  throw std::invalid_argument("unknown scenario: " + std::string(s));
}

inline const char* scenario_name(Scenario s) {
  switch (s) {
    case Scenario::both_correct: return "both_correct";
    case Scenario::r_correct_only: return "r_correct_only";
    case Scenario::m_correct_only: return "m_correct_only";
    case Scenario::both_wrong: return "both_wrong";
  }
  return "?";
}

struct Truth {
  double beta0 = 0.0;
  Eigen::VectorXd gamma0;   // X coefficients of r0 when linear
  double r0_intercept = 0.0;
  std::function<double(const Eigen::VectorXd&)> r0;  // may be empty
  std::function<double(const Eigen::VectorXd&)> m0;  // may be empty
  double sigma2_a_given_x = 1.0;  // Var(A | X, Y=0) when defined
  bool r_linear_correct = true;
  bool m_linear_correct = true;
};

struct SimDraw {
  Dataset data;
  Truth truth;
};

// (A, X') | Y=j ~ Normal(mu_j, Sigma). Implied truths: joint logistic
// coefficients Sigma^{-1}(mu1 - mu0) with intercept
// log(pi/(1-pi)) - (mu1' S^{-1} mu1 - mu0' S^{-1} mu0)/2, and the Gaussian
// conditional mean of A among controls.
inline SimDraw gen_conditional_gaussian(const DgpSpec& spec,
                                        std::uint64_t seed) {
  const Eigen::Index p = spec.p, d = p + 1, n = spec.n;
  if (spec.mu0.size() != d || spec.mu1.size() != d ||
      spec.sigma.rows() != d || spec.sigma.cols() != d)
    throw std::invalid_argument("gen_conditional_gaussian: dimension mismatch");
  if (!(spec.pi_y > 0.0 && spec.pi_y < 1.0))
    throw std::invalid_argument("gen_conditional_gaussian: pi_y outside (0,1)");
  Eigen::LLT<Eigen::MatrixXd> llt(spec.sigma);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("gen_conditional_gaussian: Cholesky failure");
  const Eigen::MatrixXd chol = llt.matrixL();

  auto eng = make_engine(derive_seed(seed, 0x636764ULL));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  SimDraw out;
  out.data.y.resize(n);
  out.data.a.resize(n);
  out.data.x.resize(n, p);
  Eigen::VectorXd zvec(d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double yi = unif(eng) < spec.pi_y ? 1.0 : 0.0;
    for (Eigen::Index j = 0; j < d; ++j) zvec[j] = normal(eng);
    const Eigen::VectorXd draw =
        (yi == 1.0 ? spec.mu1 : spec.mu0) + chol * zvec;
    out.data.y[i] = yi;
    out.data.a[i] = draw[0];
    out.data.x.row(i) = draw.tail(p);
  }

  const Eigen::VectorXd coef = llt.solve(spec.mu1 - spec.mu0);
  Truth& t = out.truth;
  t.beta0 = coef[0];
  t.gamma0 = coef.tail(p);
  t.r0_intercept =
      std::log(spec.pi_y / (1.0 - spec.pi_y)) -
      0.5 * (spec.mu1.dot(llt.solve(spec.mu1)) -
             spec.mu0.dot(llt.solve(spec.mu0)));
  const Eigen::VectorXd gamma0 = t.gamma0;
  const double icpt = t.r0_intercept;
  t.r0 = [gamma0, icpt](const Eigen::VectorXd& x) {
    return icpt + gamma0.dot(x);
  };
  const Eigen::MatrixXd sigma_xx = spec.sigma.bottomRightCorner(p, p);
  const Eigen::VectorXd sigma_ax = spec.sigma.row(0).tail(p);
  const Eigen::VectorXd m_slope = sigma_xx.ldlt().solve(sigma_ax);
  const double m_icpt = spec.mu0[0] - m_slope.dot(spec.mu0.tail(p));
  t.m0 = [m_slope, m_icpt](const Eigen::VectorXd& x) {
    return m_icpt + m_slope.dot(x);
  };
  t.sigma2_a_given_x = spec.sigma(0, 0) - m_slope.dot(sigma_ax);
  t.r_linear_correct = true;
  t.m_linear_correct = true;
  return out;
}

namespace sim_detail {

// Canonical linear coefficients for the misspecification constructions.
inline Eigen::VectorXd alpha_lin(Eigen::Index p) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(p);
  if (p >= 1) v[0] = 0.5;
  if (p >= 2) v[1] = 0.25;
  return v;
}

inline Eigen::VectorXd gamma_lin(Eigen::Index p) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(p);
  if (p >= 1) v[0] = 0.4;
  if (p >= 2) v[1] = -0.4;
  if (p >= 3) v[2] = 0.2;
  return v;
}

}  // namespace sim_detail

// Misspecification scenarios.
//  - r_correct_only: logistic-linear outcome, nonlinear exposure mean.
//  - m_correct_only / both_wrong: the odds-ratio factorization
//    p(A | X, Y=1) proportional to e^{beta0 A} p(A | X, Y=0) keeps the
//    exposure coefficient exactly beta0 while the control exposure mean stays
//    (respectively leaves) linear and r0 picks up the logit of a nonlinear
//    case-probability model.
inline SimDraw gen_misspec(const DgpSpec& spec, Scenario scenario,
                           std::uint64_t seed) {
  if (scenario == Scenario::both_correct &&
      spec.kind == DgpKind::cond_gaussian)
    return gen_conditional_gaussian(spec, seed);

  const Eigen::Index n = spec.n, p = spec.p;
  const double beta0 = spec.beta0;
  const double delta = spec.nonlinear_scale;
  const double sd = spec.noise_sd;
  auto eng = make_engine(derive_seed(seed, 0x6d697373ULL));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  const Eigen::VectorXd a_lin = sim_detail::alpha_lin(p);
  const Eigen::VectorXd g_lin = sim_detail::gamma_lin(p);

  SimDraw out;
  out.data.y.resize(n);
  out.data.a.resize(n);
  out.data.x.resize(n, p);
  Truth& t = out.truth;
  t.beta0 = beta0;
  t.sigma2_a_given_x = sd * sd;

  if (scenario == Scenario::r_correct_only) {
    // A | X has a curved mean; Y | A, X is exactly logistic-linear.
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::VectorXd x(p);
      for (Eigen::Index j = 0; j < p; ++j) x[j] = normal(eng);
      const double m_star =
          a_lin.dot(x) + delta * (x[0] * x[0] - 1.0);
      const double a = m_star + sd * normal(eng);
      const double eta = beta0 * a + g_lin.dot(x);
      out.data.x.row(i) = x;
      out.data.a[i] = a;
      out.data.y[i] = unif(eng) < expit(eta) ? 1.0 : 0.0;
    }
    t.gamma0 = g_lin;
    t.r0_intercept = 0.0;
    t.r0 = [g_lin](const Eigen::VectorXd& x) { return g_lin.dot(x); };
    t.m0 = nullptr;  // E[A | Y=0, X] has no closed form here
    t.r_linear_correct = true;
    t.m_linear_correct = false;
    return out;
  }

  // Odds-ratio factorization kinds.
  const bool nonlinear_q =
      scenario == Scenario::m_correct_only || scenario == Scenario::both_wrong ||
      spec.kind == DgpKind::nonlinear;
  const bool nonlinear_m = scenario == Scenario::both_wrong ||
                           (scenario == Scenario::both_correct &&
                            spec.kind == DgpKind::nonlinear);
  const double shift = beta0 * sd * sd;
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd x(p);
    for (Eigen::Index j = 0; j < p; ++j) x[j] = normal(eng);
    double q_eta = g_lin.dot(x);
    if (nonlinear_q) q_eta += delta * (x[0] * x[0] - 1.0);
    const double yi = unif(eng) < expit(q_eta) ? 1.0 : 0.0;
    double m_ctrl = a_lin.dot(x);
    if (nonlinear_m) m_ctrl += delta * (x[1 % p] * x[1 % p] - 1.0);
    const double a = m_ctrl + yi * shift + sd * normal(eng);
    out.data.x.row(i) = x;
    out.data.a[i] = a;
    out.data.y[i] = yi;
  }
  t.gamma0 = g_lin;
  t.m0 = [a_lin, nonlinear_m, delta, p](const Eigen::VectorXd& x) {
    double m = a_lin.dot(x);
    if (nonlinear_m) m += delta * (x[1 % p] * x[1 % p] - 1.0);
    return m;
  };
  const auto m0 = t.m0;
  t.r0 = [g_lin, nonlinear_q, delta, beta0, m0, shift](
             const Eigen::VectorXd& x) {
    double q_eta = g_lin.dot(x);
    if (nonlinear_q) q_eta += delta * (x[0] * x[0] - 1.0);
    return q_eta - beta0 * m0(x) - 0.5 * beta0 * shift;
  };
  t.r_linear_correct = !nonlinear_q && !nonlinear_m;
  t.m_linear_correct = !nonlinear_m;
  return out;
}

struct BiasDecomposition {
  double delta_m = 0.0;
  double delta_r = 0.0;
  double remainder = 0.0;
  double lhs = 0.0;   // equation value at the estimated nuisances
  double main = 0.0;  // equation value at the reference nuisances
};

// First-order error decomposition of the estimating equation around reference
// nuisances (r_bar, m_bar): lhs = main - delta_m - delta_r + remainder.
inline BiasDecomposition bias_decomposition(const Dataset& data,
                                            const NuisancePredictions& hat,
                                            const NuisancePredictions& bar,
                                            double beta) {
  const Eigen::Index n = data.n();
  if (hat.n() != n || bar.n() != n)
    throw std::invalid_argument("bias_decomposition: length mismatch");
  BiasDecomposition out;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double y = data.y[i], a = data.a[i];
    const double eba = std::exp(std::clamp(-beta * a, -kExpArgMax, kExpArgMax));
    const double er_bar = std::exp(bar.r_hat[i]);
    const double er_hat = std::exp(hat.r_hat[i]);
    out.lhs += (y * eba - (1.0 - y) * er_hat) * (a - hat.m_hat[i]);
    out.main += (y * eba - (1.0 - y) * er_bar) * (a - bar.m_hat[i]);
    out.delta_m += (y * eba - (1.0 - y) * er_bar) * (hat.m_hat[i] - bar.m_hat[i]);
    out.delta_r += (1.0 - y) * er_bar * (hat.r_hat[i] - bar.r_hat[i]) *
                   (a - bar.m_hat[i]);
  }
  const double dn = static_cast<double>(n);
  out.lhs /= dn;
  out.main /= dn;
  out.delta_m /= dn;
  out.delta_r /= dn;
  out.remainder = out.lhs - out.main + out.delta_m + out.delta_r;
  return out;
}

enum class EstimatorKind { lowdim, hd, ml };

struct EstimatorSpec {
  EstimatorKind kind = EstimatorKind::lowdim;
  LinkFunction link = LinkFunction::identity();
  PhiSpec phi;
  HdConfig hd;
  RefitConfig refit;
  std::string learner_name = "ridge";
  std::map<std::string, double> learner_params;
  double level = 0.95;
};

inline EstimateReport run_estimator(const Dataset& data,
                                    const EstimatorSpec& spec,
                                    std::uint64_t seed) {
  switch (spec.kind) {
    case EstimatorKind::lowdim:
      return estimate_lowdim(data, spec.link, spec.phi, spec.level);
    case EstimatorKind::hd:
      return estimate_hd(data, spec.link, spec.hd, spec.phi, spec.level,
                         derive_seed(seed, 0x6864ULL));
    case EstimatorKind::ml: {
      RefitConfig cfg = spec.refit;
      cfg.seed = derive_seed(seed, 0x6d6cULL);
      const auto learner = make_learner(spec.learner_name, spec.learner_params,
                                        derive_seed(seed, 0x6c726eULL));
      return estimate_ml(data, *learner, cfg, spec.phi, spec.level);
    }
  }
  throw std::logic_error("run_estimator: unreachable");
}

struct ScenarioConfig {
  EstimatorSpec estimator;
  Scenario scenario = Scenario::both_correct;
  int replicates = 100;
  std::vector<Eigen::Index> n_grid;  // empty = use dgp.n
  double level = 0.95;
  std::uint64_t seed = 0;
  int threads = 1;
  double max_failure_rate = 0.05;
};

struct MonteCarloResult {
  struct Row {
    Eigen::Index n = 0;
    int replicate = 0;
    double beta_hat = 0.0;
    double se = 0.0;
    bool covered = false;
    bool failed = false;
  };
  struct Summary {
    Eigen::Index n = 0;
    int replicates = 0;
    double beta0 = 0.0;
    double bias = 0.0;
    double mc_sd = 0.0;
    double mean_se = 0.0;
    double coverage = 0.0;
    double failure_rate = 0.0;
  };
  std::vector<Row> rows;
  std::vector<Summary> summaries;
};

// Replicates are seeded by (seed, n, replicate), run independently (possibly
// in parallel) and reduced in replicate order, so results do not depend on
// the thread count.
inline MonteCarloResult run_monte_carlo(const ScenarioConfig& cfg,
                                        const DgpSpec& dgp) {
  if (cfg.replicates < 1)
    throw std::invalid_argument("run_monte_carlo: replicates < 1");
  std::vector<Eigen::Index> n_grid =
      cfg.n_grid.empty() ? std::vector<Eigen::Index>{dgp.n} : cfg.n_grid;
  MonteCarloResult result;
  for (const Eigen::Index n : n_grid) {
    DgpSpec spec_n = dgp;
    spec_n.n = n;
    std::vector<MonteCarloResult::Row> rows(
        static_cast<std::size_t>(cfg.replicates));
    std::vector<double> beta0s(static_cast<std::size_t>(cfg.replicates), 0.0);
    parallel_for(cfg.threads, rows.size(), [&](std::size_t rep) {
      const std::uint64_t rep_seed =
          derive_seed(cfg.seed, static_cast<std::uint64_t>(n),
                      static_cast<std::uint64_t>(rep));
      MonteCarloResult::Row row;
      row.n = n;
      row.replicate = static_cast<int>(rep);
      try {
        EstimatorSpec est = cfg.estimator;
        est.level = cfg.level;
        const SimDraw draw = gen_misspec(spec_n, cfg.scenario, rep_seed);
        const EstimateReport rep_report =
            run_estimator(draw.data, est, derive_seed(rep_seed, 0x657374ULL));
        row.beta_hat = rep_report.beta_hat;
        row.se = rep_report.se;
        row.covered = rep_report.ci_lower <= draw.truth.beta0 &&
                      draw.truth.beta0 <= rep_report.ci_upper;
        beta0s[rep] = draw.truth.beta0;
      } catch (const std::exception&) {
        row.failed = true;
      }
      rows[rep] = row;
    });

    MonteCarloResult::Summary sum;
    sum.n = n;
    sum.replicates = cfg.replicates;
    double mean = 0.0, mean_se = 0.0, cov = 0.0, beta0 = 0.0;
    int ok = 0, failures = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].failed) {
        ++failures;
        continue;
      }
      mean += rows[i].beta_hat;
      mean_se += rows[i].se;
      cov += rows[i].covered ? 1.0 : 0.0;
      beta0 += beta0s[i];
      ++ok;
    }
    sum.failure_rate =
        static_cast<double>(failures) / static_cast<double>(cfg.replicates);
    if (sum.failure_rate > cfg.max_failure_rate)
      throw std::runtime_error("run_monte_carlo: replicate failure rate above threshold");
    mean /= ok;
    sum.beta0 = beta0 / ok;
    sum.bias = mean - sum.beta0;
    sum.mean_se = mean_se / ok;
    sum.coverage = cov / ok;
    double ss = 0.0;
    for (const auto& row : rows)
      if (!row.failed) ss += (row.beta_hat - mean) * (row.beta_hat - mean);
    sum.mc_sd = std::sqrt(ss / std::max(1, ok - 1));
    result.summaries.push_back(sum);
    for (auto& row : rows) result.rows.push_back(row);
  }
  return result;
}

}  // namespace drlogit
