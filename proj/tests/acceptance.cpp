// Acceptance suite: end-to-end statistical and numerical checks for the
// library and CLI. Each criterion prints exactly one PASS/FAIL line; the
// process exits with the number of failed criteria. Tolerances and runtime
// budgets are pinned below next to each criterion.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "drlogit/drlogit.hpp"

using namespace drlogit;
namespace fs = std::filesystem;

namespace {

struct Criterion {
  std::vector<std::string> failures;

  void require(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
  template <typename T>
  void require_close(T value, T target, T tol, const std::string& what) {
    if (!(std::abs(value - target) <= tol)) {
      std::ostringstream ss;
      ss << what << " (got " << value << ", want " << target << " +- " << tol
         << ")";
      failures.push_back(ss.str());
    }
  }
};

int g_failed = 0;

void run_criterion(int number, const std::string& title, double budget_seconds,
                   const std::function<void(Criterion&)>& body) {
  Criterion c;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(c);
  } catch (const std::exception& e) {
    c.failures.push_back(std::string("exception: ") + e.what());
  }
  const double dt =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  if (budget_seconds > 0.0 && dt > budget_seconds) {
    std::ostringstream ss;
    ss << "runtime " << dt << " s exceeds budget " << budget_seconds << " s";
    c.failures.push_back(ss.str());
  }
  std::ostringstream line;
  line << "criterion " << number << " [" << title << "]: ";
  if (c.failures.empty()) {
    line << "PASS";
  } else {
    ++g_failed;
    line << "FAIL";
    for (const auto& f : c.failures) line << "; " << f;
  }
  line << " (" << dt << " s)";
  std::cout << line.str() << std::endl;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (const double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v) {
  const double m = mean_of(v);
  double ss = 0.0;
  for (const double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

// Conditional-Gaussian spec with a mild exposure signal, so that
// linear-probability learners keep their fitted case probabilities in (0, 1).
DgpSpec mild_gaussian_spec(Eigen::Index n, Eigen::Index p, double beta0) {
  auto spec = DgpSpec::canonical(n, p, beta0, 2);
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(p + 1);
  theta[0] = beta0;
  theta[1] = 0.25;
  theta[2] = 0.25;
  spec.mu1 = spec.mu0 + spec.sigma * theta;
  return spec;
}

// ---------------------------------------------------------------------------
// Criterion 1. On 1e5 oracle draws the objective
//   Q(beta) = mean[(logit M_i - beta (A_i - E[A|X_i]))^2]
// is minimized within 3 Monte Carlo standard errors of beta0, and the fitted
// quadratic's curvature equals 2 Var(A - E[A|X]) within 5%. The curvature
// reference is computed from the conditional-variance formula of the mixture,
// independently of the residuals entering Q.
void criterion1(Criterion& c) {
  const Eigen::Index n = 100000, p = 4;
  const double beta0 = 0.5;
  const auto spec = DgpSpec::canonical(n, p, beta0, 2);
  const auto draw = gen_conditional_gaussian(spec, 1001);

  // Mixture oracle for E[A | X] and Var(A | X).
  const Eigen::MatrixXd sigma_xx = spec.sigma.bottomRightCorner(p, p);
  const Eigen::VectorXd sigma_ax = spec.sigma.row(0).tail(p);
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(sigma_xx);
  const Eigen::VectorXd slope = ldlt.solve(sigma_ax);
  const double cond_var = spec.sigma(0, 0) - slope.dot(sigma_ax);
  const Eigen::VectorXd mu0x = spec.mu0.tail(p), mu1x = spec.mu1.tail(p);
  const Eigen::VectorXd disc_w = ldlt.solve(mu1x - mu0x);
  const double disc_b = -0.5 * (mu1x + mu0x).dot(disc_w) +
                        std::log(spec.pi_y / (1.0 - spec.pi_y));

  std::vector<double> resid(static_cast<std::size_t>(n)),
      w(static_cast<std::size_t>(n));
  double mean_cond_var = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd x = draw.data.x.row(i).transpose();
    const double p1 = expit(disc_w.dot(x) + disc_b);
    const double ea0 = spec.mu0[0] + slope.dot(x - mu0x);
    const double ea1 = spec.mu1[0] + slope.dot(x - mu1x);
    const double ea = p1 * ea1 + (1.0 - p1) * ea0;
    resid[static_cast<std::size_t>(i)] = draw.data.a[i] - ea;
    w[static_cast<std::size_t>(i)] =
        draw.truth.beta0 * draw.data.a[i] + draw.truth.r0(x);
    mean_cond_var += p1 * (1.0 - p1) * (ea1 - ea0) * (ea1 - ea0) + cond_var;
  }
  mean_cond_var /= static_cast<double>(n);

  // Least-squares quadratic over a beta grid.
  const int grid = 21;
  Eigen::MatrixXd design(grid, 3);
  Eigen::VectorXd qvals(grid);
  for (int g = 0; g < grid; ++g) {
    const double b = beta0 - 1.0 + 2.0 * g / (grid - 1);
    double q = 0.0;
    for (std::size_t i = 0; i < resid.size(); ++i) {
      const double d = w[i] - b * resid[i];
      q += d * d;
    }
    design(g, 0) = 1.0;
    design(g, 1) = b;
    design(g, 2) = b * b;
    qvals[g] = q / static_cast<double>(n);
  }
  const Eigen::VectorXd coef =
      (design.transpose() * design).ldlt().solve(design.transpose() * qvals);
  const double minimizer = -coef[1] / (2.0 * coef[2]);
  const double curvature = 2.0 * coef[2];

  // Standard error of the regression slope of W on resid.
  double srr = 0.0, swr = 0.0;
  for (std::size_t i = 0; i < resid.size(); ++i) {
    srr += resid[i] * resid[i];
    swr += w[i] * resid[i];
  }
  srr /= static_cast<double>(n);
  const double slope_hat = swr / static_cast<double>(n) / srr;
  std::vector<double> psi(resid.size());
  for (std::size_t i = 0; i < resid.size(); ++i)
    psi[i] = resid[i] * (w[i] - slope_hat * resid[i]) / srr;
  const double mc_se = sd_of(psi) / std::sqrt(static_cast<double>(n));

  c.require_close(minimizer, beta0, 3.0 * mc_se,
                  "objective minimizer off beta0");
  c.require_close(curvature, 2.0 * mean_cond_var, 0.05 * 2.0 * mean_cond_var,
                  "quadratic curvature off 2 Var(A - E[A|X])");
}

// ---------------------------------------------------------------------------
// Criterion 2. Error decomposition identity on 100 random datasets (n <= 200):
// the equation value at estimated nuisances equals
// main - delta_m - delta_r + remainder to 1e-10, and the remainder matches an
// independently derived closed form to 1e-10.
void criterion2(Criterion& c) {
  std::mt19937_64 eng(2002);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<int> nsize(50, 200);
  std::uniform_real_distribution<double> ub(-1.0, 1.0);
  double worst_identity = 0.0, worst_remainder = 0.0;
  for (int t = 0; t < 100; ++t) {
    const Eigen::Index n = nsize(eng);
    auto spec = DgpSpec::canonical(n, 3, 0.4);
    const auto draw = gen_conditional_gaussian(spec, 2000 + t);
    const double beta = ub(eng);
    Eigen::VectorXd r_bar(n), m_bar(n), r_hat(n), m_hat(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::VectorXd x = draw.data.x.row(i).transpose();
      r_bar[i] = draw.truth.r0(x);
      m_bar[i] = draw.truth.m0(x);
      r_hat[i] = r_bar[i] + 0.3 * normal(eng);
      m_hat[i] = m_bar[i] + 0.3 * normal(eng);
    }
    const auto hat = NuisancePredictions::make(r_hat, m_hat);
    const auto bar = NuisancePredictions::make(r_bar, m_bar);
    const auto dec = bias_decomposition(draw.data, hat, bar, beta);
    worst_identity = std::max(
        worst_identity, std::abs(dec.lhs - (dec.main - dec.delta_m -
                                            dec.delta_r + dec.remainder)));

    // Independent remainder: collecting the exact cancellation terms gives
    //   mean[ (1-Y)(e^{r_hat}-e^{r_bar})(m_hat-m_bar)
    //        - (1-Y)(e^{r_hat}-e^{r_bar}-e^{r_bar}(r_hat-r_bar))(A-m_bar) ].
    double rem = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double cy = 1.0 - draw.data.y[i];
      const double eh = std::exp(hat.r_hat[i]);
      const double eb = std::exp(bar.r_hat[i]);
      rem += cy * (eh - eb) * (hat.m_hat[i] - bar.m_hat[i]) -
             cy * (eh - eb - eb * (hat.r_hat[i] - bar.r_hat[i])) *
                 (draw.data.a[i] - bar.m_hat[i]);
    }
    rem /= static_cast<double>(n);
    worst_remainder = std::max(worst_remainder, std::abs(dec.remainder - rem));
  }
  c.require(worst_identity <= 1e-10, "decomposition identity beyond 1e-10");
  c.require(worst_remainder <= 1e-10,
            "remainder disagrees with its closed form beyond 1e-10");
}

// ---------------------------------------------------------------------------
// Criterion 3. Parametric double robustness: n=1000, p=5, 500 replicates for
// both_correct / r_correct_only / m_correct_only; |mean bias| <= 3 MC-se of
// the mean and coverage in [0.92, 0.98].
void criterion3(Criterion& c) {
  for (const Scenario sc : {Scenario::both_correct, Scenario::r_correct_only,
                            Scenario::m_correct_only}) {
    ScenarioConfig cfg;
    cfg.estimator.kind = EstimatorKind::lowdim;
    cfg.scenario = sc;
    cfg.replicates = 500;
    cfg.seed = 3003;
    cfg.threads = 1;
    const DgpSpec dgp = DgpSpec::canonical(1000, 5, 0.5);
    const auto res = run_monte_carlo(cfg, dgp);
    const auto& s = res.summaries.front();
    const double se_of_mean = s.mc_sd / std::sqrt(500.0);
    const std::string tag = scenario_name(sc);
    c.require(std::abs(s.bias) <= 3.0 * se_of_mean,
              tag + ": |mean bias| " + std::to_string(std::abs(s.bias)) +
                  " > 3 MC-se " + std::to_string(3.0 * se_of_mean));
    c.require(s.coverage >= 0.92 && s.coverage <= 0.98,
              tag + ": coverage " + std::to_string(s.coverage) +
                  " outside [0.92, 0.98]");
  }
}

// ---------------------------------------------------------------------------
// Criterion 4. Sparse high-dimensional regime: n=500, p=1000, s=3, 300
// replicates for both_correct / r_correct_only / m_correct_only; coverage in
// [0.90, 0.98] and every fitted coefficient vector within 1e-6 of its
// max-norm feasibility bound (diagnostic slack >= -1e-6).
void criterion4(Criterion& c) {
  const int reps = 300;
  for (const Scenario sc : {Scenario::both_correct, Scenario::r_correct_only,
                            Scenario::m_correct_only}) {
    // Weak-signal sparse design: support coefficients 0.1 and a mild
    // nonlinearity keep the l1-shrinkage bias small relative to the sampling
    // noise, so nominal coverage is attainable at n=500, p=1000.
    DgpSpec spec = DgpSpec::canonical(500, 1000, 0.5, 3);
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(spec.p + 1);
    theta[0] = spec.beta0;
    for (int j = 0; j < 3; ++j) theta[j + 1] = 0.1;
    spec.mu1 = spec.mu0 + spec.sigma * theta;
    spec.nonlinear_scale = 0.3;
    int cover = 0, ok = 0;
    double min_slack = 0.0;
    std::vector<std::string> errors;
    for (int r = 0; r < reps; ++r) {
      const std::uint64_t seed =
          derive_seed(4004, static_cast<std::uint64_t>(sc),
                      static_cast<std::uint64_t>(r));
      const auto draw = gen_misspec(spec, sc, seed);
      try {
        const auto rep =
            estimate_hd(draw.data, LinkFunction::identity(), HdConfig{},
                        PhiSpec{}, 0.95, derive_seed(seed, 0x686474ULL));
        ++ok;
        cover += (rep.ci_lower <= draw.truth.beta0 &&
                  draw.truth.beta0 <= rep.ci_upper);
        min_slack = std::min({min_slack, rep.diagnostics.at("alpha_slack"),
                              rep.diagnostics.at("gamma_slack")});
      } catch (const std::exception& e) {
        if (errors.size() < 3) errors.emplace_back(e.what());
      }
    }
    const std::string tag = scenario_name(sc);
    c.require(ok >= reps * 95 / 100,
              tag + ": " + std::to_string(reps - ok) + " replicates failed" +
                  (errors.empty() ? "" : " (" + errors.front() + ")"));
    const double coverage = static_cast<double>(cover) / std::max(ok, 1);
    c.require(coverage >= 0.90 && coverage <= 0.98,
              tag + ": coverage " + std::to_string(coverage) +
                  " outside [0.90, 0.98]");
    c.require(min_slack >= -1e-6,
              tag + ": feasibility slack " + std::to_string(min_slack) +
                  " below -1e-6");
  }
}

// ---------------------------------------------------------------------------
// Criterion 5. Cross-fitted blackbox regime. Ridge learners on a
// conditional-Gaussian DGP, n=2000, 300 replicates: coverage in [0.91, 0.98].
// Forest learners on the nonlinear DGP: |mean bias| at n=4000 below its value
// at n=1000.
void criterion5(Criterion& c) {
  {
    ScenarioConfig cfg;
    cfg.estimator.kind = EstimatorKind::ml;
    cfg.estimator.learner_name = "ridge";
    cfg.estimator.learner_params = {{"lambda", 1e-4}};
    cfg.replicates = 300;
    cfg.seed = 5005;
    cfg.threads = 1;
    const DgpSpec dgp = mild_gaussian_spec(2000, 3, 0.3);
    const auto res = run_monte_carlo(cfg, dgp);
    const double coverage = res.summaries.front().coverage;
    c.require(coverage >= 0.91 && coverage <= 0.98,
              "ridge coverage " + std::to_string(coverage) +
                  " outside [0.91, 0.98]");
  }
  {
    ScenarioConfig cfg;
    cfg.estimator.kind = EstimatorKind::ml;
    cfg.estimator.learner_name = "forest";
    // Depth 12 lets additional data keep sharpening the fit (a shallow
    // forest's approximation bias plateaus in n); min_leaf 15 tames the
    // variance of the deep trees. nonlinear_scale 1.0 makes the n=1000
    // smoothing bias large enough to measure against the Monte Carlo noise.
    cfg.estimator.learner_params = {
        {"trees", 40}, {"max_depth", 12}, {"min_leaf", 15}};
    cfg.replicates = 40;
    cfg.seed = 5006;
    cfg.threads = 1;
    cfg.n_grid = {1000, 4000};
    DgpSpec dgp;
    dgp.kind = DgpKind::nonlinear;
    dgp.p = 3;
    dgp.beta0 = 0.5;
    dgp.nonlinear_scale = 1.0;
    const auto res = run_monte_carlo(cfg, dgp);
    const double bias_small = std::abs(res.summaries[0].bias);
    const double bias_large = std::abs(res.summaries[1].bias);
    c.require(bias_large < bias_small,
              "forest |mean bias| did not shrink: n=1000 gives " +
                  std::to_string(bias_small) + ", n=4000 gives " +
                  std::to_string(bias_large));
  }
}

// ---------------------------------------------------------------------------
// Criterion 6. Oracle equivalences: the scalar root finder vs a grid-scan +
// bisection oracle (1e-8, 50 instances); near-zero-penalty sparse fits vs
// MLE / weighted-least-squares closed forms (1e-4); Gauss-Hermite optimal
// weights vs dense Simpson integration (1e-6 relative).
void criterion6(Criterion& c) {
  // Root finder vs independent bisection.
  std::mt19937_64 eng(6006);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  int checked = 0;
  double worst = 0.0;
  for (int t = 0; t < 100 && checked < 50; ++t) {
    const Eigen::Index n = 60;
    Dataset d;
    d.y.resize(n);
    d.a.resize(n);
    d.x.resize(n, 0);
    Eigen::VectorXd r(n), m(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      d.y[i] = unif(eng) < 0.5 ? 1.0 : 0.0;
      d.a[i] = normal(eng);
      r[i] = 0.5 * normal(eng);
      m[i] = 0.3 * normal(eng);
    }
    auto f = [&](double beta) {
      double s = 0.0;
      for (Eigen::Index i = 0; i < n; ++i)
        s += (d.y[i] * std::exp(-beta * d.a[i]) -
              (1.0 - d.y[i]) * std::exp(r[i])) *
             (d.a[i] - m[i]);
      return s / static_cast<double>(n);
    };
    double lo = -10.0, hi = lo;
    bool found = false;
    double prev = f(lo);
    for (double b = -10.0 + 0.01; b <= 10.0; b += 0.01) {
      const double v = f(b);
      if (prev * v <= 0.0) {
        lo = b - 0.01;
        hi = b;
        found = true;
        break;
      }
      prev = v;
    }
    if (!found) continue;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (f(lo) * f(mid) <= 0.0)
        hi = mid;
      else
        lo = mid;
    }
    const double oracle = 0.5 * (lo + hi);
    const auto sol = solve_beta(d, NuisancePredictions::make(r, m));
    if (!sol.converged) continue;
    ++checked;
    worst = std::max(worst, std::abs(sol.beta_hat - oracle));
  }
  c.require(checked >= 50, "fewer than 50 bracketed root instances");
  c.require(worst <= 1e-8, "root finder off its grid oracle by " +
                               std::to_string(worst));

  // Vanishing penalty vs MLE.
  {
    const auto spec = DgpSpec::canonical(400, 3, 0.5);
    const auto draw = gen_conditional_gaussian(spec, 6007);
    HdConfig cfg;
    cfg.lambda_init = 1e-6;
    const auto init = fit_gamma_initial(draw.data, cfg);
    const auto mle = fit_gamma_mle(draw.data);
    double diff = std::abs(init.beta_tilde - mle.beta_init);
    for (Eigen::Index j = 0; j < 4; ++j)
      diff = std::max(diff, std::abs(init.gamma_tilde[j] - mle.gamma[j]));
    c.require(diff <= 1e-4, "penalized logistic fit off the MLE by " +
                                std::to_string(diff));

    // Vanishing penalty vs weighted least squares on the control rows.
    const auto alpha = fit_alpha_dantzig(draw.data, init.gamma_tilde,
                                         LinkFunction::identity(), 1e-6);
    const Eigen::Index n = draw.data.n();
    Eigen::MatrixXd z(n, 4);
    z.col(0).setOnes();
    z.rightCols(3) = draw.data.x;
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      double eta = init.gamma_tilde[0];
      for (Eigen::Index j = 0; j < 3; ++j)
        eta += init.gamma_tilde[j + 1] * draw.data.x(i, j);
      v[i] = (1.0 - draw.data.y[i]) * std::exp(std::clamp(eta, -30.0, 30.0));
    }
    const Eigen::MatrixXd zv = v.asDiagonal() * z;
    const Eigen::VectorXd wls =
        (z.transpose() * zv).ldlt().solve(zv.transpose() * draw.data.a);
    double adiff = 0.0;
    for (Eigen::Index j = 0; j < 4; ++j)
      adiff = std::max(adiff, std::abs(alpha[j] - wls[j]));
    c.require(adiff <= 1e-4, "penalized exposure fit off weighted LS by " +
                                 std::to_string(adiff));
  }

  // Gauss-Hermite vs dense Simpson integration.
  {
    const auto gh = GaussHermite::make(40);
    double worst_rel = 0.0;
    for (const auto& [m_val, r_val, beta, s2] :
         {std::tuple{0.0, 0.2, 0.5, 1.0}, std::tuple{1.0, -0.5, 0.3, 0.5},
          std::tuple{-0.7, 0.8, -0.6, 1.5}}) {
      const double sd = std::sqrt(s2);
      auto dense = [&](auto&& f) {
        const int pts = 200001;
        const double lo = m_val - 12.0 * sd, hi = m_val + 12.0 * sd;
        const double h = (hi - lo) / (pts - 1);
        double s = 0.0;
        for (int i = 0; i < pts; ++i) {
          const double a = lo + i * h;
          const double dev = (a - m_val) / sd;
          const double dens = std::exp(-0.5 * dev * dev) /
                              (sd * std::sqrt(2.0 * M_PI));
          const double wgt = (i == 0 || i == pts - 1) ? 1.0
                             : (i % 2 == 1)           ? 4.0
                                                      : 2.0;
          s += wgt * f(a) * dens;
        }
        return s * h / 3.0;
      };
      const double num =
          dense([&](double a) { return (a - m_val) * (a - m_val); });
      const double den = dense([&](double a) {
        return (a - m_val) * (a - m_val) / expit(beta * a + r_val);
      });
      const double reference = num / den;
      const double value = phi_opt_gaussian(m_val, r_val, beta, s2, gh);
      worst_rel = std::max(worst_rel,
                           std::abs(value - reference) / std::abs(reference));
    }
    c.require(worst_rel <= 1e-6,
              "Gauss-Hermite optimal weight off dense integration by rel " +
                  std::to_string(worst_rel));
  }
}

// ---------------------------------------------------------------------------
// Criterion 7. Efficiency ordering: MC variance with the optimal weight at
// most 1.05x the unweighted variance on the both-correct DGP, 500 replicates.
void criterion7(Criterion& c) {
  auto variance_for = [&](PhiKind kind) {
    ScenarioConfig cfg;
    cfg.estimator.kind = EstimatorKind::lowdim;
    cfg.estimator.phi.kind = kind;
    cfg.replicates = 500;
    cfg.seed = 7007;
    cfg.threads = 1;
    const DgpSpec dgp = DgpSpec::canonical(1000, 3, 0.5);
    const auto res = run_monte_carlo(cfg, dgp);
    const double sd = res.summaries.front().mc_sd;
    return sd * sd;
  };
  const double var_none = variance_for(PhiKind::none);
  const double var_opt = variance_for(PhiKind::opt);
  c.require(var_opt <= 1.05 * var_none,
            "Var(optimal weight) " + std::to_string(var_opt) + " > 1.05 x " +
                std::to_string(var_none));
}

// ---------------------------------------------------------------------------
// Criterion 8. Root-n rate: the log-log slope of MC-sd against
// n in {500, 2000, 8000} lies in [-0.625, -0.375].
void criterion8(Criterion& c) {
  ScenarioConfig cfg;
  cfg.estimator.kind = EstimatorKind::lowdim;
  cfg.replicates = 200;
  cfg.seed = 8008;
  cfg.threads = 1;
  cfg.n_grid = {500, 2000, 8000};
  const DgpSpec dgp = DgpSpec::canonical(500, 3, 0.5);
  const auto res = run_monte_carlo(cfg, dgp);
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const auto& s : res.summaries) {
    const double lx = std::log(static_cast<double>(s.n));
    const double ly = std::log(s.mc_sd);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double k = 3.0;
  const double slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
  c.require(slope >= -0.625 && slope <= -0.375,
            "log-log MC-sd slope " + std::to_string(slope) +
                " outside [-0.625, -0.375]");
}

// ---------------------------------------------------------------------------
// Criterion 9. Determinism: fixed-seed CLI runs are byte-identical across
// repeats and thread counts.
std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return "<unreadable:" + p.string() + ">";
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void criterion9(Criterion& c) {
  const fs::path dir =
      fs::temp_directory_path() / ("drlogit_accept_" + std::to_string(getpid()));
  fs::create_directories(dir);
  auto shell = [&](const std::string& args) {
    const std::string cmd =
        std::string(DRLOGIT_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    return WEXITSTATUS(std::system(cmd.c_str()));
  };

  const auto spec = DgpSpec::canonical(400, 3, 0.5);
  const auto draw = gen_conditional_gaussian(spec, 9009);
  const fs::path csv = dir / "data.csv";
  write_csv_dataset(draw.data, csv.string());

  const fs::path f1 = dir / "f1.json", f2 = dir / "f2.json";
  const std::string fit_args =
      "fit --data " + csv.string() + " --method hd --seed 17 --out ";
  c.require(shell(fit_args + f1.string()) == 0, "first hd fit failed");
  c.require(shell(fit_args + f2.string()) == 0, "second hd fit failed");
  c.require(slurp(f1) == slurp(f2), "repeated hd fit outputs differ");

  const std::string sim_args =
      "simulate --method lowdim --reps 8 --n 300 --p 3 --seed 23 --out ";
  const fs::path s1 = dir / "s1", s2 = dir / "s2", s3 = dir / "s3";
  c.require(shell(sim_args + s1.string() + " --threads 1") == 0,
            "simulate (1 thread) failed");
  c.require(shell(sim_args + s2.string() + " --threads 4") == 0,
            "simulate (4 threads) failed");
  c.require(shell(sim_args + s3.string() + " --threads 1") == 0,
            "simulate repeat failed");
  for (const char* ext : {".csv", ".json"}) {
    c.require(slurp(s1.string() + ext) == slurp(s2.string() + ext),
              std::string("simulate ") + ext + " differs across thread counts");
    c.require(slurp(s1.string() + ext) == slurp(s3.string() + ext),
              std::string("simulate ") + ext + " differs across repeats");
  }
  std::error_code ec;
  fs::remove_all(dir, ec);
}

}  // namespace

int main() {
  run_criterion(1, "population objective minimizer and curvature", 30.0,
                criterion1);
  run_criterion(2, "error decomposition identity", 5.0, criterion2);
  run_criterion(3, "parametric double robustness", 300.0, criterion3);
  run_criterion(4, "sparse high-dimensional coverage and feasibility", 1800.0,
                criterion4);
  run_criterion(5, "cross-fitted blackbox coverage and bias decay", 2700.0,
                criterion5);
  run_criterion(6, "oracle equivalences", 0.0, criterion6);
  run_criterion(7, "efficiency ordering of the optimal weight", 0.0,
                criterion7);
  run_criterion(8, "root-n Monte Carlo rate", 0.0, criterion8);
  run_criterion(9, "byte-identical determinism", 0.0, criterion9);
  std::cout << (g_failed == 0 ? "all criteria passed"
                              : std::to_string(g_failed) + " criteria failed")
            << std::endl;
  return g_failed;
}
