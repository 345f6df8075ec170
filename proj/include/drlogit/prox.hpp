#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace drlogit {

struct ProxResult {
  Eigen::VectorXd coef;
  int iters = 0;
  bool converged = false;
  double objective = 0.0;
};

// Subgradient tolerance matched to the penalty level, floored so tiny
// penalties do not demand more precision than doubles can deliver.
inline double kkt_tolerance(double lambda) {
  return std::clamp(lambda * 5e-7, 1e-10, 1e-7);
}

namespace prox_detail {

inline Eigen::VectorXd soft_threshold(const Eigen::VectorXd& v,
                                      const Eigen::VectorXd& thresh) {
  Eigen::VectorXd out(v.size());
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    const double t = thresh[j];
    if (v[j] > t)
      out[j] = v[j] - t;
    else if (v[j] < -t)
      out[j] = v[j] + t;
    else
      out[j] = 0.0;
  }
  return out;
}

}  // namespace prox_detail

// FISTA with backtracking and objective-restart for
//   min_x  loss(x) + lambda * sum_j penalty_weight_j |x_j|.
// Loss must provide: double value(const VectorXd&) and
// void gradient(const VectorXd&, VectorXd&). penalty_weight_j = 0 leaves a
// coordinate unpenalized. Convergence: |obj_t - obj_{t-1}| <= tol_obj.
template <typename Loss>
ProxResult fista(const Loss& loss, double lambda,
                 const Eigen::VectorXd& penalty_weights, Eigen::VectorXd init,
                 int max_iter = 5000, double tol_obj = 1e-9) {
  const Eigen::Index q = init.size();
  if (penalty_weights.size() != q)
    throw std::invalid_argument("fista: penalty weight size mismatch");
  const Eigen::VectorXd thresh_base = lambda * penalty_weights;

  auto penalty = [&](const Eigen::VectorXd& x) {
    return thresh_base.dot(x.cwiseAbs());
  };

  Eigen::VectorXd x = std::move(init);
  Eigen::VectorXd z = x;  // momentum point
  double t_mom = 1.0;
  double step = 1.0;
  double fx = loss.value(x);
  double obj = fx + penalty(x);
  Eigen::VectorXd grad(q), x_new(q);

  ProxResult out;
  for (int it = 0; it < max_iter; ++it) {
    out.iters = it + 1;
    const double fz = loss.value(z);
    loss.gradient(z, grad);
    // Backtracking on the majorizer at z.
    double f_new = 0.0;
    for (int bt = 0;; ++bt) {
      x_new = prox_detail::soft_threshold(z - step * grad, step * thresh_base);
      const Eigen::VectorXd diff = x_new - z;
      f_new = loss.value(x_new);
      if (f_new <= fz + grad.dot(diff) + diff.squaredNorm() / (2.0 * step) +
                       1e-12 * std::abs(fz))
        break;
      step *= 0.5;
      if (bt > 60) throw std::runtime_error("fista: backtracking failed");
    }
    const double obj_new = f_new + penalty(x_new);
    if (obj_new > obj) {
      // Restart momentum from the best iterate.
      z = x;
      t_mom = 1.0;
      if (std::abs(obj_new - obj) <= tol_obj) {
        out.converged = true;
        break;
      }
      continue;
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_mom * t_mom));
    z = x_new + ((t_mom - 1.0) / t_next) * (x_new - x);
    const double delta = obj - obj_new;
    x = x_new;
    obj = obj_new;
    t_mom = t_next;
    step *= 1.1;  // allow the step to grow back after backtracking
    if (delta <= tol_obj) {
      out.converged = true;
      break;
    }
  }
  out.coef = std::move(x);
  out.objective = obj;
  return out;
}

// Max KKT violation of the l1-penalized problem at x: for x_j = 0 the
// subgradient condition is |grad_j| <= lambda w_j, otherwise
// grad_j = -lambda w_j sign(x_j).
template <typename Loss>
double kkt_violation(const Loss& loss, double lambda,
                     const Eigen::VectorXd& penalty_weights,
                     const Eigen::VectorXd& x) {
  Eigen::VectorXd grad(x.size());
  loss.gradient(x, grad);
  double worst = 0.0;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double lw = lambda * penalty_weights[j];
    const double v = x[j] == 0.0
                         ? std::max(0.0, std::abs(grad[j]) - lw)
                         : std::abs(grad[j] + lw * (x[j] > 0.0 ? 1.0 : -1.0));
    worst = std::max(worst, v);
  }
  return worst;
}

// Active-set Newton refinement. FISTA alone stalls once objective decrements
// hit machine precision, while the stationarity system on the (sparse) active
// set is smooth and can be driven to near machine precision. The Hessian over
// the active coordinates is built by finite differences of the gradient.
template <typename Loss>
bool newton_polish(const Loss& loss, double lambda,
                   const Eigen::VectorXd& penalty_weights, Eigen::VectorXd& x,
                   double tol_kkt, int max_iter = 30) {
  const Eigen::Index q = x.size();
  Eigen::VectorXd grad(q), gpert(q);
  for (int it = 0; it < max_iter; ++it) {
    loss.gradient(x, grad);
    std::vector<Eigen::Index> act;
    Eigen::VectorXd sign = Eigen::VectorXd::Zero(q);
    double viol = 0.0;
    for (Eigen::Index j = 0; j < q; ++j) {
      const double lw = lambda * penalty_weights[j];
      if (x[j] != 0.0 || lw == 0.0) {
        act.push_back(j);
        sign[j] = x[j] > 0.0 ? 1.0 : (x[j] < 0.0 ? -1.0 : 0.0);
        viol = std::max(viol, std::abs(grad[j] + lw * sign[j]));
      } else {
        const double v = std::abs(grad[j]) - lw;
        viol = std::max(viol, std::max(0.0, v));
        if (v > tol_kkt) {
          // A zero coordinate whose subgradient condition fails must enter.
          act.push_back(j);
          sign[j] = grad[j] > 0.0 ? -1.0 : 1.0;
        }
      }
    }
    if (viol <= tol_kkt) return true;

    const Eigen::Index m = static_cast<Eigen::Index>(act.size());
    Eigen::MatrixXd hess(m, m);
    Eigen::VectorXd g(m);
    for (Eigen::Index c = 0; c < m; ++c) {
      const Eigen::Index j = act[static_cast<std::size_t>(c)];
      const double eps = 1e-7 * (1.0 + std::abs(x[j]));
      Eigen::VectorXd xp = x;
      xp[j] += eps;
      loss.gradient(xp, gpert);
      for (Eigen::Index r = 0; r < m; ++r)
        hess(r, c) =
            (gpert[act[static_cast<std::size_t>(r)]] -
             grad[act[static_cast<std::size_t>(r)]]) / eps;
      g[c] = grad[j] + lambda * penalty_weights[j] * sign[j];
    }
    hess = 0.5 * (hess + hess.transpose()).eval();
    hess.diagonal().array() += 1e-12;
    const Eigen::VectorXd step = hess.ldlt().solve(g);

    // Damped update; a penalized coordinate crossing zero is pinned there.
    double t = 1.0;
    bool improved = false;
    for (int half = 0; half < 25; ++half) {
      Eigen::VectorXd cand = x;
      for (Eigen::Index r = 0; r < m; ++r) {
        const Eigen::Index j = act[static_cast<std::size_t>(r)];
        cand[j] -= t * step[r];
        if (penalty_weights[j] > 0.0 && sign[j] != 0.0 &&
            cand[j] * sign[j] < 0.0)
          cand[j] = 0.0;
      }
      if (kkt_violation(loss, lambda, penalty_weights, cand) < viol) {
        x = std::move(cand);
        improved = true;
        break;
      }
      t *= 0.5;
    }
    if (!improved) return false;
  }
  return kkt_violation(loss, lambda, penalty_weights, x) <= tol_kkt;
}

// l1 solver used throughout: FISTA passes for global progress, interleaved
// with active-set Newton polish to certify the subgradient conditions.
template <typename Loss>
ProxResult fista_kkt(const Loss& loss, double lambda,
                     const Eigen::VectorXd& penalty_weights,
                     Eigen::VectorXd init, int max_iter = 5000,
                     double tol_obj = 1e-9, double tol_kkt = 1e-7,
                     int max_rounds = 3) {
  ProxResult res = fista(loss, lambda, penalty_weights, std::move(init),
                         max_iter, tol_obj);
  double tol = tol_obj;
  for (int round = 0; round < max_rounds; ++round) {
    if (kkt_violation(loss, lambda, penalty_weights, res.coef) <= tol_kkt) {
      res.converged = true;
      return res;
    }
    if (newton_polish(loss, lambda, penalty_weights, res.coef, tol_kkt)) {
      res.converged = true;
      return res;
    }
    tol = std::max(tol * 0.02, 1e-16);
    res = fista(loss, lambda, penalty_weights, res.coef, max_iter, tol);
  }
  res.converged =
      kkt_violation(loss, lambda, penalty_weights, res.coef) <= tol_kkt;
  return res;
}

}  // namespace drlogit
