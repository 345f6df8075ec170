#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "drlogit/prox.hpp"
#include "drlogit/rng.hpp"
#include "drlogit/types.hpp"

namespace drlogit {

// Immutable fitted conditional-mean model.
class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual double predict(const Eigen::Ref<const Eigen::VectorXd>& row) const = 0;

  Eigen::VectorXd predict_rows(const Eigen::MatrixXd& x) const {
    Eigen::VectorXd out(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      out[i] = predict(x.row(i).transpose());
    return out;
  }
};

// Blackbox conditional-mean learner: fit on an index subset, return an
// immutable predictor. fit must only read the rows named in indices.
class Learner {
 public:
  virtual ~Learner() = default;
  virtual std::unique_ptr<Predictor> fit(
      const Eigen::VectorXd& responses, const Eigen::MatrixXd& covariates,
      const std::vector<Eigen::Index>& indices) const = 0;
  virtual std::string name() const = 0;
};

namespace learner_detail {

struct Sub {
  Eigen::VectorXd y;
  Eigen::MatrixXd x;
};

inline Sub gather(const Eigen::VectorXd& responses,
                  const Eigen::MatrixXd& covariates,
                  const std::vector<Eigen::Index>& indices) {
  if (indices.empty()) throw std::invalid_argument("learner: empty index set");
  Sub s;
  const Eigen::Index m = static_cast<Eigen::Index>(indices.size());
  s.y.resize(m);
  s.x.resize(m, covariates.cols());
  for (Eigen::Index r = 0; r < m; ++r) {
    const Eigen::Index i = indices[static_cast<std::size_t>(r)];
    if (i < 0 || i >= responses.size())
      throw std::out_of_range("learner: index out of range");
    s.y[r] = responses[i];
    s.x.row(r) = covariates.row(i);
  }
  return s;
}

class LinearPredictor final : public Predictor {
 public:
  LinearPredictor(double intercept, Eigen::VectorXd coef)
      : intercept_(intercept), coef_(std::move(coef)) {}
  double predict(const Eigen::Ref<const Eigen::VectorXd>& row) const override {
    return intercept_ + coef_.dot(row);
  }

 private:
  double intercept_;
  Eigen::VectorXd coef_;
};

}  // namespace learner_detail

// Penalized least squares with intercept (intercept unpenalized, covariates
// centered so the penalty is translation invariant). lambda = 0 requires a
// full-rank centered design.
class RidgeLearner final : public Learner {
 public:
  explicit RidgeLearner(double lambda) : lambda_(lambda) {
    if (lambda < 0.0) throw std::invalid_argument("ridge: lambda < 0");
  }

  std::unique_ptr<Predictor> fit(
      const Eigen::VectorXd& responses, const Eigen::MatrixXd& covariates,
      const std::vector<Eigen::Index>& indices) const override {
    auto s = learner_detail::gather(responses, covariates, indices);
    const Eigen::Index m = s.y.size(), p = s.x.cols();
    const Eigen::VectorXd xbar = s.x.colwise().mean();
    const double ybar = s.y.mean();
    Eigen::MatrixXd xc = s.x.rowwise() - xbar.transpose();
    Eigen::MatrixXd gram =
        xc.transpose() * xc / static_cast<double>(m) +
        lambda_ * Eigen::MatrixXd::Identity(p, p);
    const Eigen::VectorXd rhs =
        xc.transpose() * (s.y.array() - ybar).matrix() / static_cast<double>(m);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
    if (lambda_ == 0.0) {
      Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
      if (!lu.isInvertible())
        throw std::runtime_error("ridge: singular system at lambda = 0");
    }
    const Eigen::VectorXd coef = ldlt.solve(rhs);
    return std::make_unique<learner_detail::LinearPredictor>(
        ybar - coef.dot(xbar), coef);
  }

  std::string name() const override { return "ridge"; }

 private:
  double lambda_;
};

// l1-penalized least squares on standardized covariates; lambda <= 0 means
// the sqrt(log p / n) default.
class LassoLearner final : public Learner {
 public:
  explicit LassoLearner(double lambda = 0.0) : lambda_(lambda) {}

  std::unique_ptr<Predictor> fit(
      const Eigen::VectorXd& responses, const Eigen::MatrixXd& covariates,
      const std::vector<Eigen::Index>& indices) const override {
    auto s = learner_detail::gather(responses, covariates, indices);
    const Eigen::Index m = s.y.size(), p = s.x.cols();
    const Eigen::VectorXd xbar = s.x.colwise().mean();
    const double ybar = s.y.mean();
    Eigen::MatrixXd xc = s.x.rowwise() - xbar.transpose();
    Eigen::VectorXd scale(p);
    for (Eigen::Index j = 0; j < p; ++j) {
      const double var = xc.col(j).squaredNorm() / static_cast<double>(m);
      scale[j] = var > 1e-12 ? std::sqrt(var) : 1.0;
      xc.col(j) /= scale[j];
    }
    const Eigen::VectorXd yc = s.y.array() - ybar;
    const double lambda =
        lambda_ > 0.0
            ? lambda_
            : std::sqrt(std::log(std::max<Eigen::Index>(p, 2)) /
                        static_cast<double>(m));

    struct SqLoss {
      const Eigen::MatrixXd& x;
      const Eigen::VectorXd& y;
      double value(const Eigen::VectorXd& b) const {
        return (x * b - y).squaredNorm() / (2.0 * static_cast<double>(y.size()));
      }
      void gradient(const Eigen::VectorXd& b, Eigen::VectorXd& g) const {
        g.noalias() = x.transpose() * (x * b - y) / static_cast<double>(y.size());
      }
    } loss{xc, yc};
    ProxResult res = fista_kkt(loss, lambda, Eigen::VectorXd::Ones(p),
                               Eigen::VectorXd::Zero(p), 5000, 1e-9,
                               kkt_tolerance(lambda));
    if (!res.converged)
      throw std::runtime_error("lasso learner: solver failed");
    Eigen::VectorXd coef = res.coef.cwiseQuotient(scale);
    return std::make_unique<learner_detail::LinearPredictor>(
        ybar - coef.dot(xbar), coef);
  }

  std::string name() const override { return "lasso"; }

 private:
  double lambda_;
};

// Euclidean k-nearest-neighbour mean; ties broken by training index so
// predictions are deterministic.
class KnnLearner final : public Learner {
 public:
  explicit KnnLearner(int k) : k_(k) {
    if (k < 1) throw std::invalid_argument("knn: k < 1");
  }

  std::unique_ptr<Predictor> fit(
      const Eigen::VectorXd& responses, const Eigen::MatrixXd& covariates,
      const std::vector<Eigen::Index>& indices) const override {
    auto s = learner_detail::gather(responses, covariates, indices);
    if (static_cast<Eigen::Index>(k_) > s.y.size())
      throw std::invalid_argument("knn: k exceeds training size");

    class KnnPredictor final : public Predictor {
     public:
      KnnPredictor(learner_detail::Sub s, int k) : s_(std::move(s)), k_(k) {}
      double predict(
          const Eigen::Ref<const Eigen::VectorXd>& row) const override {
        const Eigen::Index m = s_.y.size();
        std::vector<std::pair<double, Eigen::Index>> dist(
            static_cast<std::size_t>(m));
        for (Eigen::Index i = 0; i < m; ++i)
          dist[static_cast<std::size_t>(i)] = {
              (s_.x.row(i).transpose() - row).squaredNorm(), i};
        std::partial_sort(dist.begin(), dist.begin() + k_, dist.end());
        double sum = 0.0;
        for (int i = 0; i < k_; ++i)
          sum += s_.y[dist[static_cast<std::size_t>(i)].second];
        return sum / k_;
      }

     private:
      learner_detail::Sub s_;
      int k_;
    };
    return std::make_unique<KnnPredictor>(std::move(s), k_);
  }

  std::string name() const override { return "knn"; }

 private:
  int k_;
};

namespace learner_detail {

struct TreeNode {
  int feature = -1;        // -1 marks a leaf
  double threshold = 0.0;
  double value = 0.0;      // leaf mean
  int left = -1, right = -1;
};

struct Tree {
  std::vector<TreeNode> nodes;

  double predict(const Eigen::Ref<const Eigen::VectorXd>& row) const {
    int cur = 0;
    while (nodes[static_cast<std::size_t>(cur)].feature >= 0) {
      const auto& nd = nodes[static_cast<std::size_t>(cur)];
      cur = row[nd.feature] <= nd.threshold ? nd.left : nd.right;
    }
    return nodes[static_cast<std::size_t>(cur)].value;
  }
};

// Best SSE-reducing split over sorted unique values of one feature.
struct SplitCandidate {
  bool found = false;
  double threshold = 0.0;
  double score = 0.0;  // SSE reduction
};

inline SplitCandidate best_split(const Sub& s,
                                 const std::vector<Eigen::Index>& rows,
                                 int feature, int min_leaf) {
  std::vector<std::pair<double, double>> xv;  // (x_j, y)
  xv.reserve(rows.size());
  for (const auto r : rows) xv.emplace_back(s.x(r, feature), s.y[r]);
  std::sort(xv.begin(), xv.end());
  const std::size_t m = xv.size();
  double total = 0.0, total_sq = 0.0;
  for (const auto& [x, y] : xv) {
    total += y;
    total_sq += y * y;
  }
  SplitCandidate best;
  double left_sum = 0.0;
  for (std::size_t i = 0; i + 1 < m; ++i) {
    left_sum += xv[i].second;
    if (xv[i].first == xv[i + 1].first) continue;
    const std::size_t nl = i + 1, nr = m - nl;
    if (nl < static_cast<std::size_t>(min_leaf) ||
        nr < static_cast<std::size_t>(min_leaf))
      continue;
    const double right_sum = total - left_sum;
    const double score = left_sum * left_sum / static_cast<double>(nl) +
                         right_sum * right_sum / static_cast<double>(nr) -
                         total * total / static_cast<double>(m);
    if (!best.found || score > best.score) {
      best.found = true;
      best.score = score;
      best.threshold = 0.5 * (xv[i].first + xv[i + 1].first);
    }
  }
  return best;
}

inline void grow_tree(Tree& tree, const Sub& s,
                      std::vector<Eigen::Index> rows, int depth, int max_depth,
                      int min_leaf, int mtry, std::mt19937_64& eng,
                      int node_id) {
  auto& node = tree.nodes[static_cast<std::size_t>(node_id)];
  double mean = 0.0;
  for (const auto r : rows) mean += s.y[r];
  mean /= static_cast<double>(rows.size());
  node.value = mean;
  if (depth >= max_depth ||
      rows.size() < 2 * static_cast<std::size_t>(min_leaf))
    return;

  const int p = static_cast<int>(s.x.cols());
  std::vector<int> feats(static_cast<std::size_t>(p));
  std::iota(feats.begin(), feats.end(), 0);
  for (int i = p; i > 1; --i) {
    const int j = static_cast<int>(eng() % static_cast<std::uint64_t>(i));
    std::swap(feats[static_cast<std::size_t>(i - 1)],
              feats[static_cast<std::size_t>(j)]);
  }
  feats.resize(static_cast<std::size_t>(std::min(mtry, p)));
  std::sort(feats.begin(), feats.end());  // order-independent of the shuffle

  SplitCandidate best;
  int best_feature = -1;
  for (const int f : feats) {
    const SplitCandidate cand = best_split(s, rows, f, min_leaf);
    if (cand.found && (best_feature < 0 || cand.score > best.score)) {
      best = cand;
      best_feature = f;
    }
  }
  if (best_feature < 0) return;

  std::vector<Eigen::Index> left_rows, right_rows;
  for (const auto r : rows)
    (s.x(r, best_feature) <= best.threshold ? left_rows : right_rows)
        .push_back(r);
  if (left_rows.empty() || right_rows.empty()) return;

  const int left_id = static_cast<int>(tree.nodes.size());
  tree.nodes.emplace_back();
  const int right_id = static_cast<int>(tree.nodes.size());
  tree.nodes.emplace_back();
  {
    auto& nd = tree.nodes[static_cast<std::size_t>(node_id)];
    nd.feature = best_feature;
    nd.threshold = best.threshold;
    nd.left = left_id;
    nd.right = right_id;
  }
  grow_tree(tree, s, std::move(left_rows), depth + 1, max_depth, min_leaf,
            mtry, eng, left_id);
  grow_tree(tree, s, std::move(right_rows), depth + 1, max_depth, min_leaf,
            mtry, eng, right_id);
}

}  // namespace learner_detail

// Random-feature regression forest with bootstrap rows. Tree seeds are
// derived from (seed, hash of the training index set, tree number), so a
// shared learner object stays deterministic across distinct fits.
class ForestLearner final : public Learner {
 public:
  ForestLearner(int trees, int max_depth, int min_leaf, std::uint64_t seed)
      : trees_(trees), max_depth_(max_depth), min_leaf_(min_leaf), seed_(seed) {
    if (trees < 1 || max_depth < 1 || min_leaf < 1)
      throw std::invalid_argument("forest: bad hyperparameters");
  }

  std::unique_ptr<Predictor> fit(
      const Eigen::VectorXd& responses, const Eigen::MatrixXd& covariates,
      const std::vector<Eigen::Index>& indices) const override {
    auto s = learner_detail::gather(responses, covariates, indices);
    const Eigen::Index m = s.y.size();
    std::uint64_t idx_hash = splitmix64(static_cast<std::uint64_t>(m));
    for (const auto i : indices)
      idx_hash = seed_combine(idx_hash, static_cast<std::uint64_t>(i));

    const int mtry =
        std::max(1, static_cast<int>(s.x.cols() + 2) / 3);
    std::vector<learner_detail::Tree> trees;
    trees.reserve(static_cast<std::size_t>(trees_));
    for (int t = 0; t < trees_; ++t) {
      auto eng = make_engine(derive_seed(seed_, idx_hash,
                                         static_cast<std::uint64_t>(t)));
      std::vector<Eigen::Index> rows(static_cast<std::size_t>(m));
      for (auto& r : rows)
        r = static_cast<Eigen::Index>(eng() % static_cast<std::uint64_t>(m));
      learner_detail::Tree tree;
      tree.nodes.emplace_back();
      learner_detail::grow_tree(tree, s, std::move(rows), 0, max_depth_,
                                min_leaf_, mtry, eng, 0);
      trees.push_back(std::move(tree));
    }

    class ForestPredictor final : public Predictor {
     public:
      explicit ForestPredictor(std::vector<learner_detail::Tree> trees)
          : trees_(std::move(trees)) {}
      double predict(
          const Eigen::Ref<const Eigen::VectorXd>& row) const override {
        double sum = 0.0;
        for (const auto& t : trees_) sum += t.predict(row);
        return sum / static_cast<double>(trees_.size());
      }

     private:
      std::vector<learner_detail::Tree> trees_;
    };
    return std::make_unique<ForestPredictor>(std::move(trees));
  }

  std::string name() const override { return "forest"; }

 private:
  int trees_;
  int max_depth_;
  int min_leaf_;
  std::uint64_t seed_;
};

inline std::unique_ptr<Learner> make_learner(
    const std::string& name, const std::map<std::string, double>& params = {},
    std::uint64_t seed = 0) {
  auto get = [&](const std::string& key, double fallback) {
    const auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
  };
  if (name == "ridge") return std::make_unique<RidgeLearner>(get("lambda", 1e-3));
  if (name == "lasso") return std::make_unique<LassoLearner>(get("lambda", 0.0));
  if (name == "knn")
    return std::make_unique<KnnLearner>(static_cast<int>(get("k", 10)));
  if (name == "forest")
    return std::make_unique<ForestLearner>(
        static_cast<int>(get("trees", 100)),
        static_cast<int>(get("max_depth", 6)),
        static_cast<int>(get("min_leaf", 5)), seed);
  throw std::invalid_argument("unknown learner: " + name);
}

}  // namespace drlogit
