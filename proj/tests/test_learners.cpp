#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "drlogit/learners.hpp"

using namespace drlogit;

namespace {

struct Problem {
  Eigen::VectorXd y;
  Eigen::MatrixXd x;
};

Problem make_problem(Eigen::Index n, Eigen::Index p, std::uint64_t seed,
                     bool nonlinear = false) {
  std::mt19937_64 eng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Problem pr;
  pr.x.resize(n, p);
  pr.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) pr.x(i, j) = normal(eng);
    double mean = 0.8 * pr.x(i, 0) - 0.5 * pr.x(i, std::min<Eigen::Index>(1, p - 1));
    if (nonlinear) mean += std::sin(2.0 * pr.x(i, 0));
    pr.y[i] = mean + 0.3 * normal(eng);
  }
  return pr;
}

std::vector<Eigen::Index> all_indices(Eigen::Index n) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  return idx;
}

}  // namespace

TEST_CASE("ridge at lambda 0 equals least squares") {
  const auto pr = make_problem(200, 3, 1);
  RidgeLearner learner(0.0);
  const auto fit = learner.fit(pr.y, pr.x, all_indices(200));

  Eigen::MatrixXd z(200, 4);
  z.col(0).setOnes();
  z.rightCols(3) = pr.x;
  const Eigen::VectorXd ols =
      (z.transpose() * z).ldlt().solve(z.transpose() * pr.y);
  for (int t = 0; t < 10; ++t) {
    Eigen::VectorXd row = pr.x.row(t * 7).transpose();
    Eigen::VectorXd zrow(4);
    zrow << 1.0, row;
    CHECK(fit->predict(row) == Catch::Approx(zrow.dot(ols)).margin(1e-8));
  }
}

TEST_CASE("ridge matches its penalized closed form") {
  const auto pr = make_problem(120, 4, 2);
  const double lambda = 0.7;
  RidgeLearner learner(lambda);
  const auto fit = learner.fit(pr.y, pr.x, all_indices(120));

  // Centered closed form: (X_c'X_c/m + lambda I)^{-1} X_c' y_c / m.
  const Eigen::VectorXd xbar = pr.x.colwise().mean();
  const double ybar = pr.y.mean();
  const Eigen::MatrixXd xc = pr.x.rowwise() - xbar.transpose();
  const Eigen::VectorXd coef =
      (xc.transpose() * xc / 120.0 + lambda * Eigen::MatrixXd::Identity(4, 4))
          .ldlt()
          .solve(xc.transpose() * (pr.y.array() - ybar).matrix() / 120.0);
  for (int t = 0; t < 10; ++t) {
    Eigen::VectorXd row = pr.x.row(t * 3).transpose();
    const double expected = ybar + coef.dot(row - xbar);
    CHECK(fit->predict(row) == Catch::Approx(expected).margin(1e-10));
  }
}

TEST_CASE("ridge at lambda 0 rejects a singular design") {
  auto pr = make_problem(50, 3, 3);
  pr.x.col(2) = pr.x.col(0);
  RidgeLearner learner(0.0);
  CHECK_THROWS_WITH(learner.fit(pr.y, pr.x, all_indices(50)),
                    Catch::Matchers::ContainsSubstring("singular"));
  CHECK_THROWS_AS(RidgeLearner(-1.0), std::invalid_argument);
}

TEST_CASE("lasso shrinks to the mean at a huge penalty") {
  const auto pr = make_problem(150, 3, 4);
  LassoLearner learner(100.0);
  const auto fit = learner.fit(pr.y, pr.x, all_indices(150));
  for (int t = 0; t < 5; ++t)
    CHECK(fit->predict(pr.x.row(t * 11).transpose()) ==
          Catch::Approx(pr.y.mean()).margin(1e-9));
}

TEST_CASE("lasso satisfies its stationarity conditions") {
  const auto pr = make_problem(150, 5, 5);
  const double lambda = 0.05;
  LassoLearner learner(lambda);
  const auto fit = learner.fit(pr.y, pr.x, all_indices(150));

  // Recover the fitted linear coefficients from predictions.
  Eigen::VectorXd zero = Eigen::VectorXd::Zero(5);
  const double icpt = fit->predict(zero);
  Eigen::VectorXd coef(5);
  for (Eigen::Index j = 0; j < 5; ++j) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(5);
    e[j] = 1.0;
    coef[j] = fit->predict(e) - icpt;
  }
  // Standardized-scale subgradient check, independently recomputed.
  const Eigen::VectorXd xbar = pr.x.colwise().mean();
  const double ybar = pr.y.mean();
  Eigen::MatrixXd xc = pr.x.rowwise() - xbar.transpose();
  Eigen::VectorXd scale(5);
  for (Eigen::Index j = 0; j < 5; ++j) {
    scale[j] = std::sqrt(xc.col(j).squaredNorm() / 150.0);
    xc.col(j) /= scale[j];
  }
  const Eigen::VectorXd b_std = coef.cwiseProduct(scale);
  const Eigen::VectorXd resid = xc * b_std - (pr.y.array() - ybar).matrix();
  const Eigen::VectorXd grad = xc.transpose() * resid / 150.0;
  for (Eigen::Index j = 0; j < 5; ++j) {
    if (b_std[j] == 0.0)
      CHECK(std::abs(grad[j]) <= lambda + 1e-6);
    else
      CHECK(grad[j] + lambda * (b_std[j] > 0 ? 1.0 : -1.0) ==
            Catch::Approx(0.0).margin(1e-6));
  }
}

TEST_CASE("knn hand example and guards") {
  Eigen::MatrixXd x(4, 1);
  x << 0.0, 1.0, 2.0, 10.0;
  Eigen::VectorXd y(4);
  y << 1.0, 2.0, 3.0, 100.0;

  KnnLearner one(1);
  const auto f1 = one.fit(y, x, all_indices(4));
  Eigen::VectorXd q(1);
  q << 1.9;
  CHECK(f1->predict(q) == 3.0);

  KnnLearner three(3);
  const auto f3 = three.fit(y, x, all_indices(4));
  q << 0.5;
  CHECK(f3->predict(q) == Catch::Approx(2.0));  // mean of {1, 2, 3}

  CHECK_THROWS_AS(KnnLearner(0), std::invalid_argument);
  KnnLearner big(5);
  CHECK_THROWS_WITH(big.fit(y, x, all_indices(4)),
                    Catch::Matchers::ContainsSubstring("k exceeds"));
}

TEST_CASE("knn ties break deterministically") {
  Eigen::MatrixXd x(3, 1);
  x << 0.0, 2.0, -2.0;  // two equidistant neighbours of the query
  Eigen::VectorXd y(3);
  y << 5.0, 10.0, 20.0;
  KnnLearner two(2);
  const auto fit = two.fit(y, x, all_indices(3));
  Eigen::VectorXd q(1);
  q << 0.0;
  // Index order decides the tie, so the answer is mean(y[0], y[1]).
  CHECK(fit->predict(q) == Catch::Approx(7.5));
  CHECK(fit->predict(q) == fit->predict(q));
}

TEST_CASE("forest is deterministic and fits a constant exactly") {
  const auto pr = make_problem(100, 3, 6);
  ForestLearner learner(20, 4, 3, 123);
  const auto f1 = learner.fit(pr.y, pr.x, all_indices(100));
  const auto f2 = learner.fit(pr.y, pr.x, all_indices(100));
  for (int t = 0; t < 10; ++t) {
    const Eigen::VectorXd row = pr.x.row(t * 9).transpose();
    CHECK(f1->predict(row) == f2->predict(row));
  }

  const Eigen::VectorXd flat = Eigen::VectorXd::Constant(100, 4.2);
  const auto fc = learner.fit(flat, pr.x, all_indices(100));
  CHECK(fc->predict(pr.x.row(0).transpose()) == Catch::Approx(4.2));
}

TEST_CASE("forest beats the global mean on a nonlinear signal") {
  const auto train = make_problem(600, 2, 7, true);
  const auto test = make_problem(300, 2, 8, true);
  ForestLearner learner(60, 8, 5, 9);
  const auto fit = learner.fit(train.y, train.x, all_indices(600));
  double mse = 0.0, mse_mean = 0.0;
  const double ybar = train.y.mean();
  for (Eigen::Index i = 0; i < 300; ++i) {
    const double pred = fit->predict(test.x.row(i).transpose());
    mse += (pred - test.y[i]) * (pred - test.y[i]);
    mse_mean += (ybar - test.y[i]) * (ybar - test.y[i]);
  }
  CHECK(mse < 0.5 * mse_mean);
}

TEST_CASE("every learner ignores rows outside its index set") {
  const auto pr = make_problem(160, 3, 10);
  std::vector<Eigen::Index> train;
  for (Eigen::Index i = 0; i < 80; ++i) train.push_back(i);

  auto corrupted = pr;
  for (Eigen::Index i = 80; i < 160; ++i) {
    corrupted.y[i] = 1e6;
    corrupted.x.row(i).setConstant(-1e6);
  }

  for (const std::string name : {"ridge", "lasso", "knn", "forest"}) {
    const auto learner = make_learner(name, {}, 77);
    const auto clean_fit = learner->fit(pr.y, pr.x, train);
    const auto dirty_fit = learner->fit(corrupted.y, corrupted.x, train);
    for (int t = 0; t < 20; ++t) {
      const Eigen::VectorXd row = pr.x.row(100 + t).transpose();
      INFO(name);
      CHECK(clean_fit->predict(row) == dirty_fit->predict(row));
    }
  }
}

TEST_CASE("learner factory") {
  CHECK(make_learner("ridge")->name() == "ridge");
  CHECK(make_learner("lasso")->name() == "lasso");
  CHECK(make_learner("knn", {{"k", 3}})->name() == "knn");
  CHECK(make_learner("forest", {{"trees", 5}}, 1)->name() == "forest");
  CHECK_THROWS_AS(make_learner("mystery"), std::invalid_argument);
  Eigen::VectorXd y(2);
  y << 1.0, 2.0;
  Eigen::MatrixXd x(2, 1);
  x << 0.0, 1.0;
  CHECK_THROWS_WITH(make_learner("ridge")->fit(y, x, {}),
                    Catch::Matchers::ContainsSubstring("empty index set"));
}
