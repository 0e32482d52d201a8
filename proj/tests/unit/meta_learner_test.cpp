// Copyright (c) 2026, The sarc Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "doctest.h"
#include "sarc/errors.hpp"
#include "sarc/meta_learner.hpp"
#include "sarc/rng.hpp"
#include "support/fixtures.hpp"

using namespace sarc;

namespace {

// Straight transcription of the objective, kept independent of the library.
double reference_objective(const PredictionMatrix& x, double lambda, const std::vector<double>& w, double b) {
  long double loss = 0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    long double z = b;
    for (std::size_t j = 0; j < x.cols(); ++j) z += w[j] * x.at(i, j);
    const long double p = 1.0L / (1.0L + std::exp(-z));
    loss -= x.labels()[i] == 1 ? std::log(p) : std::log1p(-p);
  }
  long double penalty = 0;
  for (double v : w) penalty += static_cast<long double>(v) * v;
  return static_cast<double>(loss / x.rows() + lambda * penalty);
}

PredictionMatrix matrix(std::size_t cols, const std::vector<double>& data, const std::vector<int>& labels) {
  std::vector<std::string> models, ids;
  for (std::size_t j = 0; j < cols; ++j) models.push_back("m" + std::to_string(j));
  for (std::size_t i = 0; i < labels.size(); ++i) ids.push_back("r" + std::to_string(i));
  return PredictionMatrix(models, ids, data, labels);
}

// Labels drawn from a logistic model so the data carries signal.
PredictionMatrix synthetic(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> data;
  std::vector<int> labels;
  for (std::size_t i = 0; i < rows; ++i) {
    double z = -1.0;
    for (std::size_t j = 0; j < cols; ++j) {
      const double v = rng.uniform();
      data.push_back(v);
      z += (j % 2 == 0 ? 3.0 : -1.0) * v;
    }
    labels.push_back(rng.uniform() < 1.0 / (1.0 + std::exp(-z)) ? 1 : 0);
  }
  labels[0] = 1;
  labels[1] = 0;
  return matrix(cols, data, labels);
}

double norm2(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

TEST_SUITE("meta_learner") {
  TEST_CASE("objective agrees with the reference transcription") {
    const auto x = synthetic(60, 3, 1);
    Rng rng(2);
    for (int k = 0; k < 20; ++k) {
      std::vector<double> w{rng.uniform() * 8 - 4, rng.uniform() * 8 - 4, rng.uniform() * 8 - 4};
      const double b = rng.uniform() * 4 - 2;
      CHECK(ridge_logistic_objective(x, 0.1, w, b) == doctest::Approx(reference_objective(x, 0.1, w, b)).epsilon(1e-12));
    }
  }

  TEST_CASE("analytic gradient matches central finite differences") {
    const auto x = synthetic(200, 4, 3);
    const double lambda = 0.1;
    const double h = 1e-5;
    Rng rng(4);
    for (int k = 0; k < 20; ++k) {
      std::vector<double> theta(5);
      for (auto& t : theta) t = rng.uniform() * 6 - 3;
      const auto f = [&](const std::vector<double>& th) {
        return reference_objective(x, lambda, std::vector<double>(th.begin(), th.end() - 1), th.back());
      };
      const auto g = ridge_logistic_gradient(x, lambda, std::span(theta).first(4), theta.back());
      REQUIRE(g.size() == 5);
      for (std::size_t j = 0; j < 5; ++j) {
        auto up = theta, down = theta;
        up[j] += h;
        down[j] -= h;
        const double fd = (f(up) - f(down)) / (2 * h);
        const double rel = std::abs(fd - g[j]) / std::max(1.0, std::abs(fd));
        CHECK(rel < 1e-5);
      }
    }
  }

  TEST_CASE("objective is convex along random segments") {
    const auto x = synthetic(100, 3, 5);
    Rng rng(6);
    for (int k = 0; k < 100; ++k) {
      std::vector<double> a(3), b(3), mid(3);
      for (int j = 0; j < 3; ++j) {
        a[j] = rng.uniform() * 20 - 10;
        b[j] = rng.uniform() * 20 - 10;
        mid[j] = (a[j] + b[j]) / 2;
      }
      const double ba = rng.uniform() * 10 - 5, bb = rng.uniform() * 10 - 5;
      const double jm = ridge_logistic_objective(x, 0.05, mid, (ba + bb) / 2);
      const double ja = ridge_logistic_objective(x, 0.05, a, ba);
      const double jb = ridge_logistic_objective(x, 0.05, b, bb);
      CHECK(jm <= (ja + jb) / 2 + 1e-9);
    }
  }

  TEST_CASE("no signal: zero weight and the log-odds intercept") {
    // Constant feature, 7 of 20 positive.
    std::vector<int> labels(20, 0);
    for (int i = 0; i < 7; ++i) labels[i * 2] = 1;
    const auto x = matrix(1, std::vector<double>(20, 0.6), labels);
    const auto model = train_meta_model(x, {});
    CHECK(std::abs(model.weights[0]) < 1e-6);
    CHECK(std::abs(model.intercept - std::log(7.0 / 13.0)) < 1e-6);
  }

  TEST_CASE("duplicate columns receive equal weights") {
    const auto base = synthetic(150, 1, 7);
    std::vector<double> data;
    for (std::size_t i = 0; i < base.rows(); ++i) {
      data.push_back(base.at(i, 0));
      data.push_back(base.at(i, 0));
    }
    const auto model = train_meta_model(matrix(2, data, base.labels()), {});
    CHECK(std::abs(model.weights[0] - model.weights[1]) < 1e-6);
  }

  TEST_CASE("trained model reaches the tolerance and is a stationary point") {
    const auto x = synthetic(300, 5, 8);
    TrainOptions opts;
    opts.lambda = 0.01;
    const auto model = train_meta_model(x, opts);
    CHECK(model.optimizer_report.gradient_norm <= 1e-8);
    CHECK(model.optimizer_report.iterations >= 1);
    const auto g = ridge_logistic_gradient(x, opts.lambda, model.weights, model.intercept);
    for (double v : g) CHECK(std::abs(v) <= 1e-8);
    CHECK(model.lambda == 0.01);
    CHECK(model.trained_on.size() == 64);
    CHECK(model.model_ids == x.model_ids());
  }

  TEST_CASE("training is deterministic") {
    const auto x = synthetic(120, 3, 9);
    CHECK(train_meta_model(x, {}) == train_meta_model(x, {}));
  }

  TEST_CASE("weights shrink as lambda grows") {
    const auto x = synthetic(250, 4, 10);
    double previous = INFINITY;
    for (double lambda : {0.0001, 0.001, 0.01, 0.1, 1.0, 10.0, 100.0}) {
      TrainOptions opts;
      opts.lambda = lambda;
      const double n = norm2(train_meta_model(x, opts).weights);
      CHECK(n <= previous + 1e-12);
      previous = n;
    }
  }

  TEST_CASE("small-data optimum is not beaten by a coarse grid search") {
    Rng rng(12);
    for (int trial = 0; trial < 3; ++trial) {
      std::vector<double> data;
      std::vector<int> labels;
      for (int i = 0; i < 6; ++i) {
        data.push_back(rng.uniform());
        labels.push_back(i % 2);
      }
      const auto x = matrix(1, data, labels);
      const auto model = train_meta_model(x, {});
      const double trained = ridge_logistic_objective(x, 0.1, model.weights, model.intercept);
      double best = INFINITY;
      for (int a = -400; a <= 400; ++a) {
        for (int c = -400; c <= 400; ++c) {
          const std::vector<double> w{a * 0.05};
          best = std::min(best, reference_objective(x, 0.1, w, c * 0.05));
        }
      }
      CHECK(best >= trained - 1e-4);
    }
  }

  TEST_CASE("preconditions") {
    const auto one_class = matrix(1, {0.1, 0.2, 0.3}, {1, 1, 1});
    CHECK_THROWS_AS(train_meta_model(one_class, {}), PreconditionError);
    TrainOptions neg;
    neg.lambda = -1;
    CHECK_THROWS_AS(train_meta_model(synthetic(20, 2, 1), neg), PreconditionError);
  }

  TEST_CASE("non-convergence reports the final gradient norm") {
    TrainOptions opts;
    opts.max_iters = 1;
    opts.tolerance = 1e-300;
    try {
      train_meta_model(synthetic(100, 3, 13), opts);
      FAIL("expected ConvergenceError");
    } catch (const ConvergenceError& e) {
      CHECK(e.gradient_norm() > 0);
      CHECK(e.iterations() == 1);
    }
  }

  TEST_CASE("predict examples") {
    const auto x = matrix(1, {0.5, 0.0, 1.0}, {1, 0, 1});
    MetaModel zero{{"m0"}, {0.0}, 0.0, 0.1, ""};
    for (double p : predict(zero, x)) CHECK(p == 0.5);
    MetaModel sym{{"m0"}, {10.0}, -5.0, 0.1, ""};
    CHECK(predict(sym, x)[0] == doctest::Approx(0.5).epsilon(1e-15));
    MetaModel wrong{{"other"}, {1.0}, 0.0, 0.1, ""};
    CHECK_THROWS_AS(predict(wrong, x), PreconditionError);
  }

  TEST_CASE("predictions are reproducible and agree with sigmoid(w.x + b)") {
    const auto x = synthetic(80, 3, 14);
    const auto model = train_meta_model(x, {});
    const auto p1 = predict(model, x);
    const auto p2 = predict(meta_model_from_json(meta_model_to_json(model)), x);
    CHECK(p1 == p2);
    for (std::size_t i = 0; i < x.rows(); ++i) {
      double z = model.intercept;
      for (std::size_t j = 0; j < x.cols(); ++j) z += model.weights[j] * x.at(i, j);
      CHECK(p1[i] == doctest::Approx(1.0 / (1.0 + std::exp(-z))).epsilon(1e-14));
    }
  }

  TEST_CASE("predict is monotone in positively weighted features") {
    MetaModel m{{"a", "b"}, {2.0, -1.0}, 0.1, 0.1, ""};
    Rng rng(15);
    for (int k = 0; k < 200; ++k) {
      const double a = rng.uniform(), b = rng.uniform(), bump = rng.uniform() * (1 - a);
      const auto lo = predict(m, PredictionMatrix({"a", "b"}, {"r"}, {a, b}, {0}))[0];
      const auto hi = predict(m, PredictionMatrix({"a", "b"}, {"r"}, {a + bump, b}, {0}))[0];
      CHECK(hi >= lo);
    }
  }

  TEST_CASE("select_top_k") {
    MetaModel m{{"a", "b", "c"}, {0.9, -1.2, 0.1}, 0, 0.1, ""};
    CHECK(select_top_k(m, 2) == std::vector<std::string>{"b", "a"});
    CHECK(select_top_k(m, 3) == std::vector<std::string>{"b", "a", "c"});
    CHECK_THROWS_AS(select_top_k(m, 0), PreconditionError);
    CHECK_THROWS_AS(select_top_k(m, 4), PreconditionError);
    MetaModel ties{{"z", "y", "x"}, {0.5, -0.5, 0.5}, 0, 0.1, ""};
    CHECK(select_top_k(ties, 3) == std::vector<std::string>{"x", "y", "z"});
  }

  TEST_CASE("tune_lambda picks the best validation accuracy, ties to the larger lambda") {
    const auto train = synthetic(200, 3, 16);
    const auto val = synthetic(100, 3, 17);
    const std::vector<double> grid{0.001, 0.01, 0.1, 1.0, 10.0};
    const auto search = tune_lambda(train, val, grid);
    REQUIRE(search.accuracy_by_lambda.size() == grid.size());
    double best = -1;
    double best_lambda = -1;
    for (const auto& [lambda, acc] : search.accuracy_by_lambda) {
      if (acc >= best) {
        best = acc;
        best_lambda = lambda;
      }
    }
    CHECK(search.lambda == best_lambda);
    CHECK(search.model.lambda == best_lambda);

    // Constant features: every lambda predicts the majority class, so all tie.
    const auto flat_train = matrix(1, std::vector<double>(10, 0.5), {1, 1, 1, 1, 1, 1, 0, 0, 0, 0});
    const auto flat_val = matrix(1, std::vector<double>(4, 0.5), {1, 1, 1, 0});
    CHECK(tune_lambda(flat_train, flat_val, {0.01, 5.0, 0.1}).lambda == 5.0);
    CHECK_THROWS_AS(tune_lambda(flat_train, flat_val, {}), PreconditionError);
  }

  TEST_CASE("model JSON round trip") {
    TrainOptions opts;
    opts.seed = 1234;
    const auto model = train_meta_model(synthetic(50, 2, 18), opts);
    CHECK(model.seed == 1234);
    CHECK(meta_model_from_json(meta_model_to_json(model)) == model);
  }
}
