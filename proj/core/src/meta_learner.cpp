// Copyright (c) 2026, The sarc Authors
// SPDX-License-Identifier: Apache-2.0

#include "sarc/meta_learner.hpp"

#include <fmt/format.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "sarc/errors.hpp"
#include "sarc/hash.hpp"

namespace sarc {
namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

double score(std::span<const double> x, std::span<const double> w, double b) {
  double z = b;
  for (std::size_t j = 0; j < x.size(); ++j) z += w[j] * x[j];
  return z;
}

void check_weights(const PredictionMatrix& matrix, std::span<const double> weights) {
  if (weights.size() != matrix.cols()) {
    throw PreconditionError(fmt::format("weights have {} entries, matrix has {} columns", weights.size(),
                                        matrix.cols()));
  }
}

double inf_norm(std::span<const double> v) {
  double n = 0.0;
  for (double x : v) n = std::max(n, std::abs(x));
  return n;
}

}  // namespace

double ridge_logistic_objective(const PredictionMatrix& matrix, double lambda, std::span<const double> weights,
                                double intercept) {
  check_weights(matrix, weights);
  if (matrix.rows() == 0) throw PreconditionError("objective of an empty matrix");
  double loss = 0.0;
  for (std::size_t i = 0; i < matrix.rows(); ++i) {
    const double z = score(matrix.row(i), weights, intercept);
    loss += softplus(z) - matrix.labels()[i] * z;
  }
  double penalty = 0.0;
  for (double w : weights) penalty += w * w;
  return loss / static_cast<double>(matrix.rows()) + lambda * penalty;
}

std::vector<double> ridge_logistic_gradient(const PredictionMatrix& matrix, double lambda,
                                            std::span<const double> weights, double intercept) {
  check_weights(matrix, weights);
  if (matrix.rows() == 0) throw PreconditionError("gradient of an empty matrix");
  const std::size_t m = matrix.cols();
  std::vector<double> grad(m + 1, 0.0);
  for (std::size_t i = 0; i < matrix.rows(); ++i) {
    const auto x = matrix.row(i);
    const double residual = sigmoid(score(x, weights, intercept)) - matrix.labels()[i];
    for (std::size_t j = 0; j < m; ++j) grad[j] += residual * x[j];
    grad[m] += residual;
  }
  const double inv_n = 1.0 / static_cast<double>(matrix.rows());
  for (std::size_t j = 0; j < m; ++j) grad[j] = grad[j] * inv_n + 2.0 * lambda * weights[j];
  grad[m] *= inv_n;
  return grad;
}

MetaModel train_meta_model(const PredictionMatrix& matrix, const TrainOptions& options) {
  if (!(options.lambda >= 0.0) || !std::isfinite(options.lambda)) {
    throw PreconditionError("lambda must be a finite value >= 0");
  }
  if (!(options.tolerance > 0.0)) throw PreconditionError("tolerance must be > 0");
  if (options.max_iters < 1) throw PreconditionError("max_iters must be >= 1");
  const auto& y = matrix.labels();
  const auto positives = static_cast<std::size_t>(std::count(y.begin(), y.end(), 1));
  if (positives == 0 || positives == y.size()) {
    throw PreconditionError("meta-learner training needs at least one example of each class");
  }

  const std::size_t m = matrix.cols();
  const std::size_t n = matrix.rows();
  const double lambda = options.lambda;
  std::vector<double> theta(m + 1, 0.0);  // weights, then intercept
  auto w_of = [&](const std::vector<double>& t) { return std::span<const double>(t.data(), m); };
  auto objective = [&](const std::vector<double>& t) {
    return ridge_logistic_objective(matrix, lambda, w_of(t), t[m]);
  };

  double current = objective(theta);
  auto grad = ridge_logistic_gradient(matrix, lambda, w_of(theta), theta[m]);
  int iter = 0;
  for (; inf_norm(grad) > options.tolerance; ++iter) {
    if (iter >= options.max_iters) {
      throw ConvergenceError(fmt::format("meta-learner did not converge in {} iterations (gradient norm {:.3e})",
                                         options.max_iters, inf_norm(grad)),
                             inf_norm(grad), iter);
    }

    // Newton direction from the exact Hessian.
    Eigen::MatrixXd hessian = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m + 1), static_cast<Eigen::Index>(m + 1));
    for (std::size_t i = 0; i < n; ++i) {
      const auto x = matrix.row(i);
      const double p = sigmoid(score(x, w_of(theta), theta[m]));
      const double s = p * (1.0 - p);
      for (std::size_t a = 0; a <= m; ++a) {
        const double xa = a < m ? x[a] : 1.0;
        for (std::size_t b = a; b <= m; ++b) {
          const double xb = b < m ? x[b] : 1.0;
          hessian(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) += s * xa * xb;
        }
      }
    }
    hessian /= static_cast<double>(n);
    for (std::size_t j = 0; j < m; ++j) hessian(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) += 2.0 * lambda;
    hessian = hessian.selfadjointView<Eigen::Upper>();

    Eigen::VectorXd g = Eigen::Map<const Eigen::VectorXd>(grad.data(), static_cast<Eigen::Index>(m + 1));
    Eigen::LDLT<Eigen::MatrixXd> ldlt(hessian);
    Eigen::VectorXd direction = -g;
    if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
      Eigen::VectorXd newton = ldlt.solve(-g);
      if (newton.allFinite() && newton.dot(g) < 0.0) direction = newton;
    }

    // Armijo backtracking.
    const double slope = direction.dot(g);
    double step = 1.0;
    std::vector<double> candidate(m + 1);
    bool accepted = false;
    for (int halvings = 0; halvings < 60; ++halvings, step *= 0.5) {
      for (std::size_t j = 0; j <= m; ++j) candidate[j] = theta[j] + step * direction(static_cast<Eigen::Index>(j));
      const double value = objective(candidate);
      if (value <= current + 1e-4 * step * slope) {
        theta = candidate;
        current = value;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // Near the optimum the objective stops resolving decreases; accept the
      // full step if it still shrinks the gradient.
      for (std::size_t j = 0; j <= m; ++j) candidate[j] = theta[j] + direction(static_cast<Eigen::Index>(j));
      auto candidate_grad = ridge_logistic_gradient(matrix, lambda, w_of(candidate), candidate[m]);
      if (inf_norm(candidate_grad) >= inf_norm(grad)) {
        throw ConvergenceError(fmt::format("meta-learner line search stalled at gradient norm {:.3e}", inf_norm(grad)),
                               inf_norm(grad), iter);
      }
      theta = candidate;
      current = objective(theta);
      grad = std::move(candidate_grad);
      continue;
    }
    grad = ridge_logistic_gradient(matrix, lambda, w_of(theta), theta[m]);
  }

  MetaModel model;
  model.model_ids = matrix.model_ids();
  model.weights.assign(theta.begin(), theta.begin() + static_cast<std::ptrdiff_t>(m));
  model.intercept = theta[m];
  model.lambda = lambda;
  model.trained_on = sha256_hex(matrix_to_json(matrix));
  model.seed = options.seed;
  model.optimizer_report = {iter, inf_norm(grad)};
  return model;
}

std::vector<double> predict(const MetaModel& model, const PredictionMatrix& matrix) {
  if (matrix.model_ids() != model.model_ids) {
    throw PreconditionError("prediction matrix columns do not match the meta-model's model ids");
  }
  std::vector<double> out;
  out.reserve(matrix.rows());
  for (std::size_t i = 0; i < matrix.rows(); ++i) {
    out.push_back(sigmoid(score(matrix.row(i), model.weights, model.intercept)));
  }
  return out;
}

std::vector<std::string> select_top_k(const MetaModel& model, std::size_t k) {
  if (k < 1 || k > model.model_ids.size()) {
    throw PreconditionError(fmt::format("k = {} outside [1, {}]", k, model.model_ids.size()));
  }
  std::vector<std::size_t> order(model.model_ids.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double wa = std::abs(model.weights[a]);
    const double wb = std::abs(model.weights[b]);
    if (wa != wb) return wa > wb;
    return model.model_ids[a] < model.model_ids[b];
  });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back(model.model_ids[order[i]]);
  return out;
}

LambdaSearch tune_lambda(const PredictionMatrix& train, const PredictionMatrix& val, const std::vector<double>& grid,
                         const TrainOptions& base_options) {
  if (grid.empty()) throw PreconditionError("lambda grid must not be empty");
  for (double l : grid) {
    if (!(l >= 0.0)) throw PreconditionError("lambda grid values must be >= 0");
  }
  if (val.rows() == 0) throw PreconditionError("validation matrix is empty");
  const auto val_aligned = val.select_columns(train.model_ids());

  LambdaSearch best;
  double best_accuracy = -1.0;
  for (double lambda : grid) {
    auto options = base_options;
    options.lambda = lambda;
    auto model = train_meta_model(train, options);
    const auto probs = predict(model, val_aligned);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      correct += static_cast<int>(probs[i] > 0.5) == val_aligned.labels()[i];
    }
    const double accuracy = static_cast<double>(correct) / static_cast<double>(probs.size());
    best.accuracy_by_lambda.emplace_back(lambda, accuracy);
    if (accuracy > best_accuracy || (accuracy == best_accuracy && lambda > best.lambda)) {
      best_accuracy = accuracy;
      best.lambda = lambda;
      best.model = std::move(model);
    }
  }
  return best;
}

std::string meta_model_to_json(const MetaModel& model) {
  nlohmann::ordered_json j;
  j["model_ids"] = model.model_ids;
  j["weights"] = model.weights;
  j["intercept"] = model.intercept;
  j["lambda"] = model.lambda;
  j["trained_on"] = model.trained_on;
  j["seed"] = model.seed;
  j["optimizer_report"] = {{"iterations", model.optimizer_report.iterations},
                           {"gradient_norm", model.optimizer_report.gradient_norm}};
  return j.dump(2) + "\n";
}

MetaModel meta_model_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    MetaModel model;
    model.model_ids = j.at("model_ids").get<std::vector<std::string>>();
    model.weights = j.at("weights").get<std::vector<double>>();
    model.intercept = j.at("intercept").get<double>();
    model.lambda = j.at("lambda").get<double>();
    model.trained_on = j.value("trained_on", std::string{});
    model.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("optimizer_report")) {
      model.optimizer_report.iterations = j["optimizer_report"].at("iterations").get<int>();
      model.optimizer_report.gradient_norm = j["optimizer_report"].at("gradient_norm").get<double>();
    }
    if (model.weights.size() != model.model_ids.size()) throw InputError("meta model: weights/model_ids size mismatch");
    if (model.lambda < 0.0) throw InputError("meta model: lambda must be >= 0");
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(fmt::format("meta model: {}", e.what()));
  }
}

}  // namespace sarc
