// Copyright (c) 2026, The sarc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sarc/predictions.hpp"

namespace sarc {

struct OptimizerReport {
  int iterations = 0;
  double gradient_norm = 0.0;  // infinity norm at termination

  bool operator==(const OptimizerReport&) const = default;
};

/// Stacking meta-classifier: p = sigmoid(w . x + b) over base-model probabilities.
struct MetaModel {
  std::vector<std::string> model_ids;
  std::vector<double> weights;
  double intercept = 0.0;
  double lambda = 0.0;
  std::string trained_on;  // SHA-256 of the training matrix serialization
  std::uint64_t seed = 0;  // run seed, for provenance
  OptimizerReport optimizer_report;

  bool operator==(const MetaModel&) const = default;
};

struct TrainOptions {
  double lambda = 0.1;
  double tolerance = 1e-8;
  int max_iters = 10000;
  /// Recorded for provenance; the optimizer itself is deterministic.
  std::uint64_t seed = 0;
};

/// Mean logistic loss plus lambda * ||w||^2. The intercept is not penalized.
double ridge_logistic_objective(const PredictionMatrix& matrix, double lambda, std::span<const double> weights,
                                double intercept);

/// Gradient of ridge_logistic_objective: M weight components followed by the
/// intercept component.
std::vector<double> ridge_logistic_gradient(const PredictionMatrix& matrix, double lambda,
                                            std::span<const double> weights, double intercept);

/// Minimizes the objective with damped Newton steps until the gradient
/// infinity-norm is <= tolerance. Throws PreconditionError for single-class
/// labels or negative lambda, and ConvergenceError when max_iters is reached.
MetaModel train_meta_model(const PredictionMatrix& matrix, const TrainOptions& options);

/// sigmoid(w . x + b) per row. Throws PreconditionError if the matrix columns
/// differ from the model's model_ids.
std::vector<double> predict(const MetaModel& model, const PredictionMatrix& matrix);

/// The k model ids with the largest |weight|, descending; equal magnitudes
/// are ordered by model id.
std::vector<std::string> select_top_k(const MetaModel& model, std::size_t k);

struct LambdaSearch {
  double lambda = 0.0;
  MetaModel model;
  std::vector<std::pair<double, double>> accuracy_by_lambda;  // in grid order
};

/// Trains one model per grid value and keeps the one with the best accuracy
/// on `val` (p > 0.5 predicts sarcastic). Ties go to the larger lambda.
LambdaSearch tune_lambda(const PredictionMatrix& train, const PredictionMatrix& val, const std::vector<double>& grid,
                         const TrainOptions& base_options = {});

std::string meta_model_to_json(const MetaModel& model);
MetaModel meta_model_from_json(const std::string& text);

}  // namespace sarc
