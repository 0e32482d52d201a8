// Copyright (c) 2026, The sarc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sarc/corpus.hpp"

namespace sarc {

enum class PredictionStatus { kOk, kRefused };

struct Prediction {
  std::string model_id;
  std::string example_id;
  std::optional<double> p_sarcastic;  // present iff status == kOk
  PredictionStatus status = PredictionStatus::kOk;

  bool operator==(const Prediction&) const = default;
};

struct IngestResult {
  std::vector<Prediction> records;
  std::size_t ok = 0;
  std::size_t refused = 0;
};

/// Validates one record and throws InputError naming `where` on violation.
void validate_prediction(const Prediction& p, const std::string& where);

/// Parses prediction JSONL:
/// `{"model_id": str, "example_id": str, "p_sarcastic": float|null, "status": "ok"|"refused"}`.
IngestResult ingest_predictions(const std::string& contents, const std::string& source_name = "<memory>");
IngestResult ingest(const std::filesystem::path& path);

/// Serializes records in the given order, one per line.
std::string to_jsonl(std::span<const Prediction> predictions);
void save_predictions(std::span<const Prediction> predictions, const std::filesystem::path& path);

/// Examples x models matrix of sarcastic-class probabilities.
class PredictionMatrix {
 public:
  PredictionMatrix() = default;
  /// `probs` is row-major, examples.size() x models.size().
  PredictionMatrix(std::vector<std::string> model_ids, std::vector<std::string> example_ids,
                   std::vector<double> probs, std::vector<int> labels);

  std::size_t rows() const { return example_ids_.size(); }
  std::size_t cols() const { return model_ids_.size(); }

  const std::vector<std::string>& model_ids() const { return model_ids_; }
  const std::vector<std::string>& example_ids() const { return example_ids_; }
  const std::vector<int>& labels() const { return labels_; }
  const std::vector<double>& data() const { return probs_; }

  double at(std::size_t row, std::size_t col) const { return probs_[row * cols() + col]; }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(probs_).subspan(r * cols(), cols());
  }

  /// Sub-matrix restricted to the named models, in the given order.
  PredictionMatrix select_columns(const std::vector<std::string>& model_ids) const;

  bool operator==(const PredictionMatrix&) const = default;

 private:
  std::vector<std::string> model_ids_;
  std::vector<std::string> example_ids_;
  std::vector<double> probs_;
  std::vector<int> labels_;
};

std::string matrix_to_json(const PredictionMatrix& matrix);
PredictionMatrix matrix_from_json(const std::string& text);

struct AlignOptions {
  /// nullopt aligns over the whole corpus.
  std::optional<Split> split;
  /// A model with ok predictions for fewer than this fraction of the split is an error.
  double min_coverage = 0.5;
  /// Downgrade the coverage error to a warning.
  bool allow_low_coverage = false;
};

struct AlignResult {
  PredictionMatrix matrix;
  std::size_t split_size = 0;
  /// Examples dropped because at least one model lacked an ok prediction.
  std::size_t dropped_rows = 0;
  /// Per model: split examples without an ok prediction from that model.
  std::map<std::string, std::size_t> dropped_per_model;
  std::vector<std::string> warnings;
};

/// Builds the matrix over split examples where every model has status=ok.
/// Rows are sorted by example id, columns by model id. Predictions for ids
/// outside the corpus are ignored.
AlignResult align(const std::map<std::string, std::vector<Prediction>>& by_model, const Corpus& corpus,
                  const AlignOptions& options = {});

/// Groups records by model_id.
std::map<std::string, std::vector<Prediction>> group_by_model(std::span<const Prediction> records);

}  // namespace sarc
