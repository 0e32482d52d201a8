// Copyright (c) 2026, The sarc Authors
// SPDX-License-Identifier: Apache-2.0

#include "sarc/predictions.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"
#include "sarc/errors.hpp"
#include "sarc/io.hpp"

namespace sarc {

void validate_prediction(const Prediction& p, const std::string& where) {
  if (p.model_id.empty()) throw InputError(fmt::format("{}: empty model_id", where));
  if (p.example_id.empty()) throw InputError(fmt::format("{}: empty example_id", where));
  if (p.status == PredictionStatus::kOk) {
    if (!p.p_sarcastic) throw InputError(fmt::format("{}: status ok requires p_sarcastic", where));
    const double v = *p.p_sarcastic;
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
      throw InputError(fmt::format("{}: p_sarcastic {} outside [0, 1] for ({}, {})", where, v, p.model_id,
                                   p.example_id));
    }
  } else if (p.p_sarcastic) {
    throw InputError(fmt::format("{}: refused record must have null p_sarcastic", where));
  }
}

IngestResult ingest_predictions(const std::string& contents, const std::string& source_name) {
  IngestResult result;
  std::set<std::pair<std::string, std::string>> seen;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < contents.size()) {
    auto end = contents.find('\n', pos);
    if (end == std::string::npos) end = contents.size();
    std::string_view line(contents.data() + pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;
    const auto where = fmt::format("{}:{}", source_name, line_no);

    Prediction p;
    try {
      const auto j = nlohmann::json::parse(line);
      p.model_id = j.at("model_id").get<std::string>();
      p.example_id = j.at("example_id").get<std::string>();
      const auto status = j.at("status").get<std::string>();
      if (status == "ok") {
        p.status = PredictionStatus::kOk;
      } else if (status == "refused") {
        p.status = PredictionStatus::kRefused;
      } else {
        throw InputError(fmt::format("{}: status must be \"ok\" or \"refused\", got \"{}\"", where, status));
      }
      if (j.contains("p_sarcastic") && !j["p_sarcastic"].is_null()) {
        if (!j["p_sarcastic"].is_number()) throw InputError(fmt::format("{}: p_sarcastic must be a number", where));
        p.p_sarcastic = j["p_sarcastic"].get<double>();
      }
    } catch (const nlohmann::json::exception& e) {
      throw InputError(fmt::format("{}: {}", where, e.what()));
    }
    validate_prediction(p, where);
    if (!seen.emplace(p.model_id, p.example_id).second) {
      throw InputError(fmt::format("{}: duplicate prediction for ({}, {})", where, p.model_id, p.example_id));
    }
    (p.status == PredictionStatus::kOk ? result.ok : result.refused) += 1;
    result.records.push_back(std::move(p));
  }
  return result;
}

IngestResult ingest(const std::filesystem::path& path) { return ingest_predictions(read_file(path), path.string()); }

std::string to_jsonl(std::span<const Prediction> predictions) {
  std::string out;
  for (const auto& p : predictions) {
    nlohmann::ordered_json j;
    j["model_id"] = p.model_id;
    j["example_id"] = p.example_id;
    j["p_sarcastic"] = p.p_sarcastic ? nlohmann::ordered_json(*p.p_sarcastic) : nlohmann::ordered_json(nullptr);
    j["status"] = p.status == PredictionStatus::kOk ? "ok" : "refused";
    out += j.dump();
    out += '\n';
  }
  return out;
}

void save_predictions(std::span<const Prediction> predictions, const std::filesystem::path& path) {
  write_file_atomic(path, to_jsonl(predictions));
}

PredictionMatrix::PredictionMatrix(std::vector<std::string> model_ids, std::vector<std::string> example_ids,
                                   std::vector<double> probs, std::vector<int> labels)
    : model_ids_(std::move(model_ids)),
      example_ids_(std::move(example_ids)),
      probs_(std::move(probs)),
      labels_(std::move(labels)) {
  if (probs_.size() != model_ids_.size() * example_ids_.size()) {
    throw PreconditionError(fmt::format("matrix data has {} cells, expected {} x {}", probs_.size(),
                                        example_ids_.size(), model_ids_.size()));
  }
  if (labels_.size() != example_ids_.size()) throw PreconditionError("matrix labels do not match row count");
  if (std::set(model_ids_.begin(), model_ids_.end()).size() != model_ids_.size()) {
    throw PreconditionError("matrix model ids must be distinct");
  }
  if (std::set(example_ids_.begin(), example_ids_.end()).size() != example_ids_.size()) {
    throw PreconditionError("matrix example ids must be distinct");
  }
  for (double v : probs_) {
    if (!(v >= 0.0 && v <= 1.0)) throw PreconditionError("matrix probabilities must lie in [0, 1]");
  }
  for (int y : labels_) {
    if (y != 0 && y != 1) throw PreconditionError("matrix labels must be 0 or 1");
  }
}

PredictionMatrix PredictionMatrix::select_columns(const std::vector<std::string>& model_ids) const {
  std::vector<std::size_t> cols_idx;
  for (const auto& id : model_ids) {
    auto it = std::find(model_ids_.begin(), model_ids_.end(), id);
    if (it == model_ids_.end()) throw PreconditionError(fmt::format("matrix has no model '{}'", id));
    cols_idx.push_back(static_cast<std::size_t>(it - model_ids_.begin()));
  }
  std::vector<double> probs;
  probs.reserve(rows() * cols_idx.size());
  for (std::size_t r = 0; r < rows(); ++r) {
    for (auto c : cols_idx) probs.push_back(at(r, c));
  }
  return PredictionMatrix(model_ids, example_ids_, std::move(probs), labels_);
}

std::string matrix_to_json(const PredictionMatrix& matrix) {
  nlohmann::ordered_json j;
  j["model_ids"] = matrix.model_ids();
  j["example_ids"] = matrix.example_ids();
  j["labels"] = matrix.labels();
  auto rows = nlohmann::ordered_json::array();
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    auto row = matrix.row(r);
    rows.push_back(std::vector<double>(row.begin(), row.end()));
  }
  j["probs"] = std::move(rows);
  return j.dump() + "\n";
}

PredictionMatrix matrix_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    auto model_ids = j.at("model_ids").get<std::vector<std::string>>();
    auto example_ids = j.at("example_ids").get<std::vector<std::string>>();
    auto labels = j.at("labels").get<std::vector<int>>();
    std::vector<double> probs;
    for (const auto& row : j.at("probs")) {
      if (row.size() != model_ids.size()) throw InputError("matrix row width does not match model_ids");
      for (const auto& v : row) probs.push_back(v.get<double>());
    }
    return PredictionMatrix(std::move(model_ids), std::move(example_ids), std::move(probs), std::move(labels));
  } catch (const nlohmann::json::exception& e) {
    throw InputError(fmt::format("prediction matrix: {}", e.what()));
  }
}

std::map<std::string, std::vector<Prediction>> group_by_model(std::span<const Prediction> records) {
  std::map<std::string, std::vector<Prediction>> out;
  for (const auto& p : records) out[p.model_id].push_back(p);
  return out;
}

AlignResult align(const std::map<std::string, std::vector<Prediction>>& by_model, const Corpus& corpus,
                  const AlignOptions& options) {
  if (by_model.empty()) throw PreconditionError("align: no models given");

  std::vector<const Example*> members;
  for (const auto& ex : corpus.examples()) {
    if (!options.split || ex.split == options.split) members.push_back(&ex);
  }
  std::sort(members.begin(), members.end(), [](auto* a, auto* b) { return a->id < b->id; });

  AlignResult result;
  result.split_size = members.size();
  const std::string split_name = options.split ? std::string(to_string(*options.split)) : "all";

  // model id -> (example id -> probability) for ok records only.
  std::vector<std::string> model_ids;
  std::vector<std::unordered_map<std::string_view, double>> ok_probs;
  for (const auto& [model_id, records] : by_model) {
    model_ids.push_back(model_id);
    auto& probs = ok_probs.emplace_back();
    for (const auto& p : records) {
      if (p.model_id != model_id) {
        throw PreconditionError(fmt::format("align: record for '{}' filed under '{}'", p.model_id, model_id));
      }
      if (p.status == PredictionStatus::kOk) probs.emplace(p.example_id, *p.p_sarcastic);
    }
  }

  for (std::size_t m = 0; m < model_ids.size(); ++m) {
    std::size_t covered = 0;
    for (const auto* ex : members) covered += ok_probs[m].count(ex->id);
    result.dropped_per_model[model_ids[m]] = members.size() - covered;
    const double coverage = members.empty() ? 1.0 : static_cast<double>(covered) / members.size();
    if (coverage < options.min_coverage) {
      auto msg = fmt::format("model '{}' covers {}/{} examples of split '{}' ({:.1f}% < {:.1f}%)", model_ids[m],
                             covered, members.size(), split_name, 100.0 * coverage, 100.0 * options.min_coverage);
      if (!options.allow_low_coverage) throw PreconditionError(msg);
      result.warnings.push_back(std::move(msg));
    }
  }

  std::vector<std::string> example_ids;
  std::vector<double> probs;
  std::vector<int> labels;
  for (const auto* ex : members) {
    bool all_ok = true;
    for (const auto& probs_m : ok_probs) all_ok = all_ok && probs_m.count(ex->id) > 0;
    if (!all_ok) {
      ++result.dropped_rows;
      continue;
    }
    example_ids.push_back(ex->id);
    labels.push_back(to_int(ex->label));
    for (const auto& probs_m : ok_probs) probs.push_back(probs_m.at(ex->id));
  }
  result.matrix = PredictionMatrix(std::move(model_ids), std::move(example_ids), std::move(probs), std::move(labels));
  return result;
}

}  // namespace sarc
