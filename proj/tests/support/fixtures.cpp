// Copyright (c) 2026, The sarc Authors
// SPDX-License-Identifier: Apache-2.0

#include "support/fixtures.hpp"

#include <fmt/format.h>
#include <unistd.h>

#include <cstdlib>
#include <fstream>
#include <stdexcept>

#include "sarc/rng.hpp"

namespace sarc::testing {

TempDir::TempDir() {
  auto tmpl = (std::filesystem::temp_directory_path() / "sarc-test-XXXXXX").string();
  if (!mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
  path_ = tmpl;
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::filesystem::path data_dir() { return SARC_DATA_DIR; }

void write_text(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << contents;
}

std::string synthetic_text(bool sarcastic, std::size_t index) {
  if (sarcastic) return fmt::format("Oh great, \"another\" Monday #{} \U0001F644\nsarc-marker", index);
  return fmt::format("The train left at {}:{:02d}, on time. https://t.co/x{}", index % 24, index % 60, index);
}

void write_labeled_csv(const std::filesystem::path& path, std::size_t positives, std::size_t negatives,
                       const std::string& tag) {
  std::string body = "text,sarcastic\n";
  const std::size_t total = positives + negatives;
  std::size_t pos_written = 0;
  for (std::size_t i = 0; i < total; ++i) {
    // Spread positives evenly through the file.
    const bool sarcastic = pos_written < positives && (i + 1) * positives >= (pos_written + 1) * total;
    pos_written += sarcastic;
    std::string text = tag + " " + synthetic_text(sarcastic, i);
    std::string quoted = "\"";
    for (char c : text) {
      if (c == '"') quoted += '"';
      quoted += c;
    }
    quoted += '"';
    body += fmt::format("{},{}\n", quoted, sarcastic ? 1 : 0);
  }
  write_text(path, body);
}

Corpus make_corpus(const std::vector<int>& labels, const std::vector<std::optional<Split>>& splits) {
  std::vector<Example> examples;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    Example ex;
    ex.id = fmt::format("e{:03d}", i);
    ex.text_source = synthetic_text(labels[i] == 1, i);
    ex.label = labels[i] == 1 ? Label::kSarcastic : Label::kNotSarcastic;
    ex.origin_split = i % 2 == 0 ? OriginSplit::kTrain : OriginSplit::kTest;
    if (i < splits.size()) ex.split = splits[i];
    examples.push_back(std::move(ex));
  }
  return Corpus(std::move(examples), "synthetic");
}

PredictionMatrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed, bool grid) {
  Rng rng(seed);
  std::vector<std::string> models;
  for (std::size_t j = 0; j < cols; ++j) models.push_back(fmt::format("m{}", j));
  std::vector<std::string> ids;
  std::vector<double> probs;
  std::vector<int> labels;
  for (std::size_t i = 0; i < rows; ++i) {
    ids.push_back(fmt::format("r{:05d}", i));
    labels.push_back(static_cast<int>(rng.below(2)));
    for (std::size_t j = 0; j < cols; ++j) {
      probs.push_back(grid ? 0.25 * static_cast<double>(rng.below(5)) : rng.uniform());
    }
  }
  return PredictionMatrix(std::move(models), std::move(ids), std::move(probs), std::move(labels));
}

}  // namespace sarc::testing
