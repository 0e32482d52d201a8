// Copyright (c) 2026, The sarc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "sarc/corpus.hpp"
#include "sarc/predictions.hpp"

namespace sarc::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

std::filesystem::path data_dir();

void write_text(const std::filesystem::path& path, const std::string& contents);

/// Text of synthetic row `index`; sarcastic rows carry a marker the fake
/// endpoint keys on. Includes commas, quotes, a newline and an emoji.
std::string synthetic_text(bool sarcastic, std::size_t index);

/// Writes a CSV in the shape of the official files (`text,sarcastic` header,
/// RFC 4180 quoting) with `positives` sarcastic rows interleaved among
/// `negatives` non-sarcastic ones.
void write_labeled_csv(const std::filesystem::path& path, std::size_t positives, std::size_t negatives,
                       const std::string& tag);

/// Corpus with ids `e000..`, label pattern given, and optional split tags.
Corpus make_corpus(const std::vector<int>& labels, const std::vector<std::optional<Split>>& splits = {});

/// Random binary labels / probabilities / matrices from a fixed seed.
PredictionMatrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed, bool grid = false);

}  // namespace sarc::testing
