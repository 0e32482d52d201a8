// Copyright (c) 2026, The sarc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sarc {

enum class Label : std::uint8_t { kNotSarcastic = 0, kSarcastic = 1 };

enum class OriginSplit : std::uint8_t { kTrain, kTest };

enum class Split : std::uint8_t { kTrain, kVal, kTest };

std::string_view to_string(OriginSplit split);
std::string_view to_string(Split split);
OriginSplit parse_origin_split(std::string_view text);
Split parse_split(std::string_view text);

inline int to_int(Label label) { return static_cast<int>(label); }

struct Example {
  std::string id;
  std::string text_source;
  std::optional<std::string> text_target;
  Label label = Label::kNotSarcastic;
  OriginSplit origin_split = OriginSplit::kTrain;
  std::optional<Split> split;

  bool operator==(const Example&) const = default;
};

struct ClassCounts {
  std::size_t sarcastic = 0;
  std::size_t not_sarcastic = 0;

  std::size_t total() const { return sarcastic + not_sarcastic; }
  bool operator==(const ClassCounts&) const = default;
};

struct CorpusMetadata {
  std::string source;
  std::optional<std::uint64_t> seed;
  ClassCounts counts;

  bool operator==(const CorpusMetadata&) const = default;
};

/// An ordered, immutable collection of labeled examples.
///
/// Construction validates id uniqueness and non-empty source text, and
/// computes class counts; the metadata counts therefore always agree with
/// the examples.
class Corpus {
 public:
  Corpus() = default;
  Corpus(std::vector<Example> examples, std::string source,
         std::optional<std::uint64_t> seed = std::nullopt);

  const std::vector<Example>& examples() const { return examples_; }
  const CorpusMetadata& metadata() const { return metadata_; }
  std::size_t size() const { return examples_.size(); }
  bool empty() const { return examples_.empty(); }

  ClassCounts counts() const { return metadata_.counts; }
  ClassCounts counts(OriginSplit origin) const;
  ClassCounts counts(Split split) const;

  /// Index of the example with `id`, or nullopt.
  std::optional<std::size_t> find(std::string_view id) const;

  bool operator==(const Corpus&) const = default;

 private:
  std::vector<Example> examples_;
  CorpusMetadata metadata_;
};

/// Reads a labeled file (`.csv` or `.jsonl`, chosen by extension) with a
/// `text` column/key and a 0/1 `sarcastic` column/key. Row ids are
/// synthesized as `<origin_split>:<row index>`.
std::vector<Example> load_labeled_file(const std::filesystem::path& path, OriginSplit origin);

Corpus load_isarcasm(const std::filesystem::path& train_path, const std::filesystem::path& test_path);

/// Keeps every sarcastic example and an equal-size uniform sample (without
/// replacement) of non-sarcastic ones. Output preserves input order.
Corpus merge_and_balance(const Corpus& corpus, std::uint64_t seed);

struct SplitRatios {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;
};

/// Split sizes for `total` examples: val and test receive floor(total * ratio),
/// train absorbs the remainder.
std::array<std::size_t, 3> apportion_split_sizes(std::size_t total, const SplitRatios& ratios);

/// Assigns every example to train/val/test, stratified by label.
Corpus stratified_split(const Corpus& corpus, const SplitRatios& ratios, std::uint64_t seed);

/// Corpus JSONL: one example per line with keys in the fixed order
/// `id, text_source, text_target, label, origin_split, split`.
std::string to_jsonl(const Corpus& corpus);
std::string metadata_to_json(const CorpusMetadata& metadata);

/// Writes `<path>` (examples) and `<path>.meta.json` (metadata).
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);
Corpus load_corpus(const std::filesystem::path& path);

}  // namespace sarc
