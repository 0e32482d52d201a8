// Copyright (c) 2026, The sarc Authors
// SPDX-License-Identifier: Apache-2.0

#include "sarc/corpus.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "csv.hpp"
#include "json.hpp"
#include "sarc/errors.hpp"
#include "sarc/io.hpp"
#include "sarc/rng.hpp"

namespace sarc {

using ojson = nlohmann::ordered_json;

std::string_view to_string(OriginSplit split) {
  return split == OriginSplit::kTrain ? "orig_train" : "orig_test";
}

std::string_view to_string(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "?";
}

OriginSplit parse_origin_split(std::string_view text) {
  if (text == "orig_train") return OriginSplit::kTrain;
  if (text == "orig_test") return OriginSplit::kTest;
  throw InputError(fmt::format("unknown origin_split '{}'", text));
}

Split parse_split(std::string_view text) {
  if (text == "train") return Split::kTrain;
  if (text == "val") return Split::kVal;
  if (text == "test") return Split::kTest;
  throw InputError(fmt::format("unknown split '{}' (expected train, val or test)", text));
}

Corpus::Corpus(std::vector<Example> examples, std::string source, std::optional<std::uint64_t> seed)
    : examples_(std::move(examples)) {
  metadata_.source = std::move(source);
  metadata_.seed = seed;
  std::unordered_set<std::string_view> seen;
  seen.reserve(examples_.size());
  for (const auto& ex : examples_) {
    if (!seen.insert(ex.id).second) throw InputError(fmt::format("duplicate example id '{}'", ex.id));
    if (ex.text_source.empty()) throw InputError(fmt::format("example '{}' has empty text", ex.id));
    if (ex.label == Label::kSarcastic) {
      ++metadata_.counts.sarcastic;
    } else {
      ++metadata_.counts.not_sarcastic;
    }
  }
}

ClassCounts Corpus::counts(OriginSplit origin) const {
  ClassCounts c;
  for (const auto& ex : examples_) {
    if (ex.origin_split != origin) continue;
    ex.label == Label::kSarcastic ? ++c.sarcastic : ++c.not_sarcastic;
  }
  return c;
}

ClassCounts Corpus::counts(Split split) const {
  ClassCounts c;
  for (const auto& ex : examples_) {
    if (ex.split != split) continue;
    ex.label == Label::kSarcastic ? ++c.sarcastic : ++c.not_sarcastic;
  }
  return c;
}

std::optional<std::size_t> Corpus::find(std::string_view id) const {
  for (std::size_t i = 0; i < examples_.size(); ++i) {
    if (examples_[i].id == id) return i;
  }
  return std::nullopt;
}

namespace {

Label parse_label_field(std::string_view value, const std::filesystem::path& path, std::size_t line) {
  if (value == "0") return Label::kNotSarcastic;
  if (value == "1") return Label::kSarcastic;
  throw InputError(fmt::format("{}:{}: 'sarcastic' must be 0 or 1, got '{}'", path.string(), line, value));
}

Example make_example(std::string text, Label label, OriginSplit origin, std::size_t row) {
  Example ex;
  ex.id = fmt::format("{}:{}", to_string(origin), row);
  ex.text_source = std::move(text);
  ex.label = label;
  ex.origin_split = origin;
  return ex;
}

std::vector<Example> load_csv(const std::filesystem::path& path, OriginSplit origin) {
  const auto records = detail::parse_csv(read_file(path));
  std::vector<Example> out;
  if (records.empty()) return out;

  const auto& header = records.front().fields;
  auto column = [&](std::initializer_list<std::string_view> names) -> std::optional<std::size_t> {
    for (auto name : names) {
      auto it = std::find(header.begin(), header.end(), name);
      if (it != header.end()) return static_cast<std::size_t>(it - header.begin());
    }
    return std::nullopt;
  };
  // The official training file names its text column `tweet`.
  const auto text_col = column({"text", "tweet"});
  const auto label_col = column({"sarcastic"});
  if (!text_col || !label_col) {
    throw InputError(fmt::format("{}:1: header must contain 'text' and 'sarcastic' columns", path.string()));
  }

  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.fields.size() != header.size()) {
      throw InputError(fmt::format("{}:{}: expected {} fields, found {}", path.string(), rec.line,
                                   header.size(), rec.fields.size()));
    }
    const auto& text = rec.fields[*text_col];
    if (text.empty()) throw InputError(fmt::format("{}:{}: empty text", path.string(), rec.line));
    out.push_back(make_example(text, parse_label_field(rec.fields[*label_col], path, rec.line), origin,
                               out.size()));
  }
  return out;
}

std::vector<Example> load_jsonl(const std::filesystem::path& path, OriginSplit origin) {
  const auto contents = read_file(path);
  std::vector<Example> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < contents.size()) {
    auto end = contents.find('\n', pos);
    if (end == std::string::npos) end = contents.size();
    std::string_view line(contents.data() + pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;

    nlohmann::json row;
    try {
      row = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw InputError(fmt::format("{}:{}: invalid JSON ({})", path.string(), line_no, e.what()));
    }
    if (!row.is_object() || !row.contains("text") || !row["text"].is_string() || !row.contains("sarcastic")) {
      throw InputError(fmt::format("{}:{}: expected object with string 'text' and 'sarcastic'", path.string(),
                                   line_no));
    }
    const auto& raw_label = row["sarcastic"];
    if (!raw_label.is_number_integer()) {
      throw InputError(fmt::format("{}:{}: 'sarcastic' must be 0 or 1", path.string(), line_no));
    }
    auto text = row["text"].get<std::string>();
    if (text.empty()) throw InputError(fmt::format("{}:{}: empty text", path.string(), line_no));
    out.push_back(make_example(std::move(text),
                               parse_label_field(std::to_string(raw_label.get<long long>()), path, line_no),
                               origin, out.size()));
  }
  return out;
}

}  // namespace

std::vector<Example> load_labeled_file(const std::filesystem::path& path, OriginSplit origin) {
  const auto ext = path.extension().string();
  if (ext == ".csv") return load_csv(path, origin);
  if (ext == ".jsonl") return load_jsonl(path, origin);
  throw InputError(fmt::format("{}: unsupported extension '{}' (expected .csv or .jsonl)", path.string(), ext));
}

Corpus load_isarcasm(const std::filesystem::path& train_path, const std::filesystem::path& test_path) {
  auto examples = load_labeled_file(train_path, OriginSplit::kTrain);
  auto test = load_labeled_file(test_path, OriginSplit::kTest);
  examples.insert(examples.end(), std::make_move_iterator(test.begin()), std::make_move_iterator(test.end()));
  return Corpus(std::move(examples), "isarcasmeval-en");
}

Corpus merge_and_balance(const Corpus& corpus, std::uint64_t seed) {
  const auto counts = corpus.counts();
  if (counts.sarcastic == 0) throw PreconditionError("merge_and_balance: corpus has no sarcastic examples");
  if (counts.not_sarcastic < counts.sarcastic) {
    throw PreconditionError(fmt::format(
        "merge_and_balance: {} non-sarcastic examples cannot balance {} sarcastic ones by downsampling",
        counts.not_sarcastic, counts.sarcastic));
  }

  std::vector<std::size_t> negatives;
  negatives.reserve(counts.not_sarcastic);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (corpus.examples()[i].label == Label::kNotSarcastic) negatives.push_back(i);
  }
  Rng rng(seed);
  rng.shuffle(std::span(negatives));

  std::vector<bool> keep(corpus.size(), false);
  for (std::size_t i = 0; i < corpus.size(); ++i) keep[i] = corpus.examples()[i].label == Label::kSarcastic;
  for (std::size_t i = 0; i < counts.sarcastic; ++i) keep[negatives[i]] = true;

  std::vector<Example> out;
  out.reserve(2 * counts.sarcastic);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (!keep[i]) continue;
    out.push_back(corpus.examples()[i]);
    out.back().split.reset();
  }
  return Corpus(std::move(out), corpus.metadata().source, seed);
}

std::array<std::size_t, 3> apportion_split_sizes(std::size_t total, const SplitRatios& ratios) {
  const std::array<double, 3> r{ratios.train, ratios.val, ratios.test};
  for (double v : r) {
    if (!(v > 0.0) || !std::isfinite(v)) throw PreconditionError("split ratios must all be positive");
  }
  if (std::abs(r[0] + r[1] + r[2] - 1.0) > 1e-9) throw PreconditionError("split ratios must sum to 1");

  std::array<std::size_t, 3> sizes{};
  sizes[1] = static_cast<std::size_t>(std::floor(static_cast<double>(total) * r[1] + 1e-9));
  sizes[2] = static_cast<std::size_t>(std::floor(static_cast<double>(total) * r[2] + 1e-9));
  if (sizes[1] + sizes[2] > total) throw PreconditionError("split ratios exceed corpus size");
  sizes[0] = total - sizes[1] - sizes[2];
  for (std::size_t i = 0; i < 3; ++i) {
    if (sizes[i] == 0) {
      throw PreconditionError(fmt::format("split '{}' would receive 0 of {} examples",
                                          to_string(static_cast<Split>(i)), total));
    }
  }
  return sizes;
}

Corpus stratified_split(const Corpus& corpus, const SplitRatios& ratios, std::uint64_t seed) {
  const auto sizes = apportion_split_sizes(corpus.size(), ratios);
  const auto counts = corpus.counts();
  const double total = static_cast<double>(corpus.size());

  // Positives per split by largest remainder over each split's proportional
  // share; negatives fill the rest of the split.
  std::array<std::size_t, 3> positives{};
  std::array<double, 3> remainder{};
  std::size_t assigned = 0;
  for (std::size_t s = 0; s < 3; ++s) {
    const double share = static_cast<double>(sizes[s]) * static_cast<double>(counts.sarcastic) / total;
    positives[s] = std::min(sizes[s], static_cast<std::size_t>(std::floor(share)));
    remainder[s] = share - std::floor(share);
    assigned += positives[s];
  }
  std::array<std::size_t, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return remainder[a] > remainder[b]; });
  for (std::size_t k = 0; assigned < counts.sarcastic; k = (k + 1) % 3) {
    const auto s = order[k];
    if (positives[s] < sizes[s]) {
      ++positives[s];
      ++assigned;
    }
  }
  std::array<std::size_t, 3> negatives{};
  for (std::size_t s = 0; s < 3; ++s) negatives[s] = sizes[s] - positives[s];
  if (negatives[0] + negatives[1] + negatives[2] != counts.not_sarcastic) {
    throw PreconditionError("stratified_split: cannot stratify this class distribution");
  }

  std::vector<std::size_t> pos_idx;
  std::vector<std::size_t> neg_idx;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    (corpus.examples()[i].label == Label::kSarcastic ? pos_idx : neg_idx).push_back(i);
  }
  Rng rng(seed);
  rng.shuffle(std::span(pos_idx));
  rng.shuffle(std::span(neg_idx));

  std::vector<Example> out = corpus.examples();
  auto assign = [&](const std::vector<std::size_t>& idx, const std::array<std::size_t, 3>& per_split) {
    std::size_t cursor = 0;
    for (std::size_t s = 0; s < 3; ++s) {
      for (std::size_t k = 0; k < per_split[s]; ++k) out[idx[cursor++]].split = static_cast<Split>(s);
    }
  };
  assign(pos_idx, positives);
  assign(neg_idx, negatives);
  return Corpus(std::move(out), corpus.metadata().source, seed);
}

namespace {

ojson example_to_json(const Example& ex) {
  ojson j;
  j["id"] = ex.id;
  j["text_source"] = ex.text_source;
  j["text_target"] = ex.text_target ? ojson(*ex.text_target) : ojson(nullptr);
  j["label"] = to_int(ex.label);
  j["origin_split"] = std::string(to_string(ex.origin_split));
  j["split"] = ex.split ? ojson(std::string(to_string(*ex.split))) : ojson(nullptr);
  return j;
}

Example example_from_json(const nlohmann::json& j, const std::string& where) {
  static constexpr std::array<std::string_view, 6> kKeys{"id",    "text_source",  "text_target",
                                                         "label", "origin_split", "split"};
  if (!j.is_object() || j.size() != kKeys.size()) {
    throw InputError(fmt::format("{}: expected object with exactly the keys id, text_source, text_target, "
                                 "label, origin_split, split",
                                 where));
  }
  for (auto key : kKeys) {
    if (!j.contains(key)) throw InputError(fmt::format("{}: missing key '{}'", where, key));
  }
  try {
    Example ex;
    ex.id = j.at("id").get<std::string>();
    ex.text_source = j.at("text_source").get<std::string>();
    if (!j.at("text_target").is_null()) ex.text_target = j.at("text_target").get<std::string>();
    const int label = j.at("label").get<int>();
    if (label != 0 && label != 1) throw InputError(fmt::format("{}: label must be 0 or 1", where));
    ex.label = static_cast<Label>(label);
    ex.origin_split = parse_origin_split(j.at("origin_split").get<std::string>());
    if (!j.at("split").is_null()) ex.split = parse_split(j.at("split").get<std::string>());
    return ex;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(fmt::format("{}: {}", where, e.what()));
  }
}

}  // namespace

std::string to_jsonl(const Corpus& corpus) {
  std::string out;
  for (const auto& ex : corpus.examples()) {
    out += example_to_json(ex).dump();
    out += '\n';
  }
  return out;
}

std::string metadata_to_json(const CorpusMetadata& metadata) {
  ojson j;
  j["source"] = metadata.source;
  j["seed"] = metadata.seed ? ojson(*metadata.seed) : ojson(nullptr);
  j["counts"] = {{"sarcastic", metadata.counts.sarcastic}, {"not_sarcastic", metadata.counts.not_sarcastic}};
  return j.dump(2) + "\n";
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::string body;
  try {
    body = to_jsonl(corpus);
  } catch (const nlohmann::json::type_error& e) {
    throw InputError(fmt::format("cannot serialize corpus: {}", e.what()));
  }
  write_file_atomic(path, body);
  auto meta_path = path;
  meta_path += ".meta.json";
  write_file_atomic(meta_path, metadata_to_json(corpus.metadata()));
}

Corpus load_corpus(const std::filesystem::path& path) {
  const auto contents = read_file(path);
  std::vector<Example> examples;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < contents.size()) {
    auto end = contents.find('\n', pos);
    if (end == std::string::npos) end = contents.size();
    std::string_view line(contents.data() + pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;
    const auto where = fmt::format("{}:{}", path.string(), line_no);
    nlohmann::json row;
    try {
      row = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw InputError(fmt::format("{}: invalid JSON ({})", where, e.what()));
    }
    examples.push_back(example_from_json(row, where));
  }

  std::string source = "corpus";
  std::optional<std::uint64_t> seed;
  std::optional<ClassCounts> recorded;
  auto meta_path = path;
  meta_path += ".meta.json";
  if (std::filesystem::exists(meta_path)) {
    try {
      const auto meta = nlohmann::json::parse(read_file(meta_path));
      source = meta.at("source").get<std::string>();
      if (!meta.at("seed").is_null()) seed = meta.at("seed").get<std::uint64_t>();
      recorded = ClassCounts{meta.at("counts").at("sarcastic").get<std::size_t>(),
                             meta.at("counts").at("not_sarcastic").get<std::size_t>()};
    } catch (const nlohmann::json::exception& e) {
      throw InputError(fmt::format("{}: {}", meta_path.string(), e.what()));
    }
  }
  Corpus corpus(std::move(examples), std::move(source), seed);
  if (recorded && *recorded != corpus.counts()) {
    throw InputError(fmt::format("{}: recorded class counts ({}/{}) disagree with the examples ({}/{})",
                                 meta_path.string(), recorded->sarcastic, recorded->not_sarcastic,
                                 corpus.counts().sarcastic, corpus.counts().not_sarcastic));
  }
  return corpus;
}

}  // namespace sarc
