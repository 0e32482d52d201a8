// Copyright (c) 2026, The sarc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sarc/batch.hpp"
#include "sarc/corpus.hpp"
#include "sarc/eval.hpp"
#include "sarc/llm_client.hpp"
#include "sarc/voting.hpp"

namespace sarc {

/// Everything a pipeline stage needs. Loaded from a JSON file, then
/// overridden by command-line flags; the effective result is echoed next to
/// each command's outputs.
struct RunConfig {
  struct Paths {
    std::string train_file;       // official train split (CSV/JSONL)
    std::string test_file;        // official test split
    std::string corpus;           // corpus JSONL consumed by later stages
    std::string cache = "cache/completions.jsonl";
    std::string predictions_dir = "predictions";
    std::string output_dir = "out";
  } paths;

  std::uint64_t seed = 42;
  SplitRatios split_ratios;

  struct Llm {
    LlmConfig client;
    std::string api_key_env = "OPENAI_API_KEY";
    std::string translate_prompt = "data/prompts/translate.json";
    std::string classify_prompt = "data/prompts/classify.json";
    /// model_id written into prediction records; defaults to client.model_name.
    std::string model_id;
    ClassifyField classify_field = ClassifyField::kTarget;
  } llm;

  struct Ensemble {
    std::vector<double> lambda_grid{0.001, 0.01, 0.1, 1.0, 10.0};
    double tolerance = 1e-8;
    int max_iters = 10000;
    std::size_t top_k = 5;
    /// "hard", "soft", "mixed" or "stacking".
    std::string scheme = "hard";
    /// Mixed-voting cutoff; tuned on the validation split when unset.
    std::optional<std::size_t> cutoff_n;
    double threshold = 0.5;
    int tie_label = 0;
    Split train_split = Split::kTrain;
    Split val_split = Split::kVal;
    Split eval_split = Split::kTest;
    double min_coverage = 0.5;
    bool allow_low_coverage = false;
    /// Explicit ensemble members; empty means every model (or top-k when a
    /// meta model is given).
    std::vector<std::string> members;
    std::string meta_model;  // path to a trained meta model JSON
    std::string name;        // system name in reports; derived when empty
  } ensemble;

  struct Report {
    std::string format = "text";
    std::vector<std::string> include;  // *.report.json files to merge
  } report;
};

/// Parses a config document; unknown keys and wrong types are errors naming
/// the offending field (e.g. "ensemble.top_k").
RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::filesystem::path& path);

/// Effective config as JSON. The API key itself is never included.
std::string run_config_to_json(const RunConfig& config);

/// Range checks that do not touch the filesystem; throws PreconditionError
/// with a field-level message.
void validate_run_config(const RunConfig& config);

}  // namespace sarc
