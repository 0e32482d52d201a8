// Copyright (c) 2026, The sarc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "sarc/corpus.hpp"
#include "sarc/llm_client.hpp"
#include "sarc/predictions.hpp"
#include "sarc/prompt.hpp"

namespace sarc {

struct BatchFailure {
  std::string example_id;
  std::string message;
};

struct BatchSummary {
  std::size_t requests = 0;    // network completions issued
  std::size_t cache_hits = 0;
  std::vector<BatchFailure> failures;  // sorted by example id
};

struct TranslateResult {
  Corpus corpus;  // failed examples keep text_target unset
  BatchSummary summary;
};

/// Fills text_target for every example, serving repeated prompts from `cache`.
/// Per-example failures are collected in the summary; the run continues.
TranslateResult translate_corpus(const Corpus& corpus, const PromptTemplate& tmpl, ChatClient& client,
                                 ResponseCache& cache);

enum class ClassifyField { kTarget, kSource };

struct ClassifyResult {
  /// One prediction per successfully processed example, in corpus order.
  std::vector<Prediction> predictions;
  BatchSummary summary;
};

/// Few-shot classifies each example and maps the parsed token to
/// p_sarcastic in {0, 1}, or status refused.
ClassifyResult classify_corpus(const Corpus& corpus, const PromptTemplate& tmpl, ChatClient& client,
                               const std::string& model_id, ResponseCache& cache,
                               ClassifyField field = ClassifyField::kTarget);

}  // namespace sarc
