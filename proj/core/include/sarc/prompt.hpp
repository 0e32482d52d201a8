// Copyright (c) 2026, The sarc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "sarc/corpus.hpp"

namespace sarc {

enum class PromptTask { kTranslate, kClassify };

struct FewShot {
  std::string input;
  std::string output;

  bool operator==(const FewShot&) const = default;
};

/// Instruction plus ordered few-shot demonstrations. Shots are rendered one per
/// bullet as `<input><delimiter><output>`.
struct PromptTemplate {
  PromptTask task = PromptTask::kClassify;
  std::string instruction;
  std::vector<FewShot> few_shots;
  std::string delimiter;

  bool operator==(const PromptTemplate&) const = default;
};

/// Loads a template fixture:
/// `{"task": "translate"|"classify", "instruction": str, "delimiter": str,
///   "few_shots": [{"input": str, "output": str}, ...]}`.
PromptTemplate load_prompt_template(const std::filesystem::path& path);

/// A prompt in chat form: the instruction is the system message; shots and
/// the query form the user message.
struct RenderedPrompt {
  std::string system;
  std::string user;

  /// Single-string form used for cache keys and logging.
  std::string text() const { return system + "\n\n" + user; }
  bool operator==(const RenderedPrompt&) const = default;
};

/// Throws PreconditionError when the template has no shots.
RenderedPrompt render_translation_prompt(const Example& example, const PromptTemplate& tmpl);

/// Throws PreconditionError unless the shots contain both a "0" and a "1"
/// demonstration (and nothing else).
RenderedPrompt render_classification_prompt(std::string_view text, const PromptTemplate& tmpl);

enum class LabelValue { kNotSarcastic, kSarcastic, kRefused };

struct ParsedLabel {
  LabelValue value = LabelValue::kRefused;
  std::string raw_text;
};

/// Skips leading whitespace and reads the first character: '0' or '1' give the
/// label (any trailing text is discarded), anything else is a refusal.
ParsedLabel parse_label(std::string_view raw);

}  // namespace sarc
