// Copyright (c) 2026, The sarc Authors
// SPDX-License-Identifier: Apache-2.0

#include "sarc/prompt.hpp"

#include <fmt/format.h>

#include "json.hpp"
#include "sarc/errors.hpp"
#include "sarc/io.hpp"

namespace sarc {

PromptTemplate load_prompt_template(const std::filesystem::path& path) {
  PromptTemplate tmpl;
  try {
    const auto j = nlohmann::json::parse(read_file(path));
    const auto task = j.at("task").get<std::string>();
    if (task == "translate") {
      tmpl.task = PromptTask::kTranslate;
    } else if (task == "classify") {
      tmpl.task = PromptTask::kClassify;
    } else {
      throw InputError(fmt::format("{}: task must be 'translate' or 'classify'", path.string()));
    }
    tmpl.instruction = j.at("instruction").get<std::string>();
    tmpl.delimiter = j.at("delimiter").get<std::string>();
    for (const auto& shot : j.at("few_shots")) {
      tmpl.few_shots.push_back({shot.at("input").get<std::string>(), shot.at("output").get<std::string>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(fmt::format("{}: {}", path.string(), e.what()));
  }
  return tmpl;
}

namespace {

std::string render_shots(const PromptTemplate& tmpl) {
  std::string out;
  for (const auto& shot : tmpl.few_shots) {
    out += "- ";
    out += shot.input;
    out += tmpl.delimiter;
    out += shot.output;
    out += '\n';
  }
  return out;
}

std::string_view rtrim(std::string_view s) {
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

RenderedPrompt render(const PromptTemplate& tmpl, std::string_view query) {
  RenderedPrompt prompt;
  prompt.system = tmpl.instruction;
  prompt.user = render_shots(tmpl);
  prompt.user += "\n- ";
  prompt.user += query;
  prompt.user += rtrim(tmpl.delimiter);
  return prompt;
}

}  // namespace

RenderedPrompt render_translation_prompt(const Example& example, const PromptTemplate& tmpl) {
  if (tmpl.few_shots.empty()) throw PreconditionError("translation prompt needs at least one few-shot example");
  return render(tmpl, example.text_source);
}

RenderedPrompt render_classification_prompt(std::string_view text, const PromptTemplate& tmpl) {
  bool has_positive = false;
  bool has_negative = false;
  for (const auto& shot : tmpl.few_shots) {
    if (shot.output == "1") {
      has_positive = true;
    } else if (shot.output == "0") {
      has_negative = true;
    } else {
      throw PreconditionError(fmt::format("classification shot output must be \"0\" or \"1\", got \"{}\"",
                                          shot.output));
    }
  }
  if (!has_positive || !has_negative) {
    throw PreconditionError("classification prompt needs at least one sarcastic and one non-sarcastic shot");
  }
  return render(tmpl, text);
}

ParsedLabel parse_label(std::string_view raw) {
  ParsedLabel parsed;
  parsed.raw_text = std::string(raw);
  std::size_t i = 0;
  while (i < raw.size() && (raw[i] == ' ' || raw[i] == '\t' || raw[i] == '\n' || raw[i] == '\r' ||
                            raw[i] == '\f' || raw[i] == '\v')) {
    ++i;
  }
  if (i < raw.size() && raw[i] == '0') {
    parsed.value = LabelValue::kNotSarcastic;
  } else if (i < raw.size() && raw[i] == '1') {
    parsed.value = LabelValue::kSarcastic;
  }
  return parsed;
}

}  // namespace sarc
