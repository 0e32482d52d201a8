// Copyright (c) 2026, The sarc Authors
// SPDX-License-Identifier: Apache-2.0

#include "sarc/run_config.hpp"

#include <fmt/format.h>

#include <cmath>
#include <set>

#include "json.hpp"
#include "sarc/errors.hpp"
#include "sarc/io.hpp"

namespace sarc {
namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

[[noreturn]] void field_error(const std::string& field, const std::string& why) {
  throw PreconditionError(fmt::format("config error: {}: {}", field, why));
}

// Reads typed members of one JSON object, rejecting keys nobody asked for.
class Section {
 public:
  Section(const json& node, std::string prefix) : node_(node), prefix_(std::move(prefix)) {
    if (!node_.is_object()) field_error(prefix_.empty() ? "<root>" : prefix_, "must be an object");
  }
  void finish() const {
    for (const auto& [key, value] : node_.items()) {
      if (!seen_.count(key)) field_error(path(key), "unknown key");
    }
  }

  std::string path(const std::string& key) const { return prefix_.empty() ? key : prefix_ + "." + key; }

  const json* find(const std::string& key) {
    seen_.insert(key);
    auto it = node_.find(key);
    return it == node_.end() ? nullptr : &*it;
  }

  template <typename T>
  void get(const std::string& key, T& out) {
    const json* v = find(key);
    if (!v) return;
    try {
      out = v->get<T>();
    } catch (const json::exception&) {
      field_error(path(key), "has the wrong type");
    }
  }

  template <typename F>
  void with(const std::string& key, F&& f) {
    const json* v = find(key);
    if (!v) return;
    Section child(*v, path(key));
    f(child);
    child.finish();
  }

 private:
  const json& node_;
  std::string prefix_;
  std::set<std::string> seen_;
};

Split split_field(Section& s, const std::string& key, Split fallback) {
  std::string text(to_string(fallback));
  s.get(key, text);
  try {
    return parse_split(text);
  } catch (const InputError&) {
    field_error(s.path(key), "must be train, val or test");
  }
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw PreconditionError(fmt::format("config error: invalid JSON ({})", e.what()));
  }

  RunConfig c;
  Section root(doc, "");
  root.with("paths", [&](Section& s) {
    s.get("train_file", c.paths.train_file);
    s.get("test_file", c.paths.test_file);
    s.get("corpus", c.paths.corpus);
    s.get("cache", c.paths.cache);
    s.get("predictions_dir", c.paths.predictions_dir);
    s.get("output_dir", c.paths.output_dir);
  });
  root.get("seed", c.seed);
  if (const json* r = root.find("split_ratios")) {
    std::vector<double> ratios;
    try {
      ratios = r->get<std::vector<double>>();
    } catch (const json::exception&) {
      field_error("split_ratios", "must be an array of three numbers");
    }
    if (ratios.size() != 3) field_error("split_ratios", "must have exactly three entries (train, val, test)");
    c.split_ratios = {ratios[0], ratios[1], ratios[2]};
  }
  root.with("llm", [&](Section& s) {
    auto& l = c.llm.client;
    s.get("base_url", l.base_url);
    s.get("model_name", l.model_name);
    s.get("temperature", l.temperature);
    s.get("max_output_tokens", l.max_output_tokens);
    s.get("max_retries", l.max_retries);
    s.get("concurrency_limit", l.concurrency_limit);
    long long timeout = l.request_timeout.count();
    s.get("request_timeout", timeout);
    l.request_timeout = std::chrono::seconds(timeout);
    long long backoff_initial = l.backoff_initial.count();
    long long backoff_max = l.backoff_max.count();
    s.get("backoff_initial_ms", backoff_initial);
    s.get("backoff_max_ms", backoff_max);
    l.backoff_initial = std::chrono::milliseconds(backoff_initial);
    l.backoff_max = std::chrono::milliseconds(backoff_max);
    s.get("api_key_env", c.llm.api_key_env);
    s.get("translate_prompt", c.llm.translate_prompt);
    s.get("classify_prompt", c.llm.classify_prompt);
    s.get("model_id", c.llm.model_id);
    std::string field = c.llm.classify_field == ClassifyField::kTarget ? "target" : "source";
    s.get("classify_field", field);
    if (field == "target") {
      c.llm.classify_field = ClassifyField::kTarget;
    } else if (field == "source") {
      c.llm.classify_field = ClassifyField::kSource;
    } else {
      field_error("llm.classify_field", "must be target or source");
    }
  });
  root.with("ensemble", [&](Section& s) {
    auto& e = c.ensemble;
    s.get("lambda_grid", e.lambda_grid);
    s.get("tolerance", e.tolerance);
    s.get("max_iters", e.max_iters);
    s.get("top_k", e.top_k);
    s.get("scheme", e.scheme);
    if (const json* n = s.find("cutoff_n")) {
      if (n->is_null()) {
        e.cutoff_n.reset();
      } else if (n->is_number_unsigned()) {
        e.cutoff_n = n->get<std::size_t>();
      } else {
        field_error("ensemble.cutoff_n", "must be a non-negative integer or null");
      }
    }
    s.get("threshold", e.threshold);
    s.get("tie_label", e.tie_label);
    e.train_split = split_field(s, "train_split", e.train_split);
    e.val_split = split_field(s, "val_split", e.val_split);
    e.eval_split = split_field(s, "eval_split", e.eval_split);
    s.get("min_coverage", e.min_coverage);
    s.get("allow_low_coverage", e.allow_low_coverage);
    s.get("members", e.members);
    s.get("meta_model", e.meta_model);
    s.get("name", e.name);
  });
  root.with("report", [&](Section& s) {
    s.get("format", c.report.format);
    s.get("include", c.report.include);
  });
  root.finish();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const InputError& e) {
    throw PreconditionError(fmt::format("config error: {}", e.what()));
  }
  return parse_run_config(text);
}

std::string run_config_to_json(const RunConfig& c) {
  ojson j;
  j["paths"] = {{"train_file", c.paths.train_file},         {"test_file", c.paths.test_file},
                {"corpus", c.paths.corpus},                 {"cache", c.paths.cache},
                {"predictions_dir", c.paths.predictions_dir}, {"output_dir", c.paths.output_dir}};
  j["seed"] = c.seed;
  j["split_ratios"] = {c.split_ratios.train, c.split_ratios.val, c.split_ratios.test};
  const auto& l = c.llm.client;
  j["llm"] = {{"base_url", l.base_url},
              {"model_name", l.model_name},
              {"temperature", l.temperature},
              {"max_output_tokens", l.max_output_tokens},
              {"max_retries", l.max_retries},
              {"request_timeout", l.request_timeout.count()},
              {"concurrency_limit", l.concurrency_limit},
              {"backoff_initial_ms", l.backoff_initial.count()},
              {"backoff_max_ms", l.backoff_max.count()},
              {"api_key_env", c.llm.api_key_env},
              {"translate_prompt", c.llm.translate_prompt},
              {"classify_prompt", c.llm.classify_prompt},
              {"model_id", c.llm.model_id},
              {"classify_field", c.llm.classify_field == ClassifyField::kTarget ? "target" : "source"}};
  const auto& e = c.ensemble;
  j["ensemble"] = {{"lambda_grid", e.lambda_grid},
                   {"tolerance", e.tolerance},
                   {"max_iters", e.max_iters},
                   {"top_k", e.top_k},
                   {"scheme", e.scheme},
                   {"cutoff_n", e.cutoff_n ? ojson(*e.cutoff_n) : ojson(nullptr)},
                   {"threshold", e.threshold},
                   {"tie_label", e.tie_label},
                   {"train_split", std::string(to_string(e.train_split))},
                   {"val_split", std::string(to_string(e.val_split))},
                   {"eval_split", std::string(to_string(e.eval_split))},
                   {"min_coverage", e.min_coverage},
                   {"allow_low_coverage", e.allow_low_coverage},
                   {"members", e.members},
                   {"meta_model", e.meta_model},
                   {"name", e.name}};
  j["report"] = {{"format", c.report.format}, {"include", c.report.include}};
  return j.dump(2) + "\n";
}

void validate_run_config(const RunConfig& c) {
  const auto& r = c.split_ratios;
  if (!(r.train > 0 && r.val > 0 && r.test > 0)) field_error("split_ratios", "every ratio must be > 0");
  if (std::abs(r.train + r.val + r.test - 1.0) > 1e-9) field_error("split_ratios", "must sum to 1");
  try {
    c.llm.client.validate();
  } catch (const PreconditionError& e) {
    throw PreconditionError(fmt::format("config error: {}", e.what()));
  }
  const auto& e = c.ensemble;
  if (e.lambda_grid.empty()) field_error("ensemble.lambda_grid", "must not be empty");
  for (double l : e.lambda_grid) {
    if (!(l >= 0.0) || !std::isfinite(l)) field_error("ensemble.lambda_grid", "values must be finite and >= 0");
  }
  if (!(e.tolerance > 0.0)) field_error("ensemble.tolerance", "must be > 0");
  if (e.max_iters < 1) field_error("ensemble.max_iters", "must be >= 1");
  if (e.top_k < 1) field_error("ensemble.top_k", "must be >= 1");
  if (e.scheme != "hard" && e.scheme != "soft" && e.scheme != "mixed" && e.scheme != "stacking") {
    field_error("ensemble.scheme", "must be hard, soft, mixed or stacking");
  }
  if (!(e.threshold >= 0.0 && e.threshold <= 1.0)) field_error("ensemble.threshold", "must lie in [0, 1]");
  if (e.tie_label != 0 && e.tie_label != 1) field_error("ensemble.tie_label", "must be 0 or 1");
  if (!(e.min_coverage >= 0.0 && e.min_coverage <= 1.0)) field_error("ensemble.min_coverage", "must lie in [0, 1]");
  const auto& f = c.report.format;
  if (f != "text" && f != "csv" && f != "json") field_error("report.format", "must be text, csv or json");
}

}  // namespace sarc
