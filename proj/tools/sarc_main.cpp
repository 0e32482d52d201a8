// Copyright (c) 2026, The sarc Authors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end for the sarcasm-detection ensemble pipeline.
//
//   sarc build-dataset --train train.En.csv --test task_A_En_test.csv --out runs/a
//   sarc translate     --config run.json --corpus runs/a/corpus.jsonl
//   sarc classify      --config run.json --corpus runs/a/corpus.translated.jsonl
//   sarc train-meta    --config run.json
//   sarc ensemble      --config run.json --scheme mixed
//   sarc report        --config run.json --format csv
//
// Flags override values from --config; the API key is only read from the
// environment variable named by llm.api_key_env.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sarc/commands.hpp"
#include "sarc/errors.hpp"
#include "sarc/run_config.hpp"

namespace {

struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;

  std::optional<std::string> train_file, test_file, corpus, cache, predictions_dir;
  std::optional<std::vector<double>> ratios;

  std::optional<std::string> base_url, model_name, model_id, api_key_env, prompt, classify_field;
  std::optional<double> temperature;
  std::optional<int> max_tokens, max_retries, concurrency, timeout;

  std::optional<std::string> scheme, meta_model, name, train_split, val_split, eval_split;
  std::optional<std::size_t> cutoff_n, top_k;
  std::optional<double> threshold, min_coverage;
  std::optional<int> tie_label;
  std::optional<std::vector<double>> lambda_grid;
  std::optional<std::vector<std::string>> members;
  bool allow_low_coverage = false;

  std::optional<std::string> format;
  std::optional<std::vector<std::string>> include;
};

template <typename T>
void set_if(const std::optional<T>& value, T& target) {
  if (value) target = *value;
}

sarc::RunConfig effective_config(const Overrides& o, const std::string& command) {
  sarc::RunConfig c = o.config_path.empty() ? sarc::RunConfig{} : sarc::load_run_config(o.config_path);
  set_if(o.seed, c.seed);
  set_if(o.out, c.paths.output_dir);
  set_if(o.train_file, c.paths.train_file);
  set_if(o.test_file, c.paths.test_file);
  set_if(o.corpus, c.paths.corpus);
  set_if(o.cache, c.paths.cache);
  set_if(o.predictions_dir, c.paths.predictions_dir);
  if (o.ratios) {
    if (o.ratios->size() != 3) throw sarc::PreconditionError("config error: --ratios: expected three values");
    c.split_ratios = {(*o.ratios)[0], (*o.ratios)[1], (*o.ratios)[2]};
  }

  set_if(o.base_url, c.llm.client.base_url);
  set_if(o.model_name, c.llm.client.model_name);
  set_if(o.model_id, c.llm.model_id);
  set_if(o.api_key_env, c.llm.api_key_env);
  set_if(o.temperature, c.llm.client.temperature);
  set_if(o.max_tokens, c.llm.client.max_output_tokens);
  set_if(o.max_retries, c.llm.client.max_retries);
  set_if(o.concurrency, c.llm.client.concurrency_limit);
  if (o.timeout) c.llm.client.request_timeout = std::chrono::seconds(*o.timeout);
  if (o.prompt) (command == "translate" ? c.llm.translate_prompt : c.llm.classify_prompt) = *o.prompt;
  if (o.classify_field) {
    if (*o.classify_field == "target") {
      c.llm.classify_field = sarc::ClassifyField::kTarget;
    } else if (*o.classify_field == "source") {
      c.llm.classify_field = sarc::ClassifyField::kSource;
    } else {
      throw sarc::PreconditionError("config error: --field: must be target or source");
    }
  }

  auto& e = c.ensemble;
  set_if(o.scheme, e.scheme);
  set_if(o.meta_model, e.meta_model);
  set_if(o.name, e.name);
  if (o.cutoff_n) e.cutoff_n = *o.cutoff_n;
  set_if(o.top_k, e.top_k);
  set_if(o.threshold, e.threshold);
  set_if(o.min_coverage, e.min_coverage);
  set_if(o.tie_label, e.tie_label);
  set_if(o.lambda_grid, e.lambda_grid);
  set_if(o.members, e.members);
  if (o.allow_low_coverage) e.allow_low_coverage = true;
  try {
    if (o.train_split) e.train_split = sarc::parse_split(*o.train_split);
    if (o.val_split) e.val_split = sarc::parse_split(*o.val_split);
    if (o.eval_split) e.eval_split = sarc::parse_split(*o.eval_split);
  } catch (const sarc::InputError& err) {
    throw sarc::PreconditionError(std::string("config error: ") + err.what());
  }

  set_if(o.format, c.report.format);
  set_if(o.include, c.report.include);
  return c;
}

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "Run-config JSON file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "Seed for sampling and splitting");
  cmd->add_option("--out", o.out, "Output directory");
}

void add_llm(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--corpus", o.corpus, "Corpus JSONL");
  cmd->add_option("--cache", o.cache, "Completion cache JSONL");
  cmd->add_option("--base-url", o.base_url, "OpenAI-compatible API base URL");
  cmd->add_option("--model", o.model_name, "Model name sent to the endpoint");
  cmd->add_option("--api-key-env", o.api_key_env, "Environment variable holding the API key");
  cmd->add_option("--prompt", o.prompt, "Prompt template fixture");
  cmd->add_option("--temperature", o.temperature);
  cmd->add_option("--max-tokens", o.max_tokens);
  cmd->add_option("--max-retries", o.max_retries);
  cmd->add_option("--concurrency", o.concurrency, "Maximum in-flight requests");
  cmd->add_option("--timeout", o.timeout, "Request timeout in seconds");
}

void add_ensemble(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--corpus", o.corpus, "Corpus JSONL with split assignments");
  cmd->add_option("--predictions", o.predictions_dir, "Directory of prediction JSONL files");
  cmd->add_option("--members", o.members, "Restrict to these model ids");
  cmd->add_option("--train-split", o.train_split);
  cmd->add_option("--val-split", o.val_split);
  cmd->add_option("--eval-split", o.eval_split);
  cmd->add_option("--min-coverage", o.min_coverage);
  cmd->add_flag("--allow-low-coverage", o.allow_low_coverage, "Warn instead of failing on sparse models");
  cmd->add_option("--name", o.name, "System name used in reports");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sarcasm-detection dataset, LLM labeling and ensemble pipeline"};
  app.require_subcommand(1);
  Overrides o;

  auto* build = app.add_subcommand("build-dataset", "Load, balance and split the labeled corpus");
  add_common(build, o);
  build->add_option("--train", o.train_file, "Official train split (.csv or .jsonl)");
  build->add_option("--test", o.test_file, "Official test split (.csv or .jsonl)");
  build->add_option("--ratios", o.ratios, "train val test fractions")->expected(3);

  auto* translate = app.add_subcommand("translate", "Translate the corpus with few-shot prompting");
  add_common(translate, o);
  add_llm(translate, o);

  auto* classify = app.add_subcommand("classify", "Few-shot classify the corpus into prediction JSONL");
  add_common(classify, o);
  add_llm(classify, o);
  classify->add_option("--model-id", o.model_id, "model_id written into prediction records");
  classify->add_option("--predictions", o.predictions_dir, "Output directory for prediction files");
  classify->add_option("--field", o.classify_field, "Text to classify: target or source");

  auto* train_meta = app.add_subcommand("train-meta", "Train the ridge logistic-regression stacker");
  add_common(train_meta, o);
  add_ensemble(train_meta, o);
  train_meta->add_option("--lambda-grid", o.lambda_grid, "Candidate L2 strengths");
  train_meta->add_option("--top-k", o.top_k, "Number of models to select by |weight|");

  auto* ensemble = app.add_subcommand("ensemble", "Evaluate a voting or stacking ensemble");
  add_common(ensemble, o);
  add_ensemble(ensemble, o);
  ensemble->add_option("--scheme", o.scheme, "hard, soft, mixed or stacking");
  ensemble->add_option("--n", o.cutoff_n, "Mixed-voting cutoff (tuned on validation when omitted)");
  ensemble->add_option("--threshold", o.threshold);
  ensemble->add_option("--tie-label", o.tie_label);
  ensemble->add_option("--meta-model", o.meta_model, "Trained meta model (stacking, or top-k members)");
  ensemble->add_option("--top-k", o.top_k);

  auto* report = app.add_subcommand("report", "Summarize systems as a results table");
  add_common(report, o);
  report->add_option("--corpus", o.corpus);
  report->add_option("--predictions", o.predictions_dir, "Evaluate each model file found here");
  report->add_option("--eval-split", o.eval_split);
  report->add_option("--include", o.include, "Ensemble *.report.json files to merge");
  report->add_option("--format", o.format, "text, csv or json");
  report->add_option("--min-coverage", o.min_coverage);
  report->add_flag("--allow-low-coverage", o.allow_low_coverage);

  CLI11_PARSE(app, argc, argv);

  const std::string command = app.get_subcommands().front()->get_name();
  auto env = sarc::CommandEnv::process_defaults();
  sarc::RunConfig config;
  try {
    config = effective_config(o, command);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return sarc::kExitConfig;
  }
  return sarc::run_command(command, config, env);
}
