// Copyright (c) 2026, The sarc Authors
// SPDX-License-Identifier: Apache-2.0

#include "sarc/commands.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <algorithm>
#include <cstdlib>
#include <iostream>
#include <set>

#include "json.hpp"
#include "sarc/batch.hpp"
#include "sarc/corpus.hpp"
#include "sarc/errors.hpp"
#include "sarc/eval.hpp"
#include "sarc/hash.hpp"
#include "sarc/io.hpp"
#include "sarc/meta_learner.hpp"
#include "sarc/prompt.hpp"
#include "sarc/voting.hpp"

namespace sarc {

namespace fs = std::filesystem;

CommandEnv CommandEnv::process_defaults() {
  CommandEnv env;
  env.out = &std::cout;
  env.err = &std::cerr;
  env.getenv = [](const std::string& name) -> std::optional<std::string> {
    const char* v = std::getenv(name.c_str());
    if (!v) return std::nullopt;
    return std::string(v);
  };
  return env;
}

std::string sanitize_file_stem(const std::string& id) {
  std::string out;
  for (char c : id) {
    const bool safe = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' ||
                      c == '_' || c == '.';
    out.push_back(safe ? c : '_');
  }
  return out.empty() ? "_" : out;
}

std::map<std::string, std::vector<Prediction>> load_prediction_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw InputError(fmt::format("predictions directory '{}' not found", dir.string()));
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  std::map<std::string, std::vector<Prediction>> by_model;
  std::map<std::string, fs::path> origin;
  for (const auto& file : files) {
    auto grouped = group_by_model(ingest(file).records);
    for (auto& [model, records] : grouped) {
      auto [it, inserted] = origin.emplace(model, file);
      if (!inserted) {
        throw InputError(fmt::format("model '{}' appears in both '{}' and '{}'", model, it->second.string(),
                                     file.string()));
      }
      by_model[model] = std::move(records);
    }
  }
  return by_model;
}

namespace {

std::ostream& out(CommandEnv& env) { return env.out ? *env.out : std::cout; }
std::ostream& err(CommandEnv& env) { return env.err ? *env.err : std::cerr; }

void require_file(const std::string& value, const std::string& field) {
  if (value.empty()) throw PreconditionError(fmt::format("config error: {}: required", field));
  if (!fs::exists(value)) {
    throw PreconditionError(fmt::format("config error: {}: '{}' does not exist", field, value));
  }
}

void echo_config(const RunConfig& config, const std::string& command) {
  write_file_atomic(fs::path(config.paths.output_dir) / (command + ".config.json"), run_config_to_json(config));
}

ChatClient make_client(const RunConfig& config, CommandEnv& env) {
  LlmConfig llm = config.llm.client;
  if (!config.llm.api_key_env.empty() && env.getenv) {
    if (auto key = env.getenv(config.llm.api_key_env)) llm.api_key = *key;
  }
  auto transport = env.transport ? env.transport : make_http_transport();
  return ChatClient(std::move(llm), std::move(transport));
}

void print_failures(CommandEnv& env, const BatchSummary& summary) {
  for (const auto& f : summary.failures) err(env) << fmt::format("  failed {}: {}\n", f.example_id, f.message);
}

std::map<std::string, std::vector<Prediction>> restrict_models(std::map<std::string, std::vector<Prediction>> all,
                                                               const std::vector<std::string>& members) {
  if (members.empty()) return all;
  std::map<std::string, std::vector<Prediction>> out;
  for (const auto& m : members) {
    auto it = all.find(m);
    if (it == all.end()) throw PreconditionError(fmt::format("config error: ensemble.members: no predictions for '{}'", m));
    out[m] = std::move(it->second);
  }
  return out;
}

AlignOptions align_options(const RunConfig& config, Split split) {
  AlignOptions options;
  options.split = split;
  options.min_coverage = config.ensemble.min_coverage;
  options.allow_low_coverage = config.ensemble.allow_low_coverage;
  return options;
}

AlignResult align_split(const std::map<std::string, std::vector<Prediction>>& models, const Corpus& corpus,
                        const RunConfig& config, Split split, CommandEnv& env) {
  auto result = align(models, corpus, align_options(config, split));
  for (const auto& w : result.warnings) err(env) << "warning: " << w << "\n";
  if (result.matrix.rows() == 0) {
    throw PreconditionError(fmt::format("no examples of split '{}' have ok predictions from every model",
                                        to_string(split)));
  }
  return result;
}

std::string upper(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return s;
}

void write_system_report(const RunConfig& config, const SystemResult& system) {
  EvalReport report;
  report.seed = config.seed;
  report.systems.push_back(system);
  write_file_atomic(fs::path(config.paths.output_dir) / (sanitize_file_stem(system.name) + ".report.json"),
                    emit_report(report, ReportFormat::kJson));
}

}  // namespace

int cmd_build_dataset(const RunConfig& config, CommandEnv& env) {
  validate_run_config(config);
  require_file(config.paths.train_file, "paths.train_file");
  require_file(config.paths.test_file, "paths.test_file");

  const auto raw = load_isarcasm(config.paths.train_file, config.paths.test_file);
  const auto train_counts = raw.counts(OriginSplit::kTrain);
  const auto test_counts = raw.counts(OriginSplit::kTest);
  out(env) << fmt::format("loaded orig_train {}/{} and orig_test {}/{} (sarcastic/non-sarcastic)\n",
                          train_counts.sarcastic, train_counts.not_sarcastic, test_counts.sarcastic,
                          test_counts.not_sarcastic);

  const auto balanced = merge_and_balance(raw, config.seed);
  const auto split = stratified_split(balanced, config.split_ratios, config.seed);
  const auto counts = split.counts();
  out(env) << fmt::format("{} examples ({}/{})\n", split.size(), counts.sarcastic, counts.not_sarcastic);
  for (auto s : {Split::kTrain, Split::kVal, Split::kTest}) {
    const auto c = split.counts(s);
    out(env) << fmt::format("  {:<5} {:>5} ({}/{})\n", to_string(s), c.total(), c.sarcastic, c.not_sarcastic);
  }

  const auto path = fs::path(config.paths.output_dir) / "corpus.jsonl";
  save_corpus(split, path);
  echo_config(config, "build-dataset");
  out(env) << "wrote " << path.string() << "\n";
  return kExitOk;
}

int cmd_translate(const RunConfig& config, CommandEnv& env) {
  validate_run_config(config);
  require_file(config.paths.corpus, "paths.corpus");
  require_file(config.llm.translate_prompt, "llm.translate_prompt");

  const auto corpus = load_corpus(config.paths.corpus);
  const auto tmpl = load_prompt_template(config.llm.translate_prompt);
  if (tmpl.task != PromptTask::kTranslate) {
    throw PreconditionError("config error: llm.translate_prompt: template task is not 'translate'");
  }
  auto client = make_client(config, env);
  ResponseCache cache(config.paths.cache);
  const auto result = translate_corpus(corpus, tmpl, client, cache);
  out(env) << fmt::format("translated {}/{} examples ({} requests, {} cached)\n",
                          corpus.size() - result.summary.failures.size(), corpus.size(), result.summary.requests,
                          result.summary.cache_hits);
  echo_config(config, "translate");
  if (!result.summary.failures.empty()) {
    err(env) << fmt::format("{} example(s) failed; rerun to resume from the cache\n", result.summary.failures.size());
    print_failures(env, result.summary);
    return kExitFailure;
  }
  const auto path = fs::path(config.paths.output_dir) / "corpus.translated.jsonl";
  save_corpus(result.corpus, path);
  out(env) << "wrote " << path.string() << "\n";
  return kExitOk;
}

int cmd_classify(const RunConfig& config, CommandEnv& env) {
  validate_run_config(config);
  require_file(config.paths.corpus, "paths.corpus");
  require_file(config.llm.classify_prompt, "llm.classify_prompt");

  const auto corpus = load_corpus(config.paths.corpus);
  const auto tmpl = load_prompt_template(config.llm.classify_prompt);
  if (tmpl.task != PromptTask::kClassify) {
    throw PreconditionError("config error: llm.classify_prompt: template task is not 'classify'");
  }
  const auto model_id = config.llm.model_id.empty() ? config.llm.client.model_name : config.llm.model_id;
  auto client = make_client(config, env);
  ResponseCache cache(config.paths.cache);
  const auto result = classify_corpus(corpus, tmpl, client, model_id, cache, config.llm.classify_field);

  std::size_t refused = 0;
  for (const auto& p : result.predictions) refused += p.status == PredictionStatus::kRefused;
  out(env) << fmt::format("classified {}/{} examples with '{}' ({} refused; {} requests, {} cached)\n",
                          result.predictions.size(), corpus.size(), model_id, refused, result.summary.requests,
                          result.summary.cache_hits);
  echo_config(config, "classify");
  if (!result.summary.failures.empty()) {
    err(env) << fmt::format("{} example(s) failed; rerun to resume from the cache\n", result.summary.failures.size());
    print_failures(env, result.summary);
    return kExitFailure;
  }

  const auto dir = fs::path(config.paths.predictions_dir);
  const auto stem = sanitize_file_stem(model_id);
  save_predictions(result.predictions, dir / (stem + ".jsonl"));

  // Run metadata: the shots are fixed for the whole run and recorded here.
  nlohmann::ordered_json meta;
  meta["model_id"] = model_id;
  meta["model_name"] = config.llm.client.model_name;
  meta["seed"] = config.seed;
  meta["temperature"] = config.llm.client.temperature;
  meta["classify_field"] = config.llm.classify_field == ClassifyField::kTarget ? "target" : "source";
  meta["instruction"] = tmpl.instruction;
  auto shots = nlohmann::ordered_json::array();
  for (const auto& s : tmpl.few_shots) shots.push_back({{"input", s.input}, {"output", s.output}});
  meta["few_shots"] = std::move(shots);
  meta["ok"] = result.predictions.size() - refused;
  meta["refused"] = refused;
  write_file_atomic(dir / (stem + ".meta.json"), meta.dump(2) + "\n");
  out(env) << "wrote " << (dir / (stem + ".jsonl")).string() << "\n";
  return kExitOk;
}

int cmd_train_meta(const RunConfig& config, CommandEnv& env) {
  validate_run_config(config);
  require_file(config.paths.corpus, "paths.corpus");
  require_file(config.paths.predictions_dir, "paths.predictions_dir");
  const auto& ens = config.ensemble;

  const auto corpus = load_corpus(config.paths.corpus);
  const auto models = restrict_models(load_prediction_dir(config.paths.predictions_dir), ens.members);
  if (models.empty()) throw PreconditionError("no prediction files found");

  const auto train = align_split(models, corpus, config, ens.train_split, env);
  const auto val = align_split(models, corpus, config, ens.val_split, env);
  const auto test = align_split(models, corpus, config, ens.eval_split, env);

  TrainOptions options;
  options.tolerance = ens.tolerance;
  options.max_iters = ens.max_iters;
  options.seed = config.seed;
  const auto search = tune_lambda(train.matrix, val.matrix, ens.lambda_grid, options);
  const auto& model = search.model;

  out(env) << fmt::format("stacking over {} models; train {} / val {} / eval {} rows\n", model.model_ids.size(),
                          train.matrix.rows(), val.matrix.rows(), test.matrix.rows());
  for (const auto& [lambda, acc] : search.accuracy_by_lambda) {
    out(env) << fmt::format("  lambda {:<8g} val accuracy {:.3f}{}\n", lambda, acc,
                            lambda == search.lambda ? "  <- selected" : "");
  }
  for (std::size_t j = 0; j < model.model_ids.size(); ++j) {
    out(env) << fmt::format("  weight {:<40} {:+.6f}\n", model.model_ids[j], model.weights[j]);
  }
  out(env) << fmt::format("  intercept {:+.6f}\n", model.intercept);
  const auto top = select_top_k(model, std::min(ens.top_k, model.model_ids.size()));
  out(env) << fmt::format("top-{} by |weight|: {}\n", top.size(), fmt::join(top, ", "));

  const auto probs = predict(model, test.matrix);
  std::vector<int> labels;
  for (double p : probs) labels.push_back(p > 0.5 ? 1 : 0);
  auto system = evaluate_system(ens.name.empty() ? "L2-LOGISTIC-REGRESSION" : ens.name, labels,
                                test.matrix.labels(), test.dropped_rows);
  system.members = model.model_ids;
  system.details = fmt::format("stacking lambda={:g}", search.lambda);

  const auto out_dir = fs::path(config.paths.output_dir);
  write_file_atomic(out_dir / "meta_model.json", meta_model_to_json(model));
  nlohmann::ordered_json selection;
  selection["k"] = top.size();
  selection["models"] = top;
  selection["seed"] = config.seed;
  write_file_atomic(out_dir / "top_k.json", selection.dump(2) + "\n");
  write_system_report(config, system);
  echo_config(config, "train-meta");
  out(env) << fmt::format("{}: accuracy {:.3f} F1 {:.3f} on {} ({} evaluated, {} dropped)\n", system.name,
                          display_metrics(system.confusion).accuracy, display_metrics(system.confusion).f1,
                          to_string(ens.eval_split), system.evaluated, system.dropped);
  return kExitOk;
}

int cmd_ensemble(const RunConfig& config, CommandEnv& env) {
  validate_run_config(config);
  require_file(config.paths.corpus, "paths.corpus");
  require_file(config.paths.predictions_dir, "paths.predictions_dir");
  const auto& ens = config.ensemble;
  const bool stacking = ens.scheme == "stacking";

  std::optional<MetaModel> meta;
  if (!ens.meta_model.empty()) {
    require_file(ens.meta_model, "ensemble.meta_model");
    meta = meta_model_from_json(read_file(ens.meta_model));
  } else if (stacking) {
    throw PreconditionError("config error: ensemble.meta_model: required for scheme 'stacking'");
  }

  const auto corpus = load_corpus(config.paths.corpus);
  auto all = load_prediction_dir(config.paths.predictions_dir);

  std::vector<std::string> members = ens.members;
  std::string member_tag = "CUSTOM";
  if (stacking) {
    members = meta->model_ids;
    member_tag = "";
  } else if (members.empty() && meta) {
    members = select_top_k(*meta, std::min(ens.top_k, meta->model_ids.size()));
    member_tag = fmt::format("BEST-{}", members.size());
  } else if (members.empty()) {
    member_tag = "ALL";
  }
  const auto models = restrict_models(std::move(all), members);
  if (models.empty()) throw PreconditionError("no prediction files found");

  const auto test = align_split(models, corpus, config, ens.eval_split, env);
  std::vector<int> labels;
  std::string details;
  std::string name = ens.name;

  if (stacking) {
    const auto matrix = test.matrix.select_columns(meta->model_ids);
    for (double p : predict(*meta, matrix)) labels.push_back(p > 0.5 ? 1 : 0);
    details = fmt::format("stacking lambda={:g}", meta->lambda);
    if (name.empty()) name = "L2-LOGISTIC-REGRESSION";
  } else {
    VotingConfig vc;
    vc.scheme = parse_voting_scheme(ens.scheme);
    vc.threshold = ens.threshold;
    vc.tie_label = ens.tie_label;
    details = fmt::format("scheme={}", ens.scheme);
    if (vc.scheme == VotingScheme::kMixed) {
      if (ens.cutoff_n) {
        vc.cutoff_n = *ens.cutoff_n;
        if (vc.cutoff_n > test.matrix.cols()) {
          throw PreconditionError(fmt::format("config error: ensemble.cutoff_n: {} exceeds predictor count {}",
                                              vc.cutoff_n, test.matrix.cols()));
        }
        details += fmt::format(" n={}", vc.cutoff_n);
      } else {
        const auto val = align_split(models, corpus, config, ens.val_split, env);
        const auto tuned = tune_cutoff(val.matrix, vc);
        vc.cutoff_n = tuned.cutoff_n;
        details += fmt::format(" n={} (tuned on {}, accuracy {:.3f})", tuned.cutoff_n, to_string(ens.val_split),
                               tuned.accuracy);
      }
    }
    if (test.matrix.cols() % 2 == 0 && vc.scheme != VotingScheme::kSoft) {
      details += fmt::format(" ties->{}", vc.tie_label);
    }
    labels = vote_matrix(test.matrix, vc);
    if (name.empty()) name = fmt::format("{}-VOTING-{}", upper(ens.scheme), member_tag);
  }

  auto system = evaluate_system(name, labels, test.matrix.labels(), test.dropped_rows);
  system.members = test.matrix.model_ids();
  system.details = details;
  write_system_report(config, system);
  echo_config(config, "ensemble");

  EvalReport report;
  report.seed = config.seed;
  report.systems.push_back(system);
  out(env) << emit_report(report, ReportFormat::kText);
  return kExitOk;
}

int cmd_report(const RunConfig& config, CommandEnv& env) {
  validate_run_config(config);
  const auto format = parse_report_format(config.report.format);

  EvalReport report;
  report.seed = config.seed;
  std::set<std::string> names;
  auto add = [&](SystemResult system) {
    if (!names.insert(system.name).second) {
      throw PreconditionError(fmt::format("report: system '{}' appears more than once", system.name));
    }
    report.systems.push_back(std::move(system));
  };

  if (!config.paths.predictions_dir.empty() && fs::is_directory(config.paths.predictions_dir)) {
    require_file(config.paths.corpus, "paths.corpus");
    const auto corpus = load_corpus(config.paths.corpus);
    for (const auto& [model, records] : load_prediction_dir(config.paths.predictions_dir)) {
      std::map<std::string, std::vector<Prediction>> single{{model, records}};
      const auto aligned = align_split(single, corpus, config, config.ensemble.eval_split, env);
      std::vector<int> predicted;
      for (std::size_t r = 0; r < aligned.matrix.rows(); ++r) predicted.push_back(aligned.matrix.at(r, 0) > 0.5);
      add(evaluate_system(model, predicted, aligned.matrix.labels(), aligned.dropped_rows));
    }
  }
  for (const auto& path : config.report.include) {
    require_file(path, "report.include");
    for (auto& system : report_from_json(read_file(path)).systems) add(std::move(system));
  }
  if (report.systems.empty()) {
    throw PreconditionError("config error: report: nothing to report (no predictions_dir and no report.include)");
  }

  const auto document = emit_report(report, format);
  const char* ext = format == ReportFormat::kText ? "txt" : format == ReportFormat::kCsv ? "csv" : "json";
  write_file_atomic(fs::path(config.paths.output_dir) / fmt::format("report.{}", ext), document);
  echo_config(config, "report");
  out(env) << document;
  return kExitOk;
}

int run_command(const std::string& name, const RunConfig& config, CommandEnv& env) {
  try {
    if (name == "build-dataset") return cmd_build_dataset(config, env);
    if (name == "translate") return cmd_translate(config, env);
    if (name == "classify") return cmd_classify(config, env);
    if (name == "train-meta") return cmd_train_meta(config, env);
    if (name == "ensemble") return cmd_ensemble(config, env);
    if (name == "report") return cmd_report(config, env);
    err(env) << "unknown command '" << name << "'\n";
    return kExitConfig;
  } catch (const PreconditionError& e) {
    err(env) << "error: " << e.what() << "\n";
    return std::string_view(e.what()).rfind("config error", 0) == 0 ? kExitConfig : kExitFailure;
  } catch (const std::exception& e) {
    err(env) << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace sarc
