// Copyright (c) 2026, The sarc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sarc/llm_client.hpp"
#include "sarc/predictions.hpp"
#include "sarc/run_config.hpp"

namespace sarc {

/// Process-level dependencies of the pipeline commands, replaceable in tests.
struct CommandEnv {
  std::ostream* out = nullptr;
  std::ostream* err = nullptr;
  /// Transport for LLM calls; the HTTP transport is used when null.
  std::shared_ptr<Transport> transport;
  /// Environment lookup used for the API key.
  std::function<std::optional<std::string>(const std::string&)> getenv;

  static CommandEnv process_defaults();
};

enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitConfig = 2 };

/// Each command validates `config`, produces its artifacts under the
/// configured directories and echoes the effective config to
/// `<output_dir>/<command>.config.json`. Artifacts are written atomically and
/// only when complete; the return value is kExitOk iff that happened.
int cmd_build_dataset(const RunConfig& config, CommandEnv& env);
int cmd_translate(const RunConfig& config, CommandEnv& env);
int cmd_classify(const RunConfig& config, CommandEnv& env);
int cmd_train_meta(const RunConfig& config, CommandEnv& env);
int cmd_ensemble(const RunConfig& config, CommandEnv& env);
int cmd_report(const RunConfig& config, CommandEnv& env);

/// Dispatches by subcommand name ("build-dataset", "translate", ...).
int run_command(const std::string& name, const RunConfig& config, CommandEnv& env);

/// Loads every `*.jsonl` prediction file in `dir` (sorted by file name) and
/// groups the records by model. A model appearing in two files is an error.
std::map<std::string, std::vector<Prediction>> load_prediction_dir(const std::filesystem::path& dir);

/// File-system friendly form of a model id.
std::string sanitize_file_stem(const std::string& id);

}  // namespace sarc
