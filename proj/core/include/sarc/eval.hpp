// Copyright (c) 2026, The sarc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sarc {

/// Binary confusion counts with sarcastic as the positive class.
struct ConfusionMatrix {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  std::size_t total() const { return tp + fp + fn + tn; }
  bool operator==(const ConfusionMatrix&) const = default;
};

/// Throws PreconditionError on length mismatch, empty input, or non-binary values.
ConfusionMatrix confusion(std::span<const int> predicted, std::span<const int> gold);

struct Metrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;  // binary F1 of the sarcastic class
  // Set when the corresponding denominator was zero and 0 was reported.
  bool precision_undefined = false;
  bool recall_undefined = false;
  bool f1_undefined = false;
};

Metrics metrics(const ConfusionMatrix& cm);

/// num/den rounded half-to-even at 3 decimals, computed exactly in integers.
double round3_ratio(std::size_t num, std::size_t den);

/// Metrics rounded for display (exact, from the confusion counts).
Metrics display_metrics(const ConfusionMatrix& cm);

struct SystemResult {
  std::string name;
  ConfusionMatrix confusion;
  Metrics metrics;
  std::size_t evaluated = 0;
  std::size_t dropped = 0;
  /// Base models feeding an ensemble; empty for single models.
  std::vector<std::string> members;
  /// Free-form configuration notes (scheme, cutoff, lambda, ...).
  std::string details;
};

SystemResult evaluate_system(std::string name, std::span<const int> predicted, std::span<const int> gold,
                             std::size_t dropped = 0);

struct EvalReport {
  std::vector<SystemResult> systems;
  std::optional<std::uint64_t> seed;
  std::string alignment = "per-ensemble";
};

enum class ReportFormat { kText, kCsv, kJson };

ReportFormat parse_report_format(std::string_view text);

/// Renders all systems sorted by name with 3-decimal display values.
std::string emit_report(const EvalReport& report, ReportFormat format);

EvalReport report_from_json(const std::string& text);

}  // namespace sarc
