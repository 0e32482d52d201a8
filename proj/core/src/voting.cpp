// Copyright (c) 2026, The sarc Authors
// SPDX-License-Identifier: Apache-2.0

#include "sarc/voting.hpp"

#include <fmt/format.h>

#include <algorithm>

#include "sarc/errors.hpp"

namespace sarc {

std::string_view to_string(VotingScheme scheme) {
  switch (scheme) {
    case VotingScheme::kHard: return "hard";
    case VotingScheme::kSoft: return "soft";
    case VotingScheme::kMixed: return "mixed";
  }
  return "?";
}

VotingScheme parse_voting_scheme(std::string_view text) {
  if (text == "hard") return VotingScheme::kHard;
  if (text == "soft") return VotingScheme::kSoft;
  if (text == "mixed") return VotingScheme::kMixed;
  throw PreconditionError(fmt::format("unknown voting scheme '{}' (expected hard, soft or mixed)", text));
}

namespace {

void check_row(std::span<const double> row) {
  if (row.empty()) throw PreconditionError("cannot vote on an empty row");
}

std::size_t positive_votes(std::span<const double> row, double threshold) {
  std::size_t c = 0;
  for (double p : row) c += p > threshold;
  return c;
}

}  // namespace

int hard_vote(std::span<const double> row, const VotingConfig& config) {
  check_row(row);
  const std::size_t pos = positive_votes(row, config.threshold);
  const std::size_t neg = row.size() - pos;
  if (pos == neg) return config.tie_label;
  return pos > neg ? 1 : 0;
}

int soft_vote(std::span<const double> row, const VotingConfig& config) {
  check_row(row);
  // Summing in sorted order makes the result independent of column order.
  std::vector<double> sorted(row.begin(), row.end());
  std::sort(sorted.begin(), sorted.end());
  double sum = 0.0;
  for (double p : sorted) sum += p;
  const double mean = sum / static_cast<double>(row.size());
  if (mean == config.threshold) return config.tie_label;
  return mean > config.threshold ? 1 : 0;
}

int mixed_vote(std::span<const double> row, const VotingConfig& config) {
  check_row(row);
  if (config.cutoff_n > row.size()) {
    throw PreconditionError(fmt::format("cutoff n = {} exceeds predictor count {}", config.cutoff_n, row.size()));
  }
  const std::size_t pos = positive_votes(row, config.threshold);
  const std::size_t neg = row.size() - pos;
  const std::size_t margin = pos > neg ? pos - neg : neg - pos;
  return margin > config.cutoff_n ? hard_vote(row, config) : soft_vote(row, config);
}

int vote(std::span<const double> row, const VotingConfig& config) {
  switch (config.scheme) {
    case VotingScheme::kHard: return hard_vote(row, config);
    case VotingScheme::kSoft: return soft_vote(row, config);
    case VotingScheme::kMixed: return mixed_vote(row, config);
  }
  throw PreconditionError("unknown voting scheme");
}

std::vector<int> vote_matrix(const PredictionMatrix& matrix, const VotingConfig& config) {
  if (config.tie_label != 0 && config.tie_label != 1) throw PreconditionError("tie_label must be 0 or 1");
  std::vector<int> out;
  out.reserve(matrix.rows());
  for (std::size_t r = 0; r < matrix.rows(); ++r) out.push_back(vote(matrix.row(r), config));
  return out;
}

CutoffSearch tune_cutoff(const PredictionMatrix& val, const VotingConfig& config) {
  if (val.cols() == 0) throw PreconditionError("tune_cutoff needs at least one predictor");
  if (val.rows() == 0) throw PreconditionError("tune_cutoff needs a non-empty validation matrix");
  CutoffSearch best;
  best.accuracy = -1.0;
  auto cfg = config;
  cfg.scheme = VotingScheme::kMixed;
  for (std::size_t n = 0; n <= val.cols(); ++n) {
    cfg.cutoff_n = n;
    const auto labels = vote_matrix(val, cfg);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) correct += labels[i] == val.labels()[i];
    const double accuracy = static_cast<double>(correct) / static_cast<double>(labels.size());
    best.accuracy_by_n.push_back(accuracy);
    if (accuracy > best.accuracy) {
      best.accuracy = accuracy;
      best.cutoff_n = n;
    }
  }
  return best;
}

}  // namespace sarc
