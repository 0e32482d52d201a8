// Copyright (c) 2026, The sarc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "sarc/predictions.hpp"

namespace sarc {

enum class VotingScheme { kHard, kSoft, kMixed };

std::string_view to_string(VotingScheme scheme);
VotingScheme parse_voting_scheme(std::string_view text);

struct VotingConfig {
  VotingScheme scheme = VotingScheme::kHard;
  /// Mixed voting uses hard votes only when |positives - negatives| > cutoff_n.
  std::size_t cutoff_n = 0;
  /// A probability counts as a sarcastic vote when strictly above this.
  double threshold = 0.5;
  /// Returned on exact ties (even vote splits, or mean == threshold).
  int tie_label = 0;
};

/// Majority of binarized votes.
int hard_vote(std::span<const double> row, const VotingConfig& config);

/// Mean probability against the threshold.
int soft_vote(std::span<const double> row, const VotingConfig& config);

/// Hard vote when the vote margin exceeds cutoff_n, soft vote otherwise.
/// Throws PreconditionError if cutoff_n > row.size().
int mixed_vote(std::span<const double> row, const VotingConfig& config);

/// Dispatches on config.scheme.
int vote(std::span<const double> row, const VotingConfig& config);

std::vector<int> vote_matrix(const PredictionMatrix& matrix, const VotingConfig& config);

struct CutoffSearch {
  std::size_t cutoff_n = 0;
  double accuracy = 0.0;
  std::vector<double> accuracy_by_n;  // index n
};

/// Exhaustive scan of n in [0, M] for mixed voting; ties go to the smallest n.
CutoffSearch tune_cutoff(const PredictionMatrix& val, const VotingConfig& config);

}  // namespace sarc
