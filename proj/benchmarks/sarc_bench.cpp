// Copyright (c) 2026, The sarc Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include <cmath>
#include <string>
#include <vector>

#include "sarc/meta_learner.hpp"
#include "sarc/predictions.hpp"
#include "sarc/rng.hpp"
#include "sarc/voting.hpp"

namespace {

sarc::PredictionMatrix synthetic(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  sarc::Rng rng(seed);
  std::vector<std::string> models, ids;
  std::vector<double> probs;
  std::vector<int> labels;
  for (std::size_t j = 0; j < cols; ++j) models.push_back("m" + std::to_string(j));
  for (std::size_t i = 0; i < rows; ++i) {
    ids.push_back("r" + std::to_string(i));
    const int y = static_cast<int>(rng.below(2));
    labels.push_back(y);
    for (std::size_t j = 0; j < cols; ++j) {
      const double noise = rng.uniform();
      probs.push_back(y ? 0.3 + 0.7 * noise : 0.7 * noise);
    }
  }
  return sarc::PredictionMatrix(models, ids, probs, labels);
}

void BM_TrainMetaModel(benchmark::State& state) {
  const auto x = synthetic(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(sarc::train_meta_model(x, {}));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TrainMetaModel)->Args({1708, 5})->Args({1708, 11})->Args({20000, 11})->Unit(benchmark::kMillisecond);

void BM_VoteMatrix(benchmark::State& state) {
  const auto x = synthetic(static_cast<std::size_t>(state.range(0)), 11, 2);
  sarc::VotingConfig config;
  config.scheme = static_cast<sarc::VotingScheme>(state.range(1));
  config.cutoff_n = 3;
  for (auto _ : state) benchmark::DoNotOptimize(sarc::vote_matrix(x, config));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_VoteMatrix)->ArgsProduct({{213, 100000}, {0, 1, 2}});

void BM_Align(benchmark::State& state) {
  const auto rows = static_cast<std::size_t>(state.range(0));
  std::vector<sarc::Example> examples;
  sarc::Rng rng(3);
  for (std::size_t i = 0; i < rows; ++i) {
    examples.push_back({"e" + std::to_string(i), "text", std::nullopt, sarc::Label(i % 2), sarc::OriginSplit::kTrain,
                        sarc::Split::kTest});
  }
  const sarc::Corpus corpus(std::move(examples), "bench");
  std::map<std::string, std::vector<sarc::Prediction>> by_model;
  for (int m = 0; m < 11; ++m) {
    const auto id = "m" + std::to_string(m);
    for (const auto& ex : corpus.examples()) {
      if (rng.below(50) == 0) {
        by_model[id].push_back({id, ex.id, std::nullopt, sarc::PredictionStatus::kRefused});
      } else {
        by_model[id].push_back({id, ex.id, rng.uniform(), sarc::PredictionStatus::kOk});
      }
    }
  }
  for (auto _ : state) benchmark::DoNotOptimize(sarc::align(by_model, corpus, {sarc::Split::kTest}));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Align)->Arg(2134)->Arg(50000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
