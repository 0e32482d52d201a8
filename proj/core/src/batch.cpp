// Copyright (c) 2026, The sarc Authors
// SPDX-License-Identifier: Apache-2.0

#include "sarc/batch.hpp"

#include <algorithm>
#include <atomic>
#include <functional>
#include <mutex>
#include <optional>
#include <thread>

#include "sarc/errors.hpp"
#include "sarc/hash.hpp"

namespace sarc {
namespace {

struct ItemOutcome {
  std::optional<std::string> response;
  std::string error;
};

// Resolves one prompt per item through the cache or the client, using up to
// concurrency_limit worker threads. Outcomes are stored by index, so the
// result does not depend on scheduling.
std::vector<ItemOutcome> run_batch(const std::vector<std::optional<RenderedPrompt>>& prompts, ChatClient& client,
                                   ResponseCache& cache, BatchSummary& summary) {
  std::vector<ItemOutcome> outcomes(prompts.size());
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> requests{0};
  std::atomic<std::size_t> hits{0};
  const auto& model = client.config().model_name;

  auto worker = [&] {
    for (std::size_t i = next++; i < prompts.size(); i = next++) {
      if (!prompts[i]) continue;
      try {
        const auto hash = sha256_hex(prompts[i]->text());
        if (auto cached = cache.lookup(ResponseCache::make_key(model, hash))) {
          ++hits;
          outcomes[i].response = std::move(cached);
          continue;
        }
        ++requests;
        auto response = client.complete(*prompts[i]);
        cache.store(model, hash, response);
        outcomes[i].response = std::move(response);
      } catch (const std::exception& e) {
        outcomes[i].error = e.what();
      }
    }
  };

  const auto n_threads =
      std::min<std::size_t>(static_cast<std::size_t>(client.config().concurrency_limit), prompts.size());
  std::vector<std::jthread> pool;
  for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  pool.clear();

  summary.requests += requests.load();
  summary.cache_hits += hits.load();
  return outcomes;
}

std::string trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return std::string(s.substr(b, e - b + 1));
}

void sort_failures(BatchSummary& summary) {
  std::sort(summary.failures.begin(), summary.failures.end(),
            [](const auto& a, const auto& b) { return a.example_id < b.example_id; });
}

}  // namespace

TranslateResult translate_corpus(const Corpus& corpus, const PromptTemplate& tmpl, ChatClient& client,
                                 ResponseCache& cache) {
  if (tmpl.task != PromptTask::kTranslate) throw PreconditionError("translate_corpus needs a translate template");
  std::vector<std::optional<RenderedPrompt>> prompts;
  prompts.reserve(corpus.size());
  for (const auto& ex : corpus.examples()) prompts.emplace_back(render_translation_prompt(ex, tmpl));

  TranslateResult result;
  auto outcomes = run_batch(prompts, client, cache, result.summary);
  auto examples = corpus.examples();
  for (std::size_t i = 0; i < examples.size(); ++i) {
    auto& outcome = outcomes[i];
    if (!outcome.response) {
      result.summary.failures.push_back({examples[i].id, outcome.error});
      continue;
    }
    auto text = trim(*outcome.response);
    if (text.empty()) {
      result.summary.failures.push_back({examples[i].id, "empty translation"});
      continue;
    }
    examples[i].text_target = std::move(text);
  }
  sort_failures(result.summary);
  result.corpus = Corpus(std::move(examples), corpus.metadata().source, corpus.metadata().seed);
  return result;
}

ClassifyResult classify_corpus(const Corpus& corpus, const PromptTemplate& tmpl, ChatClient& client,
                               const std::string& model_id, ResponseCache& cache, ClassifyField field) {
  if (tmpl.task != PromptTask::kClassify) throw PreconditionError("classify_corpus needs a classify template");
  if (model_id.empty()) throw PreconditionError("classify_corpus: model_id must not be empty");

  ClassifyResult result;
  std::vector<std::optional<RenderedPrompt>> prompts;
  prompts.reserve(corpus.size());
  for (const auto& ex : corpus.examples()) {
    if (field == ClassifyField::kTarget && !ex.text_target) {
      result.summary.failures.push_back({ex.id, "example has no text_target (translate first)"});
      prompts.emplace_back(std::nullopt);
      continue;
    }
    prompts.emplace_back(
        render_classification_prompt(field == ClassifyField::kTarget ? *ex.text_target : ex.text_source, tmpl));
  }

  auto outcomes = run_batch(prompts, client, cache, result.summary);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (!prompts[i]) continue;
    const auto& ex = corpus.examples()[i];
    if (!outcomes[i].response) {
      result.summary.failures.push_back({ex.id, outcomes[i].error});
      continue;
    }
    const auto parsed = parse_label(*outcomes[i].response);
    Prediction p;
    p.model_id = model_id;
    p.example_id = ex.id;
    if (parsed.value == LabelValue::kRefused) {
      p.status = PredictionStatus::kRefused;
    } else {
      p.status = PredictionStatus::kOk;
      p.p_sarcastic = parsed.value == LabelValue::kSarcastic ? 1.0 : 0.0;
    }
    result.predictions.push_back(std::move(p));
  }
  sort_failures(result.summary);
  return result;
}

}  // namespace sarc
