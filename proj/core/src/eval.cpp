// Copyright (c) 2026, The sarc Authors
// SPDX-License-Identifier: Apache-2.0

#include "sarc/eval.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <algorithm>

#include "json.hpp"
#include "sarc/errors.hpp"

namespace sarc {

ConfusionMatrix confusion(std::span<const int> predicted, std::span<const int> gold) {
  if (predicted.size() != gold.size()) {
    throw PreconditionError(fmt::format("confusion: {} predictions vs {} gold labels", predicted.size(), gold.size()));
  }
  if (predicted.empty()) throw PreconditionError("confusion: no examples");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const int p = predicted[i];
    const int g = gold[i];
    if ((p != 0 && p != 1) || (g != 0 && g != 1)) throw PreconditionError("confusion: labels must be 0 or 1");
    if (p == 1) {
      g == 1 ? ++cm.tp : ++cm.fp;
    } else {
      g == 1 ? ++cm.fn : ++cm.tn;
    }
  }
  return cm;
}

namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

template <typename Ratio>
Metrics compute(const ConfusionMatrix& cm, Ratio r) {
  if (cm.total() == 0) throw PreconditionError("metrics of an empty confusion matrix");
  Metrics m;
  m.accuracy = r(cm.tp + cm.tn, cm.total());
  m.precision_undefined = cm.tp + cm.fp == 0;
  m.recall_undefined = cm.tp + cm.fn == 0;
  m.precision = m.precision_undefined ? 0.0 : r(cm.tp, cm.tp + cm.fp);
  m.recall = m.recall_undefined ? 0.0 : r(cm.tp, cm.tp + cm.fn);
  // 2PR/(P+R) reduces to 2tp/(2tp+fp+fn); zero exactly when tp == 0.
  m.f1_undefined = cm.tp == 0;
  m.f1 = m.f1_undefined ? 0.0 : r(2 * cm.tp, 2 * cm.tp + cm.fp + cm.fn);
  return m;
}

}  // namespace

Metrics metrics(const ConfusionMatrix& cm) { return compute(cm, ratio); }

double round3_ratio(std::size_t num, std::size_t den) {
  if (den == 0) return 0.0;
  // Counts stay far below 2^64 / 2000, so this cannot overflow.
  const std::uint64_t scaled = static_cast<std::uint64_t>(num) * 1000u;
  std::uint64_t q = scaled / den;
  const std::uint64_t twice_rem = 2 * (scaled % den);
  if (twice_rem > den || (twice_rem == den && q % 2 == 1)) ++q;
  return static_cast<double>(q) / 1000.0;
}

Metrics display_metrics(const ConfusionMatrix& cm) { return compute(cm, round3_ratio); }

SystemResult evaluate_system(std::string name, std::span<const int> predicted, std::span<const int> gold,
                             std::size_t dropped) {
  SystemResult result;
  result.name = std::move(name);
  result.confusion = confusion(predicted, gold);
  result.metrics = metrics(result.confusion);
  result.evaluated = predicted.size();
  result.dropped = dropped;
  return result;
}

ReportFormat parse_report_format(std::string_view text) {
  if (text == "text") return ReportFormat::kText;
  if (text == "csv") return ReportFormat::kCsv;
  if (text == "json") return ReportFormat::kJson;
  throw PreconditionError(fmt::format("unknown report format '{}' (expected text, csv or json)", text));
}

namespace {

std::vector<const SystemResult*> sorted(const EvalReport& report) {
  std::vector<const SystemResult*> out;
  for (const auto& s : report.systems) out.push_back(&s);
  std::stable_sort(out.begin(), out.end(), [](auto* a, auto* b) { return a->name < b->name; });
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string emit_text(const EvalReport& report) {
  const auto systems = sorted(report);
  std::size_t width = 6;
  for (auto* s : systems) width = std::max(width, s->name.size());

  std::string out = fmt::format("{:<{}}  {:>8}  {:>9}  {:>6}  {:>6}  {:>9}  {:>7}\n", "System", width, "Accuracy",
                                "Precision", "Recall", "F1", "Evaluated", "Dropped");
  out += std::string(width + 61, '-') + "\n";
  for (auto* s : systems) {
    const auto d = display_metrics(s->confusion);
    out += fmt::format("{:<{}}  {:>8.3f}  {:>9.3f}  {:>6.3f}  {:>6.3f}  {:>9}  {:>7}\n", s->name, width, d.accuracy,
                       d.precision, d.recall, d.f1, s->evaluated, s->dropped);
  }
  bool any_members = false;
  for (auto* s : systems) any_members = any_members || !s->members.empty() || !s->details.empty();
  if (any_members) {
    out += "\n";
    for (auto* s : systems) {
      if (s->members.empty() && s->details.empty()) continue;
      out += fmt::format("{}: {}", s->name, fmt::join(s->members, ", "));
      if (!s->details.empty()) out += fmt::format("{}[{}]", s->members.empty() ? "" : " ", s->details);
      out += "\n";
    }
  }
  bool any_flags = false;
  for (auto* s : systems) {
    const auto& m = s->metrics;
    if (!(m.precision_undefined || m.recall_undefined || m.f1_undefined)) continue;
    if (!any_flags) out += "\n";
    any_flags = true;
    std::vector<std::string> which;
    if (m.precision_undefined) which.emplace_back("precision");
    if (m.recall_undefined) which.emplace_back("recall");
    if (m.f1_undefined) which.emplace_back("f1");
    out += fmt::format("note: {} has zero-denominator {} reported as 0\n", s->name, fmt::join(which, "/"));
  }
  return out;
}

std::string emit_csv(const EvalReport& report) {
  std::string out = "system,accuracy,precision,recall,f1,evaluated,dropped\n";
  for (auto* s : sorted(report)) {
    const auto d = display_metrics(s->confusion);
    out += fmt::format("{},{:.3f},{:.3f},{:.3f},{:.3f},{},{}\n", csv_field(s->name), d.accuracy, d.precision,
                       d.recall, d.f1, s->evaluated, s->dropped);
  }
  return out;
}

std::string emit_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["seed"] = report.seed ? nlohmann::ordered_json(*report.seed) : nlohmann::ordered_json(nullptr);
  j["alignment"] = report.alignment;
  auto systems = nlohmann::ordered_json::array();
  for (auto* s : sorted(report)) {
    const auto d = display_metrics(s->confusion);
    nlohmann::ordered_json e;
    e["name"] = s->name;
    e["accuracy"] = s->metrics.accuracy;
    e["precision"] = s->metrics.precision;
    e["recall"] = s->metrics.recall;
    e["f1"] = s->metrics.f1;
    e["display"] = {{"accuracy", fmt::format("{:.3f}", d.accuracy)},
                    {"precision", fmt::format("{:.3f}", d.precision)},
                    {"recall", fmt::format("{:.3f}", d.recall)},
                    {"f1", fmt::format("{:.3f}", d.f1)}};
    e["confusion"] = {{"tp", s->confusion.tp}, {"fp", s->confusion.fp}, {"fn", s->confusion.fn},
                      {"tn", s->confusion.tn}};
    e["evaluated"] = s->evaluated;
    e["dropped"] = s->dropped;
    e["zero_denominator"] = {{"precision", s->metrics.precision_undefined},
                             {"recall", s->metrics.recall_undefined},
                             {"f1", s->metrics.f1_undefined}};
    e["members"] = s->members;
    e["details"] = s->details;
    systems.push_back(std::move(e));
  }
  j["systems"] = std::move(systems);
  return j.dump(2) + "\n";
}

}  // namespace

std::string emit_report(const EvalReport& report, ReportFormat format) {
  switch (format) {
    case ReportFormat::kText: return emit_text(report);
    case ReportFormat::kCsv: return emit_csv(report);
    case ReportFormat::kJson: return emit_json(report);
  }
  throw PreconditionError("unknown report format");
}

EvalReport report_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    EvalReport report;
    if (!j.at("seed").is_null()) report.seed = j["seed"].get<std::uint64_t>();
    report.alignment = j.value("alignment", std::string("per-ensemble"));
    for (const auto& e : j.at("systems")) {
      SystemResult s;
      s.name = e.at("name").get<std::string>();
      const auto& c = e.at("confusion");
      s.confusion = {c.at("tp").get<std::size_t>(), c.at("fp").get<std::size_t>(), c.at("fn").get<std::size_t>(),
                     c.at("tn").get<std::size_t>()};
      s.metrics = metrics(s.confusion);
      s.evaluated = e.at("evaluated").get<std::size_t>();
      s.dropped = e.at("dropped").get<std::size_t>();
      s.members = e.value("members", std::vector<std::string>{});
      s.details = e.value("details", std::string{});
      if (s.evaluated != s.confusion.total()) {
        throw InputError(fmt::format("report system '{}': evaluated {} != confusion total {}", s.name, s.evaluated,
                                     s.confusion.total()));
      }
      report.systems.push_back(std::move(s));
    }
    return report;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(fmt::format("report: {}", e.what()));
  }
}

}  // namespace sarc
