// Copyright 2026 The Procwriter Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "procwriter/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "procwriter/error.hpp"
#include "procwriter/text.hpp"

namespace procwriter {

namespace {

std::unordered_map<std::string, std::size_t> ngram_counts(std::span<const std::string> tokens, std::size_t order) {
  std::unordered_map<std::string, std::size_t> counts;
  if (tokens.size() < order) return counts;
  for (std::size_t i = 0; i + order <= tokens.size(); ++i) {
    std::string key = tokens[i];
    for (std::size_t j = 1; j < order; ++j) {
      key += '\x1f';
      key += tokens[i + j];
    }
    ++counts[key];
  }
  return counts;
}

}  // namespace

double bleu_n(std::span<const std::string> prediction, std::span<const std::string> reference, int n) {
  if (n != 1 && n != 2) throw InvalidArgument("bleu_n: n must be 1 or 2");
  if (prediction.empty()) return 0.0;
  double log_precision = 0.0;
  for (std::size_t order = 1; order <= static_cast<std::size_t>(n); ++order) {
    const auto pred = ngram_counts(prediction, order);
    const auto ref = ngram_counts(reference, order);
    const std::size_t total = prediction.size() >= order ? prediction.size() - order + 1 : 0;
    std::size_t matches = 0;
    for (const auto& [gram, count] : pred) {
      if (auto it = ref.find(gram); it != ref.end()) matches += std::min(count, it->second);
    }
    const double p = matches > 0 ? static_cast<double>(matches) / static_cast<double>(total)
                                 : 1.0 / static_cast<double>(total + 1);
    log_precision += std::log(p);
  }
  const double c = static_cast<double>(prediction.size());
  const double r = static_cast<double>(reference.size());
  const double bp = c >= r ? 1.0 : std::exp(1.0 - r / c);
  return bp * std::exp(log_precision / n);
}

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
  std::vector<std::size_t> row(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = 0;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = a[i - 1] == b[j - 1] ? diag + 1 : std::max(row[j], row[j - 1]);
      diag = up;
    }
  }
  return row[b.size()];
}

double rouge_l(std::span<const std::string> prediction, std::span<const std::string> reference) {
  if (prediction.empty() || reference.empty()) return 0.0;
  const double lcs = static_cast<double>(lcs_length(prediction, reference));
  if (lcs == 0.0) return 0.0;
  const double p = lcs / static_cast<double>(prediction.size());
  const double r = lcs / static_cast<double>(reference.size());
  return 2.0 * p * r / (p + r);
}

double embed_f(std::string_view prediction, std::string_view reference, const Embedder& embedder) {
  const auto pred = tokenize(prediction);
  const auto ref = tokenize(reference);
  if (pred.empty() || ref.empty()) return 0.0;
  std::vector<std::vector<double>> pv, rv;
  for (const auto& t : pred) pv.push_back(embedder.embed(t));
  for (const auto& t : ref) rv.push_back(embedder.embed(t));

  std::vector<double> best_pred(pv.size(), -1.0), best_ref(rv.size(), -1.0);
  for (std::size_t i = 0; i < pv.size(); ++i) {
    for (std::size_t j = 0; j < rv.size(); ++j) {
      const double c = cosine(pv[i], rv[j]);
      best_pred[i] = std::max(best_pred[i], c);
      best_ref[j] = std::max(best_ref[j], c);
    }
  }
  const double p = std::max(0.0, pairwise_sum(best_pred) / static_cast<double>(pv.size()));
  const double r = std::max(0.0, pairwise_sum(best_ref) / static_cast<double>(rv.size()));
  if (p + r == 0.0) return 0.0;
  return std::min(1.0, 2.0 * p * r / (p + r));
}

std::string flatten(const SubEventSequence& seq) {
  std::string out;
  for (const auto& e : seq) {
    if (!out.empty()) out += ' ';
    out += e.text();
  }
  return out;
}

namespace {

double metric_value(const Tokens& pred, std::string_view pred_text, const SubEventSequence& ref, Metric metric,
                    const Embedder* embedder) {
  const std::string ref_text = flatten(ref);
  switch (metric) {
    case Metric::kBleu1: return bleu_n(pred, tokenize(ref_text), 1);
    case Metric::kBleu2: return bleu_n(pred, tokenize(ref_text), 2);
    case Metric::kRougeL: return rouge_l(pred, tokenize(ref_text));
    case Metric::kEmbedF: return embed_f(pred_text, ref_text, *embedder);
  }
  return 0.0;
}

}  // namespace

double best_of_references(const SubEventSequence& prediction, std::span<const SubEventSequence> references,
                          Metric metric, const Embedder* embedder) {
  if (references.empty()) throw InvalidArgument("best_of_references: no references");
  if (metric == Metric::kEmbedF && embedder == nullptr)
    throw InvalidArgument("best_of_references: embedding F-score needs an embedder");
  const std::string pred_text = flatten(prediction);
  const Tokens pred = tokenize(pred_text);
  double best = 0.0;
  for (const auto& ref : references) best = std::max(best, metric_value(pred, pred_text, ref, metric, embedder));
  return best;
}

std::string MetricReport::to_json() const {
  nlohmann::ordered_json j = {{"bleu1", bleu1}, {"bleu2", bleu2}, {"rougeL", rougeL}, {"embed_f", embed_f},
                              {"mae", mae},     {"rmse", rmse},   {"n_examples", n_examples}};
  return j.dump();
}

MetricReport MetricReport::from_json(std::string_view json) {
  try {
    auto j = nlohmann::json::parse(json);
    MetricReport r;
    r.bleu1 = j.at("bleu1").get<double>();
    r.bleu2 = j.at("bleu2").get<double>();
    r.rougeL = j.at("rougeL").get<double>();
    r.embed_f = j.at("embed_f").get<double>();
    r.mae = j.at("mae").get<double>();
    r.rmse = j.at("rmse").get<double>();
    r.n_examples = j.at("n_examples").get<std::size_t>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("metrics report: ") + e.what());
  }
}

std::size_t closest_reference_length(std::size_t predicted, std::span<const SubEventSequence> refs) {
  if (refs.empty()) throw InvalidArgument("closest_reference_length: no references");
  std::size_t best = refs[0].size();
  auto gap = [&](std::size_t len) { return len > predicted ? len - predicted : predicted - len; };
  for (const auto& r : refs) {
    if (gap(r.size()) < gap(best)) best = r.size();
  }
  return best;
}

LengthErrors length_errors(std::span<const std::size_t> predicted, std::span<const std::size_t> target) {
  if (predicted.size() != target.size()) throw InvalidArgument("length_errors: size mismatch");
  if (predicted.empty()) return {};
  std::vector<double> abs_err, sq_err;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const double d = static_cast<double>(predicted[i]) - static_cast<double>(target[i]);
    abs_err.push_back(std::abs(d));
    sq_err.push_back(d * d);
  }
  const double n = static_cast<double>(predicted.size());
  return {pairwise_sum(abs_err) / n, std::sqrt(pairwise_sum(sq_err) / n)};
}

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

MetricReport corpus_report(std::span<const SubEventSequence> predictions, std::span<const ProcessExample> examples,
                           const Embedder* embedder) {
  if (predictions.size() != examples.size())
    throw InvalidArgument("corpus_report: " + std::to_string(predictions.size()) + " predictions for " +
                          std::to_string(examples.size()) + " examples");
  MetricReport report;
  report.n_examples = examples.size();
  if (examples.empty()) return report;

  std::vector<double> b1, b2, rl, ef;
  std::vector<std::size_t> pred_len, ref_len;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const auto& refs = examples[i].references();
    b1.push_back(best_of_references(predictions[i], refs, Metric::kBleu1));
    b2.push_back(best_of_references(predictions[i], refs, Metric::kBleu2));
    rl.push_back(best_of_references(predictions[i], refs, Metric::kRougeL));
    if (embedder) ef.push_back(best_of_references(predictions[i], refs, Metric::kEmbedF, embedder));
    pred_len.push_back(predictions[i].size());
    ref_len.push_back(closest_reference_length(predictions[i].size(), refs));
  }
  const double n = static_cast<double>(examples.size());
  report.bleu1 = 100.0 * pairwise_sum(b1) / n;
  report.bleu2 = 100.0 * pairwise_sum(b2) / n;
  report.rougeL = 100.0 * pairwise_sum(rl) / n;
  report.embed_f = embedder ? 100.0 * pairwise_sum(ef) / n : 0.0;
  const auto errors = length_errors(pred_len, ref_len);
  report.mae = errors.mae;
  report.rmse = errors.rmse;
  return report;
}

}  // namespace procwriter
