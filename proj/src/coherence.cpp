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

#include "procwriter/coherence.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "binary_io.hpp"
#include "procwriter/error.hpp"
#include "procwriter/text.hpp"

namespace procwriter {

std::string_view to_string(Corruption c) {
  switch (c) {
    case Corruption::kNone: return "none";
    case Corruption::kDuplicate: return "duplicate";
    case Corruption::kIrrelevant: return "irrelevant";
  }
  return "none";
}

Corruption corruption_from_string(std::string_view s) {
  if (s == "none") return Corruption::kNone;
  if (s == "duplicate") return Corruption::kDuplicate;
  if (s == "irrelevant") return Corruption::kIrrelevant;
  throw InvalidArgument("unknown corruption type '" + std::string(s) + "'");
}

namespace {

std::size_t uniform_index(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

CorruptedSequence insert_at_random(const SubEventSequence& seq, SubEvent step, Rng& rng) {
  CorruptedSequence out{seq, uniform_index(rng, seq.size() + 1)};
  out.sequence.insert(out.inserted_at, std::move(step));
  return out;
}

}  // namespace

CorruptedSequence corrupt_local(const SubEventSequence& seq, Rng& rng) {
  if (seq.empty()) throw InvalidArgument("corrupt_local: empty sequence");
  SubEvent copy = seq[uniform_index(rng, seq.size())];
  return insert_at_random(seq, std::move(copy), rng);
}

CorruptedSequence corrupt_global(const SubEventSequence& seq,
                                 std::span<const ProcessExample> donor_pool, const Process& self,
                                 Rng& rng) {
  std::vector<const ProcessExample*> donors;
  for (const auto& ex : donor_pool) {
    if (ex.process().title() != self.title()) donors.push_back(&ex);
  }
  if (donors.empty())
    throw InvalidArgument("corrupt_global: no donor with a title other than '" + self.title() + "'");
  const ProcessExample& donor = *donors[uniform_index(rng, donors.size())];
  const SubEventSequence& ref = donor.references()[uniform_index(rng, donor.references().size())];
  SubEvent step = ref[uniform_index(rng, ref.size())];
  return insert_at_random(seq, std::move(step), rng);
}

std::vector<CoherenceExample> build_coherence_dataset(const DatasetSplit& split,
                                                      std::size_t n_negatives, std::uint64_t seed,
                                                      const PromptTemplate& tmpl) {
  return build_coherence_dataset(split, split.examples, n_negatives, seed, tmpl);
}

std::vector<CoherenceExample> build_coherence_dataset(const DatasetSplit& split,
                                                      std::span<const ProcessExample> donor_pool,
                                                      std::size_t n_negatives, std::uint64_t seed,
                                                      const PromptTemplate& tmpl) {
  if (n_negatives == 0) throw InvalidArgument("build_coherence_dataset: N must be at least 1");
  Rng rng(seed);
  std::vector<CoherenceExample> out;
  for (const auto& ex : split.examples) {
    for (const auto& ref : ex.references()) {
      out.push_back({render_coherence_text(ex.process(), ref.events(), tmpl), 1, Corruption::kNone});
      for (std::size_t i = 0; i < n_negatives; ++i) {
        auto c = corrupt_local(ref, rng);
        out.push_back({render_coherence_text(ex.process(), c.sequence.events(), tmpl), 0,
                       Corruption::kDuplicate});
      }
      for (std::size_t i = 0; i < n_negatives; ++i) {
        auto c = corrupt_global(ref, donor_pool, ex.process(), rng);
        out.push_back({render_coherence_text(ex.process(), c.sequence.events(), tmpl), 0,
                       Corruption::kIrrelevant});
      }
    }
  }
  return out;
}

ControllerTestSets build_controller_test_sets(const DatasetSplit& split, std::uint64_t seed,
                                              const PromptTemplate& tmpl) {
  Rng rng(seed);
  ControllerTestSets sets;
  for (const auto& ex : split.examples) {
    for (const auto& ref : ex.references()) {
      CoherenceExample positive{render_coherence_text(ex.process(), ref.events(), tmpl), 1,
                                Corruption::kNone};
      auto local = corrupt_local(ref, rng);
      auto global = corrupt_global(ref, split.examples, ex.process(), rng);
      sets.local.push_back(positive);
      sets.local.push_back({render_coherence_text(ex.process(), local.sequence.events(), tmpl), 0,
                            Corruption::kDuplicate});
      sets.global.push_back(std::move(positive));
      sets.global.push_back({render_coherence_text(ex.process(), global.sequence.events(), tmpl), 0,
                             Corruption::kIrrelevant});
    }
  }
  return sets;
}

namespace {

void check_loss_args(int label, double score, std::size_t n_negatives) {
  if (label != 0 && label != 1) throw InvalidArgument("coherence label must be 0 or 1");
  if (n_negatives == 0) throw InvalidArgument("N must be at least 1");
  if (!(score > 0.0 && score < 1.0))
    throw InvalidArgument("coherence score must lie strictly inside (0, 1); clamp upstream");
}

}  // namespace

double coherence_loss(int label, double score, std::size_t n_negatives) {
  check_loss_args(label, score, n_negatives);
  const double y = label;
  const double w = 1.0 / (2.0 * static_cast<double>(n_negatives));
  return -(y * std::log(score) + w * (1.0 - y) * std::log(1.0 - score));
}

double coherence_loss_grad(int label, double score, std::size_t n_negatives) {
  check_loss_args(label, score, n_negatives);
  const double y = label;
  const double w = 1.0 / (2.0 * static_cast<double>(n_negatives));
  return -(y / score - w * (1.0 - y) / (1.0 - score));
}

double clamp_score(double score, double eps) { return std::clamp(score, eps, 1.0 - eps); }

namespace {

struct ParsedText {
  std::string title;
  std::vector<std::string> steps;
};

ParsedText parse_loose(std::string_view text) {
  try {
    auto p = parse_prompt(text);
    return {std::move(p.title), std::move(p.steps)};
  } catch (const ParseError&) {
    return {std::string(text), {}};
  }
}

std::string normalize_step(std::string_view s) { return to_lower(trim(s)); }

}  // namespace

double DuplicateOracleScorer::score(std::string_view text) const {
  std::set<std::string> seen;
  for (const auto& s : parse_loose(text).steps) {
    if (!seen.insert(normalize_step(s)).second) return 0.0;
  }
  return 1.0;
}

std::shared_ptr<CoherenceScorer> DuplicateOracleScorer::train(std::span<const CoherenceExample>,
                                                              const TrainingConfig&,
                                                              std::size_t) const {
  return std::const_pointer_cast<CoherenceScorer>(shared_from_this());
}

std::shared_ptr<CoherenceScorer> FunctionScorer::train(std::span<const CoherenceExample>,
                                                       const TrainingConfig&, std::size_t) const {
  return std::const_pointer_cast<CoherenceScorer>(shared_from_this());
}

namespace {

constexpr std::size_t kDenseFeatures = 16;
constexpr char kLogisticMagic[] = "PWLOG1";

double sigmoid(double z) {
  return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

std::set<std::string> word_set(std::string_view text) {
  std::set<std::string> out;
  for (auto& w : content_words(text)) {
    if (!is_stopword(w)) out.insert(std::move(w));
  }
  return out;
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
  if (a.empty() && b.empty()) return 0.0;
  std::size_t inter = 0;
  for (const auto& w : a) inter += b.count(w);
  return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
}

}  // namespace

LogisticScorer::LogisticScorer(unsigned hash_bits) : hash_bits_(hash_bits) {
  if (hash_bits < 8 || hash_bits > 26) throw InvalidArgument("hash_bits must be in [8, 26]");
  weights_.assign(std::size_t{1} << hash_bits, 0.0);
}

std::vector<LogisticScorer::Feature> LogisticScorer::featurize(std::string_view text) const {
  const ParsedText parsed = parse_loose(text);
  const auto title = word_set(parsed.title);
  std::vector<std::set<std::string>> steps;
  for (const auto& s : parsed.steps) steps.push_back(word_set(s));
  const std::size_t m = steps.size();

  bool duplicate = false;
  {
    std::set<std::string> seen;
    for (const auto& s : parsed.steps) duplicate |= !seen.insert(normalize_step(s)).second;
  }
  double max_jaccard = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) max_jaccard = std::max(max_jaccard, jaccard(steps[i], steps[j]));

  // Support: share of a step's words found in the title or another step.
  double min_support = m ? 1.0 : 0.0;
  double sum_support = 0.0;
  std::size_t unsupported = 0;
  for (std::size_t i = 0; i < m; ++i) {
    std::size_t hit = 0;
    for (const auto& w : steps[i]) {
      bool found = title.contains(w);
      for (std::size_t j = 0; j < m && !found; ++j) found = j != i && steps[j].contains(w);
      hit += found;
    }
    const double support = steps[i].empty() ? 1.0 : static_cast<double>(hit) / static_cast<double>(steps[i].size());
    min_support = std::min(min_support, support);
    sum_support += support;
    unsupported += hit == 0 && !steps[i].empty();
  }

  std::vector<Feature> f;
  f.push_back({0, 1.0});
  f.push_back({1, duplicate ? 1.0 : 0.0});
  f.push_back({2, max_jaccard});
  f.push_back({3, min_support});
  f.push_back({4, m ? sum_support / static_cast<double>(m) : 0.0});
  f.push_back({5, m ? static_cast<double>(unsupported) / static_cast<double>(m) : 0.0});
  f.push_back({6, static_cast<double>(m) / 10.0});

  const std::size_t buckets = weights_.size() - kDenseFeatures;
  auto hashed = [&](std::uint64_t h) { return kDenseFeatures + static_cast<std::size_t>(h % buckets); };
  std::set<std::string> vocab;
  for (const auto& s : steps) vocab.insert(s.begin(), s.end());
  if (!vocab.empty()) {
    const double v = 1.0 / std::sqrt(static_cast<double>(vocab.size()));
    for (const auto& w : vocab) f.push_back({hashed(fnv1a(w, fnv1a("w:"))), v});
  }
  if (!vocab.empty() && !title.empty()) {
    const double v = 1.0 / std::sqrt(static_cast<double>(vocab.size() * title.size()));
    for (const auto& t : title)
      for (const auto& w : vocab) f.push_back({hashed(hash_combine(fnv1a(t, fnv1a("t:")), fnv1a(w))), v});
  }
  return f;
}

double LogisticScorer::logit(std::span<const Feature> features) const {
  double z = 0.0;
  for (const auto& f : features) z += weights_[f.index] * f.value;
  return z;
}

double LogisticScorer::score(std::string_view text) const {
  const auto f = featurize(text);
  return sigmoid(logit(f));
}

std::shared_ptr<CoherenceScorer> LogisticScorer::train(std::span<const CoherenceExample> examples,
                                                       const TrainingConfig& config,
                                                       std::size_t n_negatives) const {
  config.validate();
  if (examples.empty()) throw InvalidArgument("logistic scorer: no training examples");
  if (n_negatives == 0) throw InvalidArgument("logistic scorer: N must be at least 1");
  auto next = std::make_shared<LogisticScorer>(*this);
  std::vector<std::vector<Feature>> rows;
  rows.reserve(examples.size());
  for (const auto& ex : examples) {
    if (ex.label != 0 && ex.label != 1) throw InvalidArgument("coherence label must be 0 or 1");
    rows.push_back(next->featurize(ex.text));
  }

  const double negative_weight = 1.0 / (2.0 * static_cast<double>(n_negatives));
  std::vector<std::size_t> order(rows.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(config.seed);
  std::unordered_map<std::size_t, double> grad;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      grad.clear();
      for (std::size_t b = start; b < stop; ++b) {
        const auto& row = rows[order[b]];
        const double s = clamp_score(sigmoid(next->logit(row)));
        // d loss / d logit of the balanced cross-entropy.
        const double g = examples[order[b]].label == 1 ? -(1.0 - s) : negative_weight * s;
        for (const auto& f : row) grad[f.index] += g * f.value;
      }
      const double step = config.learning_rate / static_cast<double>(stop - start);
      for (const auto& [i, g] : grad) next->weights_[i] -= step * g;
    }
  }
  return next;
}

void LogisticScorer::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write model file " + path.string());
  out.write(kLogisticMagic, sizeof(kLogisticMagic));
  detail::write_pod<std::uint32_t>(out, hash_bits_);
  detail::write_vector(out, weights_);
  if (!out) throw IoError("failed writing model file " + path.string());
}

std::shared_ptr<LogisticScorer> LogisticScorer::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model file " + path.string());
  char magic[sizeof(kLogisticMagic)] = {};
  in.read(magic, sizeof(magic));
  if (!in || std::string_view(magic, sizeof(magic)) != std::string_view(kLogisticMagic, sizeof(kLogisticMagic)))
    throw ParseError(path.string() + " is not a logistic scorer file");
  auto s = std::make_shared<LogisticScorer>(detail::read_pod<std::uint32_t>(in));
  auto w = detail::read_vector<double>(in);
  if (w.size() != s->weights_.size()) throw ParseError(path.string() + ": inconsistent model file");
  s->weights_ = std::move(w);
  return s;
}

bool scorer_exists(std::string_view name) { return name == "oracle" || name == "logistic"; }

std::shared_ptr<CoherenceScorer> make_scorer(std::string_view name) {
  if (name == "oracle") return std::make_shared<DuplicateOracleScorer>();
  if (name == "logistic") return std::make_shared<LogisticScorer>();
  throw NotFound("unknown coherence scorer '" + std::string(name) + "' (known: logistic, oracle)");
}

ControllerAccuracy evaluate_controller(const CoherenceScorer& scorer,
                                       std::span<const CoherenceExample> local,
                                       std::span<const CoherenceExample> global, double threshold) {
  auto count_correct = [&](std::span<const CoherenceExample> set, std::string_view name) {
    std::size_t positives = 0;
    std::size_t correct = 0;
    for (const auto& ex : set) {
      positives += ex.label == 1;
      const int predicted = scorer.score(ex.text) >= threshold ? 1 : 0;
      correct += predicted == ex.label;
    }
    if (positives * 2 != set.size())
      throw InvalidArgument(std::string(name) + " test set is not balanced 1:1 (" + std::to_string(positives) +
                            " positives of " + std::to_string(set.size()) + ")");
    return correct;
  };
  const std::size_t local_correct = count_correct(local, "local");
  const std::size_t global_correct = count_correct(global, "global");
  auto ratio = [](std::size_t a, std::size_t b) { return b == 0 ? 0.0 : static_cast<double>(a) / static_cast<double>(b); };
  return {ratio(local_correct, local.size()), ratio(global_correct, global.size()),
          ratio(local_correct + global_correct, local.size() + global.size())};
}

void write_coherence_jsonl(std::ostream& out, std::span<const CoherenceExample> examples) {
  for (const auto& ex : examples) {
    nlohmann::json row = {{"text", ex.text}, {"label", ex.label}, {"corruption", to_string(ex.corruption)}};
    out << row.dump() << '\n';
  }
}

std::vector<CoherenceExample> read_coherence_jsonl(std::istream& in) {
  std::vector<CoherenceExample> out;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (trim(text).empty()) continue;
    try {
      auto row = nlohmann::json::parse(text);
      CoherenceExample ex{row.at("text").get<std::string>(), row.at("label").get<int>(),
                          corruption_from_string(row.at("corruption").get<std::string>())};
      if ((ex.label == 1) != (ex.corruption == Corruption::kNone))
        throw InvalidArgument("label and corruption disagree");
      out.push_back(std::move(ex));
    } catch (const std::exception& e) {
      throw ParseError("coherence line " + std::to_string(line) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace procwriter
