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

#include "procwriter/bow_generator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <unordered_map>

#include "binary_io.hpp"
#include "procwriter/error.hpp"
#include "procwriter/text.hpp"

namespace procwriter {

namespace {

constexpr char kMagic[] = "PWBOW1";


std::uint64_t feature(std::string_view tag, std::string_view value) {
  return fnv1a(value, fnv1a(tag));
}

std::uint64_t step_key(std::string_view step) { return fnv1a(to_lower(trim(step))) | 1; }

std::vector<std::uint64_t> output_features(const std::string& text, bool stop) {
  std::vector<std::uint64_t> out;
  if (stop) {
    out.push_back(feature("stop", ""));
    return out;
  }
  out.push_back(feature("o:", to_lower(trim(text))));
  std::set<std::string> words;
  for (auto& w : content_words(text)) words.insert(std::move(w));
  for (const auto& w : words) out.push_back(feature("w:", w));
  return out;
}

}  // namespace

BowSoftmaxGenerator::BowSoftmaxGenerator(Options options) : options_(std::move(options)) {
  if (options_.hash_bits < 8 || options_.hash_bits > 28)
    throw InvalidArgument("hash_bits must be in [8, 28]");
  if (options_.max_candidates < 2) throw InvalidArgument("max_candidates must be at least 2");
  intern(std::string(kStopLiteral), true);
  weights_.assign(std::size_t{1} << options_.hash_bits, 0.0f);
}

std::size_t BowSoftmaxGenerator::slot(std::uint64_t prompt_feature,
                                      std::uint64_t output_feature) const {
  return hash_combine(prompt_feature, output_feature) & (weights_.size() - 1);
}

BowSoftmaxGenerator::PromptFeatures BowSoftmaxGenerator::featurize(std::string_view prompt) const {
  ParsedPrompt parsed;
  try {
    parsed = parse_prompt(prompt, prompt_template());
  } catch (const ParseError&) {
    // Free-form prompts (e.g. zero-shot instructions): use all the text.
    parsed.title = std::string(prompt);
  }

  PromptFeatures pf;
  pf.features.push_back(feature("bias", ""));
  std::set<std::string> title_words;
  for (auto& w : content_words(parsed.title)) {
    if (!is_stopword(w)) title_words.insert(std::move(w));
  }
  for (const auto& w : title_words) pf.features.push_back(feature("t:", w));
  pf.title_words.assign(title_words.begin(), title_words.end());

  const std::size_t n = parsed.steps.size();
  pf.features.push_back(feature("p:", std::to_string(std::min<std::size_t>(n, 12))));
  if (n == 0) {
    pf.features.push_back(feature("L:", "<start>"));
  } else {
    const std::string& last = parsed.steps.back();
    pf.last_step = step_key(last);
    pf.features.push_back(feature("L:", to_lower(trim(last))));
    std::set<std::string> words;
    for (auto& w : content_words(last)) words.insert(std::move(w));
    for (const auto& w : words) pf.features.push_back(feature("l:", w));
    for (const auto& s : parsed.steps) pf.features.push_back(feature("s:", to_lower(trim(s))));
  }
  return pf;
}

std::uint32_t BowSoftmaxGenerator::intern(const std::string& text, bool stop) {
  const std::string key = stop ? std::string(kStopLiteral) : text;
  auto [it, inserted] = output_ids_.try_emplace(key, static_cast<std::uint32_t>(outputs_.size()));
  if (inserted) {
    outputs_.push_back(key);
    output_features_.push_back(output_features(key, stop));
    output_counts_.push_back(0);
  }
  ++output_counts_[it->second];
  return it->second;
}

void BowSoftmaxGenerator::index_pair(const PromptFeatures& pf, std::uint32_t output) {
  for (const auto& w : pf.title_words) by_title_word_[w].push_back(output);
  if (pf.last_step != 0) by_last_step_[pf.last_step].push_back(output);
}

std::vector<std::uint32_t> BowSoftmaxGenerator::retrieve(const PromptFeatures& pf) const {
  std::unordered_map<std::uint32_t, std::uint32_t> overlap;
  for (const auto& w : pf.title_words) {
    if (auto it = by_title_word_.find(w); it != by_title_word_.end())
      for (auto id : it->second) ++overlap[id];
  }
  if (auto it = by_last_step_.find(pf.last_step); pf.last_step != 0 && it != by_last_step_.end())
    for (auto id : it->second) overlap[id] += 2;
  overlap.erase(0);

  std::vector<std::uint32_t> ids;
  ids.reserve(overlap.size());
  for (const auto& [id, _] : overlap) ids.push_back(id);
  auto rank = [&](std::uint32_t a, std::uint32_t b) {
    std::uint32_t oa = overlap.contains(a) ? overlap.at(a) : 0;
    std::uint32_t ob = overlap.contains(b) ? overlap.at(b) : 0;
    if (oa != ob) return oa > ob;
    if (output_counts_[a] != output_counts_[b]) return output_counts_[a] > output_counts_[b];
    return a < b;
  };
  if (ids.empty()) {
    // Nothing retrieved: fall back to the most frequent outputs.
    ids.resize(outputs_.size() - 1);
    std::iota(ids.begin(), ids.end(), 1u);
  }
  const std::size_t limit = options_.max_candidates - 1;
  if (ids.size() > limit) {
    std::partial_sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(limit), ids.end(), rank);
    ids.resize(limit);
  }
  ids.push_back(0);
  std::sort(ids.begin(), ids.end());
  return ids;
}

double BowSoftmaxGenerator::score(const PromptFeatures& pf, std::uint32_t output) const {
  double s = 0.0;
  for (auto f : pf.features)
    for (auto g : output_features_[output]) s += weights_[slot(f, g)];
  return s;
}

namespace {

// Log-softmax in place.
void log_softmax(std::vector<double>& scores) {
  const double mx = *std::max_element(scores.begin(), scores.end());
  double z = 0.0;
  for (double s : scores) z += std::exp(s - mx);
  const double lse = mx + std::log(z);
  for (double& s : scores) s -= lse;
}

}  // namespace

std::vector<Candidate> BowSoftmaxGenerator::topk(std::string_view prompt, std::size_t k) const {
  const PromptFeatures pf = featurize(prompt);
  const auto ids = retrieve(pf);
  std::vector<double> scores(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) scores[i] = score(pf, ids[i]);
  log_softmax(scores);

  std::vector<std::size_t> order(ids.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return ids[a] < ids[b];
  });
  order.resize(std::min(k, order.size()));

  std::vector<Candidate> out;
  out.reserve(order.size());
  for (auto i : order) out.push_back({outputs_[ids[i]], std::min(0.0, scores[i])});
  return out;
}

std::shared_ptr<Generator> BowSoftmaxGenerator::train(std::span<const TrainingPair> pairs,
                                                      const TrainingConfig& config) const {
  config.validate();
  auto next = std::make_shared<BowSoftmaxGenerator>(*this);
  const PromptTemplate tmpl = prompt_template();

  struct Row {
    PromptFeatures pf;
    std::uint32_t gold;
    std::vector<std::uint32_t> candidates;
  };
  std::vector<Row> rows;
  rows.reserve(pairs.size());
  for (const auto& p : pairs) {
    Row r{next->featurize(p.input), 0, {}};
    r.gold = next->intern(p.output, is_stop_literal(p.output, tmpl.stop_literal));
    next->index_pair(r.pf, r.gold);
    rows.push_back(std::move(r));
  }
  auto dedupe = [](auto& index) {
    for (auto& [_, ids] : index) {
      std::sort(ids.begin(), ids.end());
      ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    }
  };
  dedupe(next->by_title_word_);
  dedupe(next->by_last_step_);
  for (auto& r : rows) {
    r.candidates = next->retrieve(r.pf);
    if (!std::binary_search(r.candidates.begin(), r.candidates.end(), r.gold))
      r.candidates.insert(std::upper_bound(r.candidates.begin(), r.candidates.end(), r.gold), r.gold);
  }

  std::vector<std::size_t> order(rows.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(config.seed);
  std::unordered_map<std::size_t, double> grad;
  std::vector<double> scores;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      grad.clear();
      for (std::size_t b = start; b < stop; ++b) {
        const Row& r = rows[order[b]];
        scores.resize(r.candidates.size());
        for (std::size_t i = 0; i < r.candidates.size(); ++i) scores[i] = next->score(r.pf, r.candidates[i]);
        log_softmax(scores);
        for (std::size_t i = 0; i < r.candidates.size(); ++i) {
          const double coef = std::exp(scores[i]) - (r.candidates[i] == r.gold ? 1.0 : 0.0);
          if (std::abs(coef) < 1e-9) continue;
          for (auto f : r.pf.features)
            for (auto g : next->output_features_[r.candidates[i]]) grad[next->slot(f, g)] += coef;
        }
      }
      const double step = config.learning_rate / static_cast<double>(stop - start);
      for (const auto& [s, g] : grad) next->weights_[s] -= static_cast<float>(step * g);
    }
  }
  return next;
}

double BowSoftmaxGenerator::loss(std::span<const TrainingPair> pairs) const {
  double total = 0.0;
  std::size_t n = 0;
  for (const auto& p : pairs) {
    const std::string key = is_stop_literal(p.output) ? std::string(kStopLiteral) : p.output;
    auto it = output_ids_.find(key);
    if (it == output_ids_.end()) continue;
    const PromptFeatures pf = featurize(p.input);
    auto ids = retrieve(pf);
    if (!std::binary_search(ids.begin(), ids.end(), it->second))
      ids.insert(std::upper_bound(ids.begin(), ids.end(), it->second), it->second);
    std::vector<double> scores(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) scores[i] = score(pf, ids[i]);
    log_softmax(scores);
    total -= scores[static_cast<std::size_t>(std::lower_bound(ids.begin(), ids.end(), it->second) - ids.begin())];
    ++n;
  }
  return n == 0 ? 0.0 : total / static_cast<double>(n);
}

void BowSoftmaxGenerator::save(const std::filesystem::path& path) const {
  using namespace detail;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write model file " + path.string());
  out.write(kMagic, sizeof(kMagic));
  write_pod<std::uint32_t>(out, options_.hash_bits);
  write_pod<std::uint64_t>(out, options_.max_candidates);
  write_string(out, options_.mask);
  write_pod<std::uint64_t>(out, outputs_.size());
  for (const auto& o : outputs_) write_string(out, o);
  write_vector(out, output_counts_);
  write_pod<std::uint64_t>(out, by_title_word_.size());
  for (const auto& [w, ids] : by_title_word_) {
    write_string(out, w);
    write_vector(out, ids);
  }
  write_pod<std::uint64_t>(out, by_last_step_.size());
  for (const auto& [k, ids] : by_last_step_) {
    write_pod(out, k);
    write_vector(out, ids);
  }
  write_vector(out, weights_);
  if (!out) throw IoError("failed writing model file " + path.string());
}

std::shared_ptr<BowSoftmaxGenerator> BowSoftmaxGenerator::load(const std::filesystem::path& path) {
  using namespace detail;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model file " + path.string());
  char magic[sizeof(kMagic)] = {};
  in.read(magic, sizeof(magic));
  if (!in || std::string_view(magic, sizeof(magic)) != std::string_view(kMagic, sizeof(kMagic)))
    throw ParseError(path.string() + " is not a bow-softmax model file");
  Options o;
  o.hash_bits = read_pod<std::uint32_t>(in);
  o.max_candidates = read_pod<std::uint64_t>(in);
  o.mask = read_string(in);
  auto g = std::make_shared<BowSoftmaxGenerator>(o);
  g->outputs_.clear();
  g->output_features_.clear();
  g->output_ids_.clear();
  const auto n = read_pod<std::uint64_t>(in);
  for (std::uint64_t i = 0; i < n; ++i) {
    std::string text = read_string(in);
    g->output_ids_.emplace(text, static_cast<std::uint32_t>(i));
    g->output_features_.push_back(output_features(text, i == 0));
    g->outputs_.push_back(std::move(text));
  }
  g->output_counts_ = read_vector<std::uint32_t>(in);
  for (auto m = read_pod<std::uint64_t>(in); m > 0; --m) {
    std::string w = read_string(in);
    g->by_title_word_[w] = read_vector<std::uint32_t>(in);
  }
  for (auto m = read_pod<std::uint64_t>(in); m > 0; --m) {
    auto k = read_pod<std::uint64_t>(in);
    g->by_last_step_[k] = read_vector<std::uint32_t>(in);
  }
  g->weights_ = read_vector<float>(in);
  if (g->weights_.size() != (std::size_t{1} << o.hash_bits) || g->output_counts_.size() != n)
    throw ParseError(path.string() + ": inconsistent model file");
  return g;
}

}  // namespace procwriter
