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

#include "procwriter/baselines.hpp"

#include <cctype>
#include <random>

#include "procwriter/error.hpp"
#include "procwriter/text.hpp"

namespace procwriter {

std::string join_steps(const SubEventSequence& seq, std::string_view separator) {
  std::string out;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (i > 0) out += separator;
    out += seq[i].text();
  }
  return out;
}

namespace {

SubEventSequence to_sequence(const std::vector<std::string_view>& pieces) {
  SubEventSequence seq;
  for (auto piece : pieces) {
    piece = trim(piece);
    if (piece.empty() || is_stop_literal(piece)) continue;
    seq.push_back(SubEvent(std::string(piece)));
  }
  return seq;
}

}  // namespace

SubEventSequence split_steps(std::string_view text, std::string_view separator) {
  if (separator.empty()) throw InvalidArgument("split_steps: empty separator");
  std::vector<std::string_view> pieces;
  for (std::size_t at = text.find(separator); at != std::string_view::npos; at = text.find(separator)) {
    pieces.push_back(text.substr(0, at));
    text.remove_prefix(at + separator.size());
  }
  pieces.push_back(text);
  return to_sequence(pieces);
}

std::string all_at_once_prompt(const Process& process) {
  PromptTemplate tmpl;
  return tmpl.question_prefix + process.title() + tmpl.question_suffix;
}

std::vector<TrainingPair> all_at_once_pairs(const ProcessExample& example) {
  std::vector<TrainingPair> pairs;
  for (const auto& ref : example.references())
    pairs.push_back({all_at_once_prompt(example.process()), join_steps(ref)});
  return pairs;
}

SubEventSequence all_at_once_decode(const Process& process, const Generator& generator) {
  const auto candidates = generator.topk(all_at_once_prompt(process), 1);
  if (candidates.empty()) return {};
  return split_steps(candidates.front().text);
}

SubEventSequence top1_similar(std::span<const double> query, const DatasetSplit& train,
                              std::span<const std::vector<double>> title_embeddings, std::uint64_t seed) {
  if (train.empty()) throw InvalidArgument("top1_similar: empty training split");
  if (title_embeddings.size() != train.size())
    throw InvalidArgument("top1_similar: one title embedding per training example required");
  std::size_t best = 0;
  double best_sim = cosine(query, title_embeddings[0]);
  for (std::size_t i = 1; i < train.size(); ++i) {
    const double sim = cosine(query, title_embeddings[i]);
    if (sim > best_sim) {
      best = i;
      best_sim = sim;
    }
  }
  const auto& refs = train.examples[best].references();
  std::mt19937_64 rng(seed);
  return refs[std::uniform_int_distribution<std::size_t>(0, refs.size() - 1)(rng)];
}

SubEventSequence top1_similar(const Process& process, const DatasetSplit& train, const Embedder& embedder,
                              std::uint64_t seed) {
  if (train.empty()) throw InvalidArgument("top1_similar: empty training split");
  std::vector<std::vector<double>> titles;
  titles.reserve(train.size());
  for (const auto& ex : train.examples) titles.push_back(embedder.embed(ex.process().title()));
  return top1_similar(embedder.embed(process.title()), train, titles, seed);
}

std::string zero_shot_prompt(const Process& process) {
  return "How to " + process.title() + "? Generate the events to solve it.";
}

std::vector<std::string> segment_sentences(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  auto flush = [&] {
    auto t = trim(current);
    if (!t.empty()) out.emplace_back(t);
    current.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '\n' || c == '\r') {
      flush();
      continue;
    }
    current.push_back(c);
    const bool terminal = c == '.' || c == '!' || c == '?';
    if (terminal && (i + 1 == text.size() || std::isspace(static_cast<unsigned char>(text[i + 1])))) flush();
  }
  flush();
  return out;
}

SubEventSequence zero_shot_decode(const Process& process, const Generator& generator) {
  const auto candidates = generator.topk(zero_shot_prompt(process), 1);
  if (candidates.empty()) return {};
  const auto sentences = segment_sentences(candidates.front().text);
  return to_sequence({sentences.begin(), sentences.end()});
}

}  // namespace procwriter
