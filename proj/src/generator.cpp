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

#include "procwriter/generator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "procwriter/bow_generator.hpp"
#include "procwriter/error.hpp"
#include "procwriter/text.hpp"

namespace procwriter {

namespace {

std::size_t as_count(const Hyperparameters& hp, std::string_view key, std::size_t fallback) {
  auto it = hp.find(key);
  if (it == hp.end()) return fallback;
  double v = it->second;
  if (!std::isfinite(v) || v < 0 || std::floor(v) != v)
    throw InvalidArgument("hyperparameter '" + std::string(key) + "' must be a non-negative integer");
  return static_cast<std::size_t>(v);
}

}  // namespace

TrainingConfig TrainingConfig::from(const Hyperparameters& hp) {
  static const std::set<std::string, std::less<>> known = {"learning_rate", "batch_size", "epochs",
                                                           "seed"};
  for (const auto& [key, value] : hp) {
    if (!known.contains(key)) throw InvalidArgument("unknown training hyperparameter '" + key + "'");
  }
  TrainingConfig c;
  if (auto it = hp.find("learning_rate"); it != hp.end()) c.learning_rate = it->second;
  c.batch_size = as_count(hp, "batch_size", c.batch_size);
  c.epochs = as_count(hp, "epochs", c.epochs);
  c.seed = as_count(hp, "seed", c.seed);
  c.validate();
  return c;
}

void TrainingConfig::validate() const {
  if (!(learning_rate > 0) || !std::isfinite(learning_rate))
    throw InvalidArgument("learning rate must be positive");
  if (batch_size == 0) throw InvalidArgument("batch size must be at least 1");
  if (epochs == 0) throw InvalidArgument("epochs must be at least 1");
}

PromptTemplate Generator::prompt_template() const {
  PromptTemplate t;
  t.mask = mask_token();
  return t;
}

std::shared_ptr<Generator> fine_tune(const std::shared_ptr<Generator>& generator,
                                     std::span<const TrainingPair> pairs,
                                     const Hyperparameters& hp) {
  if (!generator) throw InvalidArgument("fine_tune: null generator");
  if (pairs.empty()) throw InvalidArgument("fine_tune: no training pairs");
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (trim(pairs[i].input).empty() || trim(pairs[i].output).empty())
      throw InvalidArgument("fine_tune: training pair " + std::to_string(i) + " has a blank input or output");
  }
  TrainingConfig config = TrainingConfig::from(hp);
  try {
    return generator->train(pairs, config);
  } catch (...) {
    rethrow_with_context("fine-tuning backend '" + generator->name() + "' failed: ");
  }
}

void validate_candidates(std::span<const Candidate> candidates, std::string_view context) {
  std::set<std::string_view> seen;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto& c = candidates[i];
    auto where = [&] {
      return std::string(context) + ": candidate " + std::to_string(i) + " ('" + c.text + "')";
    };
    if (!std::isfinite(c.logprob) || c.logprob > 0.0)
      throw InvalidArgument(where() + " has logprob outside (-inf, 0]");
    if (i > 0 && c.logprob > candidates[i - 1].logprob)
      throw InvalidArgument(where() + " breaks non-increasing logprob order");
    if (!seen.insert(c.text).second) throw InvalidArgument(where() + " duplicates an earlier text");
  }
}

MockGenerator::MockGenerator(Script script, std::string mask)
    : script_(std::move(script)), mask_(std::move(mask)) {
  for (const auto& [prompt, candidates] : script_) validate_candidates(candidates, "script for '" + prompt + "'");
}

std::shared_ptr<MockGenerator> MockGenerator::from_pairs(std::span<const TrainingPair> pairs,
                                                         std::string mask) {
  struct Tally {
    std::vector<std::string> order;
    std::unordered_map<std::string, std::size_t> counts;
    std::size_t total = 0;
  };
  std::map<std::string, Tally, std::less<>> tallies;
  for (const auto& p : pairs) {
    auto& t = tallies[p.input];
    if (t.counts[p.output]++ == 0) t.order.push_back(p.output);
    ++t.total;
  }
  Script script;
  for (auto& [prompt, t] : tallies) {
    std::stable_sort(t.order.begin(), t.order.end(), [&](const auto& a, const auto& b) {
      return t.counts[a] > t.counts[b];
    });
    auto& list = script[prompt];
    for (const auto& text : t.order)
      list.push_back({text, std::log(static_cast<double>(t.counts[text]) / static_cast<double>(t.total))});
  }
  return std::make_shared<MockGenerator>(std::move(script), std::move(mask));
}

std::shared_ptr<MockGenerator> MockGenerator::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open mock script " + path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("mock script " + path + ": " + e.what());
  }
  if (!doc.is_object()) throw ParseError("mock script " + path + ": expected an object");
  Script script;
  for (const auto& [prompt, list] : doc.items()) {
    if (!list.is_array()) throw ParseError("mock script " + path + ": '" + prompt + "' is not an array");
    auto& out = script[prompt];
    for (const auto& c : list) {
      if (!c.is_object() || !c.contains("text") || !c.contains("logprob"))
        throw ParseError("mock script " + path + ": candidate needs 'text' and 'logprob'");
      out.push_back({c.at("text").get<std::string>(), c.at("logprob").get<double>()});
    }
  }
  return std::make_shared<MockGenerator>(std::move(script));
}

std::vector<Candidate> MockGenerator::topk(std::string_view prompt, std::size_t k) const {
  auto it = script_.find(prompt);
  if (it == script_.end()) {
    std::string nearest;
    std::size_t best = std::string::npos;
    for (const auto& [scripted, _] : script_) {
      std::size_t d = levenshtein(prompt, scripted);
      if (d < best) {
        best = d;
        nearest = scripted;
      }
    }
    throw NotFound("mock generator has no script for prompt '" + std::string(prompt) + "'" +
                   (script_.empty() ? std::string(" (script is empty)")
                                    : "; nearest scripted prompt: '" + nearest + "'"));
  }
  const auto& list = it->second;
  return {list.begin(), list.begin() + static_cast<std::ptrdiff_t>(std::min(k, list.size()))};
}

std::shared_ptr<Generator> MockGenerator::train(std::span<const TrainingPair>,
                                                const TrainingConfig&) const {
  return std::const_pointer_cast<Generator>(shared_from_this());
}

GeneratorRegistry::GeneratorRegistry() {
  add("mock", [](const BackendOptions& options) -> std::shared_ptr<Generator> {
    if (auto it = options.params.find("mock_script"); it != options.params.end() && !it->second.empty())
      return MockGenerator::from_json_file(it->second);
    return MockGenerator::from_pairs(options.replay_pairs);
  });
  add("bow-softmax", [](const BackendOptions& options) -> std::shared_ptr<Generator> {
    BowSoftmaxGenerator::Options o;
    if (auto it = options.params.find("hash_bits"); it != options.params.end())
      o.hash_bits = static_cast<unsigned>(std::stoul(it->second));
    if (auto it = options.params.find("max_candidates"); it != options.params.end())
      o.max_candidates = std::stoul(it->second);
    return std::make_shared<BowSoftmaxGenerator>(o);
  });
}

GeneratorRegistry& GeneratorRegistry::instance() {
  static GeneratorRegistry registry;
  return registry;
}

void GeneratorRegistry::add(std::string name, GeneratorFactory factory) {
  factories_[std::move(name)] = std::move(factory);
}

bool GeneratorRegistry::contains(std::string_view name) const { return factories_.contains(name); }

std::vector<std::string> GeneratorRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : factories_) out.push_back(name);
  return out;
}

std::shared_ptr<Generator> GeneratorRegistry::create(std::string_view name,
                                                     const BackendOptions& options) const {
  auto it = factories_.find(name);
  if (it == factories_.end()) {
    std::string known;
    for (const auto& n : names()) known += (known.empty() ? "" : ", ") + n;
    throw NotFound("unknown generation backend '" + std::string(name) + "' (known: " + known + ")");
  }
  return it->second(options);
}

}  // namespace procwriter
