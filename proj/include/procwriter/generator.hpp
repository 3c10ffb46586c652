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

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "procwriter/prompting.hpp"

namespace procwriter {

// A continuation proposed by a generator with its log conditional
// probability log P(text | prompt).
struct Candidate {
  std::string text;
  double logprob = 0.0;

  friend bool operator==(const Candidate&, const Candidate&) = default;
};

// Flat key -> scalar map, as passed through the adapter registry.
using Hyperparameters = std::map<std::string, double, std::less<>>;

struct TrainingConfig {
  double learning_rate = 5e-5;
  std::size_t batch_size = 32;
  std::size_t epochs = 4;
  std::uint64_t seed = 0;

  // Recognised keys: learning_rate, batch_size, epochs, seed. Throws
  // InvalidArgument for non-positive rates, zero sizes or non-integral
  // counts.
  static TrainingConfig from(const Hyperparameters& hp);
  void validate() const;
};

// Conditional generator contract. Implementations are not required to be
// thread-safe: serialize calls per instance.
class Generator : public std::enable_shared_from_this<Generator> {
 public:
  virtual ~Generator() = default;

  virtual std::string name() const = 0;
  virtual std::string mask_token() const { return "[M]"; }

  // Exactly min(k, available) candidates, distinct texts, sorted by
  // non-increasing logprob. Deterministic for fixed state and inputs.
  virtual std::vector<Candidate> topk(std::string_view prompt,
                                      std::size_t k) const = 0;

  // Returns the trained generator; implementations may return `this`.
  virtual std::shared_ptr<Generator> train(std::span<const TrainingPair> pairs,
                                           const TrainingConfig& config) const = 0;

  PromptTemplate prompt_template() const;
};

// Validates the pairs and config, then delegates to Generator::train.
std::shared_ptr<Generator> fine_tune(const std::shared_ptr<Generator>& generator,
                                     std::span<const TrainingPair> pairs,
                                     const Hyperparameters& hp);

// Checks the Candidate ordering/distinctness/logprob invariants; throws
// InvalidArgument naming `context` on violation.
void validate_candidates(std::span<const Candidate> candidates,
                         std::string_view context);

// Test double: answers from a fixed prompt -> candidates table.
class MockGenerator final : public Generator {
 public:
  using Script = std::map<std::string, std::vector<Candidate>, std::less<>>;

  // Throws InvalidArgument if any scripted list breaks the Candidate
  // invariants.
  explicit MockGenerator(Script script, std::string mask = "[M]");

  // Replays a set of training pairs: for each prompt, the distinct outputs
  // with logprob log(count / total), most frequent first, ties by first
  // occurrence.
  static std::shared_ptr<MockGenerator> from_pairs(
      std::span<const TrainingPair> pairs, std::string mask = "[M]");

  // JSON object {"<prompt>": [{"text": ..., "logprob": ...}, ...], ...}
  static std::shared_ptr<MockGenerator> from_json_file(const std::string& path);

  std::string name() const override { return "mock"; }
  std::string mask_token() const override { return mask_; }

  // Throws NotFound naming the nearest scripted prompt when `prompt` is not
  // scripted.
  std::vector<Candidate> topk(std::string_view prompt,
                              std::size_t k) const override;

  // No-op.
  std::shared_ptr<Generator> train(std::span<const TrainingPair> pairs,
                                   const TrainingConfig& config) const override;

  const Script& script() const { return script_; }

 private:
  Script script_;
  std::string mask_;
};

// Backend options handed to a registry factory. `params` carries backend
// specific settings such as "mock_script".
struct BackendOptions {
  std::map<std::string, std::string, std::less<>> params;
  // Pairs a replaying mock should answer from when no script is given.
  std::vector<TrainingPair> replay_pairs;
};

using GeneratorFactory =
    std::function<std::shared_ptr<Generator>(const BackendOptions&)>;

// Name -> factory. Built-ins: "mock", "bow-softmax".
class GeneratorRegistry {
 public:
  static GeneratorRegistry& instance();

  void add(std::string name, GeneratorFactory factory);
  bool contains(std::string_view name) const;
  std::vector<std::string> names() const;
  // Throws NotFound for unknown names.
  std::shared_ptr<Generator> create(std::string_view name,
                                    const BackendOptions& options) const;

 private:
  GeneratorRegistry();
  std::map<std::string, GeneratorFactory, std::less<>> factories_;
};

}  // namespace procwriter
