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
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "procwriter/generator.hpp"
#include "procwriter/prompting.hpp"
#include "procwriter/types.hpp"

namespace procwriter {

enum class Corruption { kNone, kDuplicate, kIrrelevant };

std::string_view to_string(Corruption c);
Corruption corruption_from_string(std::string_view s);

struct CoherenceExample {
  std::string text;
  int label = 1;  // 1 coherent, 0 incoherent; 1 iff corruption == kNone
  Corruption corruption = Corruption::kNone;

  friend bool operator==(const CoherenceExample&,
                         const CoherenceExample&) = default;
};

using Rng = std::mt19937_64;

struct CorruptedSequence {
  SubEventSequence sequence;
  std::size_t inserted_at = 0;  // index of the inserted step in `sequence`
};

// Copies a uniformly chosen step to a uniformly chosen gap (m + 1 gaps).
// Throws InvalidArgument on an empty sequence.
CorruptedSequence corrupt_local(const SubEventSequence& seq, Rng& rng);

// Inserts a step drawn from a donor whose title differs from `self`.
// Throws InvalidArgument when no such donor exists.
CorruptedSequence corrupt_global(const SubEventSequence& seq,
                                 std::span<const ProcessExample> donor_pool,
                                 const Process& self, Rng& rng);

// Per reference: 1 positive, n_negatives duplicate negatives, then
// n_negatives irrelevant negatives. The donor pool is the split itself.
std::vector<CoherenceExample> build_coherence_dataset(
    const DatasetSplit& split, std::size_t n_negatives, std::uint64_t seed,
    const PromptTemplate& tmpl = {});

// Same, drawing irrelevant steps from an explicit donor pool.
std::vector<CoherenceExample> build_coherence_dataset(
    const DatasetSplit& split, std::span<const ProcessExample> donor_pool,
    std::size_t n_negatives, std::uint64_t seed, const PromptTemplate& tmpl = {});

struct ControllerTestSets {
  std::vector<CoherenceExample> local;   // positives + duplicate negatives
  std::vector<CoherenceExample> global;  // positives + irrelevant negatives
};

// Two 1:1 balanced sets, one negative of each kind per reference.
ControllerTestSets build_controller_test_sets(const DatasetSplit& split,
                                              std::uint64_t seed,
                                              const PromptTemplate& tmpl = {});

inline constexpr double kScoreEpsilon = 1e-7;

// Balanced cross-entropy:
//   -(y log s + (1 / 2N) (1 - y) log(1 - s))
// Throws InvalidArgument unless 0 < score < 1, label is 0/1 and N >= 1.
double coherence_loss(int label, double score, std::size_t n_negatives);

// d loss / d score.
double coherence_loss_grad(int label, double score, std::size_t n_negatives);

double clamp_score(double score, double eps = kScoreEpsilon);

// Coherence scorer contract: score in [0, 1], higher is more coherent.
class CoherenceScorer : public std::enable_shared_from_this<CoherenceScorer> {
 public:
  virtual ~CoherenceScorer() = default;
  virtual std::string name() const = 0;
  virtual double score(std::string_view text) const = 0;
  virtual std::shared_ptr<CoherenceScorer> train(
      std::span<const CoherenceExample> examples, const TrainingConfig& config,
      std::size_t n_negatives) const = 0;
};

// Scores 0 when two steps are identical (case- and whitespace-insensitive)
// and 1 otherwise. Training is a no-op.
class DuplicateOracleScorer final : public CoherenceScorer {
 public:
  std::string name() const override { return "oracle"; }
  double score(std::string_view text) const override;
  std::shared_ptr<CoherenceScorer> train(std::span<const CoherenceExample>,
                                         const TrainingConfig&,
                                         std::size_t) const override;
};

// Wraps a callable; used by tests and by callers with their own model.
class FunctionScorer final : public CoherenceScorer {
 public:
  explicit FunctionScorer(std::function<double(std::string_view)> fn,
                          std::string name = "function")
      : fn_(std::move(fn)), name_(std::move(name)) {}
  std::string name() const override { return name_; }
  double score(std::string_view text) const override { return fn_(text); }
  std::shared_ptr<CoherenceScorer> train(std::span<const CoherenceExample>,
                                         const TrainingConfig&,
                                         std::size_t) const override;

 private:
  std::function<double(std::string_view)> fn_;
  std::string name_;
};

// Logistic regression over hashed lexical features plus a few structural
// ones (repeated steps, lexical support of each step by the rest of the
// text), trained with the balanced loss above.
class LogisticScorer final : public CoherenceScorer {
 public:
  explicit LogisticScorer(unsigned hash_bits = 18);

  std::string name() const override { return "logistic"; }
  double score(std::string_view text) const override;
  std::shared_ptr<CoherenceScorer> train(std::span<const CoherenceExample> examples,
                                         const TrainingConfig& config,
                                         std::size_t n_negatives) const override;

  void save(const std::filesystem::path& path) const;
  static std::shared_ptr<LogisticScorer> load(const std::filesystem::path& path);

 private:
  struct Feature {
    std::size_t index;
    double value;
  };
  std::vector<Feature> featurize(std::string_view text) const;
  double logit(std::span<const Feature> features) const;

  unsigned hash_bits_;
  std::vector<double> weights_;
};

// Built-ins: "oracle", "logistic". Throws NotFound otherwise.
std::shared_ptr<CoherenceScorer> make_scorer(std::string_view name);
bool scorer_exists(std::string_view name);

struct ControllerAccuracy {
  double local = 0.0;
  double global = 0.0;
  double all = 0.0;
};

// Fraction of examples where (score >= threshold) agrees with the label.
// Each set must hold exactly as many positives as negatives.
ControllerAccuracy evaluate_controller(const CoherenceScorer& scorer,
                                       std::span<const CoherenceExample> local,
                                       std::span<const CoherenceExample> global,
                                       double threshold = 0.5);

// {"text": ..., "label": 0|1, "corruption": "none"|"duplicate"|"irrelevant"}
void write_coherence_jsonl(std::ostream& out,
                           std::span<const CoherenceExample> examples);
std::vector<CoherenceExample> read_coherence_jsonl(std::istream& in);

}  // namespace procwriter
