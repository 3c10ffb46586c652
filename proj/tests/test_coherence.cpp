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

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "procwriter/coherence.hpp"
#include "procwriter/dataset.hpp"
#include "procwriter/error.hpp"
#include "procwriter/prompting.hpp"
#include "synthetic.hpp"
#include "test_util.hpp"

using namespace procwriter;

namespace {

const std::vector<std::string> kEvening = {"Turn the lights down.", "Put on some music or some relaxing nature sounds.",
                                           "Make sure the temperature is comfortable.", "Turn your phone off."};

std::multiset<std::string> multiset_of(const SubEventSequence& s) {
  const auto t = s.texts();
  return {t.begin(), t.end()};
}

DatasetSplit n_references(std::size_t n) {
  DatasetSplit s{"train", {}};
  for (std::size_t i = 0; i < n; ++i)
    s.examples.emplace_back(Process("process " + std::to_string(i)),
                            std::vector<SubEventSequence>{SubEventSequence::from_texts(
                                {"first " + std::to_string(i) + ".", "second " + std::to_string(i) + "."})});
  return s;
}

}  // namespace

TEST_CASE("corruption names round-trip") {
  for (auto c : {Corruption::kNone, Corruption::kDuplicate, Corruption::kIrrelevant})
    CHECK(corruption_from_string(to_string(c)) == c);
  CHECK_THROWS(corruption_from_string("shuffle"));
}

TEST_CASE("local corruption reproduces the duplicate-negative example for some seed") {
  const auto evening = SubEventSequence::from_texts(kEvening);
  bool found = false;
  for (std::uint64_t seed = 0; seed < 2000 && !found; ++seed) {
    Rng rng(seed);
    const auto c = corrupt_local(evening, rng);
    if (c.inserted_at == 2 && c.sequence[2].text() == "Turn the lights down.") {
      std::vector<std::string> expected = kEvening;
      expected.insert(expected.begin() + 2, "Turn the lights down.");
      CHECK(c.sequence.texts() == expected);
      found = true;
    }
  }
  CHECK(found);
}

TEST_CASE("global corruption reproduces the irrelevant-negative example for some seed") {
  const DatasetSplit train = load_split(testing::fixture_dir(), "train");
  const auto evening = SubEventSequence::from_texts(kEvening);
  bool found = false;
  for (std::uint64_t seed = 0; seed < 20000 && !found; ++seed) {
    Rng rng(seed);
    const auto c = corrupt_global(evening, train.examples, Process("have a relaxing evening"), rng);
    if (c.inserted_at == 3 && c.sequence[3].text() == "Place eggs in a pot of water.") {
      CHECK(c.sequence.size() == 5);
      CHECK(c.sequence[4].text() == "Turn your phone off.");
      found = true;
    }
  }
  CHECK(found);
}

TEST_CASE("corrupt_local edge cases and multiset invariant") {
  Rng rng(1);
  CHECK_THROWS_AS(corrupt_local(SubEventSequence{}, rng), InvalidArgument);
  const auto single = corrupt_local(SubEventSequence::from_texts({"Only."}), rng);
  CHECK(single.sequence.texts() == std::vector<std::string>{"Only.", "Only."});

  std::mt19937_64 gen(3);
  std::map<std::size_t, int> gaps;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<std::string> steps;
    const std::size_t m = 1 + gen() % 7;
    for (std::size_t i = 0; i < m; ++i) steps.push_back("s" + std::to_string(gen() % 5));
    const auto s = SubEventSequence::from_texts(steps);
    const auto c = corrupt_local(s, rng);
    REQUIRE(c.sequence.size() == m + 1);
    auto before = multiset_of(s);
    auto after = multiset_of(c.sequence);
    // removing the inserted element gives back the input multiset
    after.erase(after.find(c.sequence[c.inserted_at].text()));
    CHECK(after == before);
    CHECK(before.count(c.sequence[c.inserted_at].text()) >= 1);
    if (m == 3) gaps[c.inserted_at]++;
  }
  CHECK(gaps.size() == 4);  // every gap is reachable, including both ends
}

TEST_CASE("corrupt_global donor rules") {
  Rng rng(2);
  const auto s = SubEventSequence::from_texts({"a.", "b."});
  const std::vector<ProcessExample> same = {
      ProcessExample(Process("x"), {SubEventSequence::from_texts({"c."})}),
      ProcessExample(Process("x"), {SubEventSequence::from_texts({"d."})})};
  CHECK_THROWS_AS(corrupt_global(s, same, Process("x"), rng), InvalidArgument);

  const DatasetSplit train = load_split(testing::fixture_dir(), "train");
  for (int trial = 0; trial < 500; ++trial) {
    const auto& self = train.examples[static_cast<std::size_t>(trial) % train.size()];
    const auto& ref = self.references()[0];
    const auto c = corrupt_global(ref, train.examples, self.process(), rng);
    REQUIRE(c.sequence.size() == ref.size() + 1);
    const std::string inserted = c.sequence[c.inserted_at].text();
    bool from_other = false;
    for (const auto& ex : train.examples) {
      if (ex.process() == self.process()) continue;
      for (const auto& r : ex.references())
        for (const auto& e : r) from_other |= e.text() == inserted;
    }
    CHECK(from_other);
    SubEventSequence rest;
    for (std::size_t i = 0; i < c.sequence.size(); ++i)
      if (i != c.inserted_at) rest.push_back(c.sequence[i]);
    CHECK(rest == ref);
  }
}

TEST_CASE("build_coherence_dataset counts and layout") {
  const auto ten = build_coherence_dataset(n_references(10), 2, 0);
  CHECK(ten.size() == 50);
  CHECK(std::count_if(ten.begin(), ten.end(), [](const auto& e) { return e.label == 1; }) == 10);
  for (std::size_t i = 0; i < ten.size(); i += 5) {
    CHECK(ten[i].corruption == Corruption::kNone);
    CHECK(ten[i + 1].corruption == Corruption::kDuplicate);
    CHECK(ten[i + 2].corruption == Corruption::kDuplicate);
    CHECK(ten[i + 3].corruption == Corruption::kIrrelevant);
    CHECK(ten[i + 4].corruption == Corruption::kIrrelevant);
  }
  for (const auto& e : ten) CHECK((e.label == 1) == (e.corruption == Corruption::kNone));

  DatasetSplit two = n_references(2);
  const auto three = build_coherence_dataset(two, 1, 0);
  CHECK(three.size() == 6);
  DatasetSplit one = n_references(1);
  CHECK_THROWS_AS(build_coherence_dataset(one, 1, 0), InvalidArgument);  // no donor
  CHECK_THROWS_AS(build_coherence_dataset(two, 0, 0), InvalidArgument);
}

TEST_CASE("N = 1 over one reference gives 3 examples") {
  DatasetSplit s = n_references(1);
  const DatasetSplit donors = n_references(3);
  const auto all = build_coherence_dataset(s, std::span<const ProcessExample>(donors.examples).subspan(1), 1, 5);
  REQUIRE(all.size() == 3);
  CHECK(all[0].label == 1);
  CHECK(all[1].corruption == Corruption::kDuplicate);
  CHECK(all[2].corruption == Corruption::kIrrelevant);
}

TEST_CASE("seed changes negatives, not counts or positives") {
  const DatasetSplit train = load_split(testing::fixture_dir(), "train");
  const auto a = build_coherence_dataset(train, 2, 1);
  const auto b = build_coherence_dataset(train, 2, 2);
  REQUIRE(a.size() == b.size());
  CHECK(a != b);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].corruption == b[i].corruption);
    if (a[i].label == 1) CHECK(a[i].text == b[i].text);
  }
  CHECK(a == build_coherence_dataset(train, 2, 1));
}

TEST_CASE("negative texts carry their corruption") {
  const DatasetSplit train = load_split(testing::fixture_dir(), "train");
  const auto data = build_coherence_dataset(train, 2, 7);
  std::size_t at = 0;
  for (const auto& ex : train.examples)
    for (const auto& ref : ex.references()) {
      const auto source = ref.texts();
      for (std::size_t j = 0; j < 5; ++j, ++at) {
        const auto parsed = parse_prompt(data[at].text);
        CHECK(parsed.title == ex.process().title());
        if (data[at].corruption == Corruption::kDuplicate) {
          std::set<std::string> distinct(parsed.steps.begin(), parsed.steps.end());
          CHECK(distinct.size() < parsed.steps.size());
        } else if (data[at].corruption == Corruption::kIrrelevant) {
          CHECK(std::any_of(parsed.steps.begin(), parsed.steps.end(), [&](const std::string& s) {
            return std::find(source.begin(), source.end(), s) == source.end();
          }));
        } else {
          CHECK(parsed.steps == source);
        }
      }
    }
  CHECK(at == data.size());
}

TEST_CASE("balanced loss values") {
  CHECK(coherence_loss(1, 0.8, 2) == doctest::Approx(0.223144).epsilon(1e-5));
  CHECK(std::abs(coherence_loss(1, 0.8, 2) - 0.223144) < 1e-5);
  CHECK(std::abs(coherence_loss(0, 0.5, 2) - 0.173287) < 1e-5);
  for (std::size_t n = 1; n < 10; ++n) CHECK(coherence_loss(1, 0.5, n) == doctest::Approx(-std::log(0.5)));
  CHECK_THROWS_AS(coherence_loss(1, 0.0, 2), InvalidArgument);
  CHECK_THROWS_AS(coherence_loss(0, 1.0, 2), InvalidArgument);
  CHECK_THROWS_AS(coherence_loss(2, 0.5, 2), InvalidArgument);
  CHECK_THROWS_AS(coherence_loss(1, 0.5, 0), InvalidArgument);
  CHECK(coherence_loss(1, clamp_score(1.0), 2) >= 0.0);
  CHECK(clamp_score(0.0) > 0.0);
  CHECK(clamp_score(1.0) < 1.0);
}

TEST_CASE("loss gradient matches central differences and has the right sign") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.01, 0.99);
  for (int i = 0; i < 100; ++i) {
    const double s = u(rng);
    const int y = static_cast<int>(rng() % 2);
    const std::size_t n = 1 + rng() % 4;
    const double analytic = coherence_loss_grad(y, s, n);
    const double numeric =
        oracle::central_difference([&](double x) { return coherence_loss(y, x, n); }, s, 1e-6);
    CHECK(std::abs(analytic - numeric) <= 1e-6 * std::abs(numeric));
    CHECK(coherence_loss(y, s, n) >= 0.0);
    if (y == 1) CHECK(analytic < 0.0);
    else CHECK(analytic > 0.0);
  }
}

TEST_CASE("evaluate_controller") {
  const DatasetSplit train = load_split(testing::fixture_dir(), "train");
  const auto sets = build_controller_test_sets(train, 3);
  CHECK(sets.local.size() == 2 * 13);
  CHECK(sets.global.size() == 2 * 13);

  FunctionScorer perfect([&](std::string_view text) {
    for (const auto& e : sets.local)
      if (e.text == text) return double(e.label);
    for (const auto& e : sets.global)
      if (e.text == text) return double(e.label);
    return 0.5;
  });
  const auto p = evaluate_controller(perfect, sets.local, sets.global);
  CHECK(p.local == 1.0);
  CHECK(p.global == 1.0);
  CHECK(p.all == 1.0);

  FunctionScorer constant([](std::string_view) { return 0.5; });
  const auto c = evaluate_controller(constant, sets.local, sets.global, 0.5);
  CHECK(c.local == 0.5);
  CHECK(c.global == 0.5);
  CHECK(c.all == 0.5);

  // The oracle sees duplicates only.
  const auto o = evaluate_controller(DuplicateOracleScorer(), sets.local, sets.global);
  CHECK(o.local == 1.0);

  std::vector<CoherenceExample> unbalanced(sets.local.begin(), sets.local.end() - 1);
  CHECK_THROWS_AS(evaluate_controller(constant, unbalanced, sets.global), InvalidArgument);
}

TEST_CASE("duplicate oracle scorer") {
  DuplicateOracleScorer o;
  CHECK(o.score("How to x? Step 1: A. Step 2: B.") == 1.0);
  CHECK(o.score("How to x? Step 1: A. Step 2: a. ") == 0.0);
  CHECK(o.score("How to x? Step 1: A.") == 1.0);
  CHECK(make_scorer("oracle")->name() == "oracle");
  CHECK(scorer_exists("logistic"));
  CHECK_THROWS_AS(make_scorer("transformer"), NotFound);
}

TEST_CASE("coherence JSONL round trip") {
  const DatasetSplit train = load_split(testing::fixture_dir(), "train");
  const auto data = build_coherence_dataset(train, 2, 0);
  std::stringstream io;
  write_coherence_jsonl(io, data);
  CHECK(read_coherence_jsonl(io) == data);
  std::istringstream bad(R"({"text": "How to x? Step 1: a.", "label": 1, "corruption": "duplicate"})");
  CHECK_THROWS_AS(read_coherence_jsonl(bad), ParseError);
}

TEST_CASE("logistic scorer separates a disjoint-vocabulary corpus") {
  const auto train = synthetic::disjoint_vocabulary(150, 1);
  const auto held = synthetic::disjoint_vocabulary(40, 2, "test", 1000);
  const auto examples = build_coherence_dataset(train, 2, 1);
  TrainingConfig cfg;
  cfg.learning_rate = 0.5;
  cfg.epochs = 10;
  cfg.batch_size = 16;
  const auto scorer = LogisticScorer().train(examples, cfg, 2);
  for (const auto& e : examples) {
    const double s = scorer->score(e.text);
    CHECK(s >= 0.0);
    CHECK(s <= 1.0);
  }
  const auto sets = build_controller_test_sets(held, 9);
  const auto acc = evaluate_controller(*scorer, sets.local, sets.global);
  CHECK(acc.all >= 0.9);

  testing::TempDir dir;
  auto logistic = std::dynamic_pointer_cast<LogisticScorer>(scorer);
  REQUIRE(logistic);
  logistic->save(dir.path() / "s.bin");
  const auto loaded = LogisticScorer::load(dir.path() / "s.bin");
  for (std::size_t i = 0; i < 20; ++i) CHECK(loaded->score(examples[i].text) == logistic->score(examples[i].text));
}
