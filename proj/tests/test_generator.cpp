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

#include <cmath>
#include <random>

#include "doctest.h"
#include "procwriter/bow_generator.hpp"
#include "procwriter/dataset.hpp"
#include "procwriter/error.hpp"
#include "procwriter/generator.hpp"
#include "test_util.hpp"

using namespace procwriter;

namespace {

std::vector<TrainingPair> fixture_pairs(const char* split) {
  std::vector<TrainingPair> pairs;
  for (const auto& ex : load_split(testing::fixture_dir(), split).examples)
    for (auto& p : expand_training_pairs(ex)) pairs.push_back(std::move(p));
  return pairs;
}

void check_contract(const Generator& g, std::string_view prompt) {
  const auto full = g.topk(prompt, 64);
  validate_candidates(full, "contract");
  for (const auto& c : full) {
    CHECK(std::isfinite(c.logprob));
    CHECK(c.logprob <= 0.0);
  }
  for (std::size_t k = 0; k <= full.size() + 2; ++k) {
    const auto part = g.topk(prompt, k);
    REQUIRE(part.size() == std::min(k, full.size()));
    for (std::size_t i = 0; i < part.size(); ++i) CHECK(part[i] == full[i]);
  }
}

}  // namespace

TEST_CASE("mock topk is a direct lookup") {
  MockGenerator g({{"How to cook eggs? Step 1: [M]", {{"Place eggs in a pot of water.", -0.2}}}});
  const auto one = g.topk("How to cook eggs? Step 1: [M]", 1);
  REQUIRE(one.size() == 1);
  CHECK(one[0] == Candidate{"Place eggs in a pot of water.", -0.2});
  CHECK(g.topk("How to cook eggs? Step 1: [M]", 10).size() == 1);
  CHECK(g.topk("How to cook eggs? Step 1: [M]", 0).empty());
}

TEST_CASE("mock rejects scripts that break the candidate invariants") {
  CHECK_THROWS_AS(MockGenerator({{"p", {{"a", -1.0}, {"b", -0.5}}}}), InvalidArgument);
  CHECK_THROWS_AS(MockGenerator({{"p", {{"a", -1.0}, {"a", -1.5}}}}), InvalidArgument);
  CHECK_THROWS_AS(MockGenerator({{"p", {{"a", 0.5}}}}), InvalidArgument);
  CHECK_THROWS_AS(MockGenerator({{"p", {{"a", std::nan("")}}}}), InvalidArgument);
}

TEST_CASE("unknown prompt names the nearest scripted prompt") {
  MockGenerator g({{"How to cook eggs? Step 1: [M]", {{"a", -0.1}}}, {"How to buy a house? Step 1: [M]", {{"b", -0.1}}}});
  try {
    g.topk("How to cook egg? Step 1: [M]", 1);
    FAIL("expected NotFound");
  } catch (const NotFound& e) {
    CHECK(std::string(e.what()).find("How to cook eggs? Step 1: [M]") != std::string::npos);
  }
}

TEST_CASE("mock replay of training pairs") {
  const std::vector<TrainingPair> pairs = {{"p", "a"}, {"p", "b"}, {"p", "a"}, {"q", "none"}};
  const auto g = MockGenerator::from_pairs(pairs);
  const auto c = g->topk("p", 5);
  REQUIRE(c.size() == 2);
  CHECK(c[0].text == "a");
  CHECK(c[0].logprob == doctest::Approx(std::log(2.0 / 3.0)));
  CHECK(c[1].text == "b");
  CHECK(g->topk("q", 1)[0].logprob == 0.0);
}

TEST_CASE("mock from a JSON script") {
  testing::TempDir dir;
  testing::write_file(dir.path() / "s.json", R"({"p": [{"text": "a", "logprob": -0.1}, {"text": "b", "logprob": -2}]})");
  const auto g = MockGenerator::from_json_file((dir.path() / "s.json").string());
  CHECK(g->topk("p", 2).size() == 2);
  testing::write_file(dir.path() / "bad.json", R"({"p": [{"text": "a"}]})");
  CHECK_THROWS_AS(MockGenerator::from_json_file((dir.path() / "bad.json").string()), ParseError);
  CHECK_THROWS_AS(MockGenerator::from_json_file((dir.path() / "missing.json").string()), IoError);
}

TEST_CASE("fine_tune validation and mock no-op") {
  auto g = std::make_shared<MockGenerator>(MockGenerator::Script{{"p", {{"a", -0.1}}}});
  const std::vector<TrainingPair> pairs = {{"p", "a"}};
  CHECK_THROWS_AS(fine_tune(g, {}, {}), InvalidArgument);
  CHECK(fine_tune(g, pairs, {}).get() == g.get());
  CHECK_THROWS_AS(fine_tune(g, pairs, {{"learning_rate", 0.0}}), InvalidArgument);
  CHECK_THROWS_AS(fine_tune(g, pairs, {{"epochs", 1.5}}), InvalidArgument);
  CHECK_THROWS_AS(fine_tune(g, pairs, {{"momentum", 0.9}}), InvalidArgument);
  CHECK_THROWS_AS(fine_tune(g, std::vector<TrainingPair>{{"", "a"}}, {}), InvalidArgument);
}

TEST_CASE("registry") {
  auto& reg = GeneratorRegistry::instance();
  CHECK(reg.contains("mock"));
  CHECK(reg.contains("bow-softmax"));
  CHECK_FALSE(reg.contains("hf-seq2seq"));
  CHECK_THROWS_AS(reg.create("hf-seq2seq", {}), NotFound);
  BackendOptions opts;
  opts.replay_pairs = {{"p", "a"}};
  CHECK(reg.create("mock", opts)->topk("p", 1)[0].text == "a");
  CHECK(reg.create("bow-softmax", {})->name() == "bow-softmax");
}

TEST_CASE("bow-softmax learns the fixture pairs") {
  const auto pairs = fixture_pairs("train");
  BowSoftmaxGenerator::Options opt;
  opt.hash_bits = 16;
  const auto base = std::make_shared<BowSoftmaxGenerator>(opt);
  TrainingConfig cfg;
  cfg.learning_rate = 0.5;
  cfg.epochs = 30;
  cfg.batch_size = 4;
  const auto trained = std::dynamic_pointer_cast<BowSoftmaxGenerator>(base->train(pairs, cfg));
  REQUIRE(trained);
  CHECK(base->vocabulary_size() == 1);  // training never mutates the receiver

  const auto untrained = std::dynamic_pointer_cast<BowSoftmaxGenerator>(base->train(pairs, [] {
    TrainingConfig c;
    c.learning_rate = 1e-12;
    c.epochs = 1;
    return c;
  }()));
  CHECK(trained->loss(pairs) < 0.5 * untrained->loss(pairs));

  // Training prompts whose target is unique are recovered as top-1.
  const auto top = trained->topk("How to wash a car? Step 1: [M]", 3);
  REQUIRE_FALSE(top.empty());
  CHECK(top[0].text == "Rinse the car with a hose.");
  const auto stop = trained->topk(
      "How to brew a pot of tea? Step 1: Boil fresh water in a kettle. Step 2: Warm the teapot with hot water. Step 3: "
      "Add loose leaves to the teapot. Step 4: Pour the water over the leaves and steep. Step 5: [M]",
      1);
  CHECK(stop[0].text == "none");

  check_contract(*trained, "How to cook eggs? Step 1: [M]");
  check_contract(*trained, "How to fly a kite? Step 1: [M]");
}

TEST_CASE("bow-softmax is deterministic and round-trips through disk") {
  const auto pairs = fixture_pairs("train");
  TrainingConfig cfg;
  cfg.learning_rate = 0.3;
  cfg.epochs = 5;
  cfg.seed = 4;
  const auto a = std::dynamic_pointer_cast<BowSoftmaxGenerator>(BowSoftmaxGenerator().train(pairs, cfg));
  const auto b = std::dynamic_pointer_cast<BowSoftmaxGenerator>(BowSoftmaxGenerator().train(pairs, cfg));
  testing::TempDir dir;
  a->save(dir.path() / "m.bin");
  const auto c = BowSoftmaxGenerator::load(dir.path() / "m.bin");
  for (const auto& p : pairs) {
    CHECK(a->topk(p.input, 5) == b->topk(p.input, 5));
    CHECK(a->topk(p.input, 5) == c->topk(p.input, 5));
  }
  testing::write_file(dir.path() / "junk.bin", "not a model");
  CHECK_THROWS_AS(BowSoftmaxGenerator::load(dir.path() / "junk.bin"), ParseError);
}
