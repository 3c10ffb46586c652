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
#include <numeric>
#include <random>
#include <sstream>

#include "doctest.h"
#include "procwriter/dataset.hpp"
#include "procwriter/error.hpp"
#include "procwriter/text.hpp"
#include "procwriter/types.hpp"
#include "test_util.hpp"

using namespace procwriter;

namespace {

DatasetSplit numbered_split(std::size_t n) {
  DatasetSplit s{"train", {}};
  for (std::size_t i = 0; i < n; ++i)
    s.examples.emplace_back(Process("task " + std::to_string(i)),
                            std::vector<SubEventSequence>{SubEventSequence::from_texts({"step of " + std::to_string(i)})});
  return s;
}

std::string error_of(const std::string& jsonl) {
  std::istringstream in(jsonl);
  try {
    parse_dataset(in, "train");
  } catch (const ParseError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("domain types reject blank text and the stop literal") {
  CHECK_THROWS_AS(Process("   "), InvalidArgument);
  CHECK_THROWS_AS(SubEvent(""), InvalidArgument);
  CHECK_THROWS_AS(SubEvent(" \t"), InvalidArgument);
  CHECK_THROWS_AS(SubEvent("none"), InvalidArgument);
  CHECK_THROWS_AS(SubEvent("  NoNe "), InvalidArgument);
  CHECK_NOTHROW(SubEvent("none of the eggs should crack"));
  CHECK_THROWS_AS(ProcessExample(Process("x"), {}), InvalidArgument);
  CHECK_THROWS_AS(ProcessExample(Process("x"), {SubEventSequence{}}), InvalidArgument);
}

TEST_CASE("stop literal matching ignores case and surrounding whitespace") {
  CHECK(is_stop_literal("none"));
  CHECK(is_stop_literal(" None\n"));
  CHECK(is_stop_literal("NONE"));
  CHECK_FALSE(is_stop_literal("none."));
  CHECK_FALSE(is_stop_literal("no ne"));
}

TEST_CASE("cook eggs record parses to one reference of length 3") {
  std::istringstream in(
      R"({"process": "cook eggs", "references": [["Place eggs in a pot of water.", "Bring the water to a boil.", "Turn off the heat and place the eggs in cold water."]]})"
      "\n");
  const DatasetSplit split = parse_dataset(in, "train");
  REQUIRE(split.size() == 1);
  const auto& ex = split.examples[0];
  CHECK(ex.process().title() == "cook eggs");
  REQUIRE(ex.references().size() == 1);
  CHECK(ex.references()[0].size() == 3);
  CHECK(ex.references()[0][2].text() == "Turn off the heat and place the eggs in cold water.");
}

TEST_CASE("malformed records name the line and the field") {
  const std::string good = R"({"process": "a", "references": [["b"]]})";
  SUBCASE("empty reference list") {
    const auto msg = error_of(good + "\n" + R"({"process": "x", "references": []})" + "\n");
    CHECK(msg.find("line 2") != std::string::npos);
    CHECK(msg.find("'references'") != std::string::npos);
  }
  SUBCASE("empty inner reference") {
    const auto msg = error_of(R"({"process": "x", "references": [["a"], []]})");
    CHECK(msg.find("line 1") != std::string::npos);
    CHECK(msg.find("references[1]") != std::string::npos);
  }
  SUBCASE("stop literal as a step") {
    const auto msg = error_of(good + "\n\n" + R"({"process": "x", "references": [["a", "None"]]})");
    CHECK(msg.find("line 3") != std::string::npos);
    CHECK(msg.find("references[0][1]") != std::string::npos);
  }
  SUBCASE("missing title") {
    const auto msg = error_of(R"({"references": [["a"]]})");
    CHECK(msg.find("'process'") != std::string::npos);
  }
  SUBCASE("broken json") {
    const auto msg = error_of("{not json");
    CHECK(msg.find("line 1") != std::string::npos);
  }
}

TEST_CASE("a file with no records is an empty split") {
  testing::TempDir dir;
  testing::write_file(dir.path() / "empty.jsonl", "");
  CHECK(load_dataset(dir.path() / "empty.jsonl").empty());
  testing::write_file(dir.path() / "blank.jsonl", "\n\n  \n");
  CHECK(load_dataset(dir.path() / "blank.jsonl").empty());
}

TEST_CASE("missing files and unknown splits") {
  CHECK_THROWS_AS(load_dataset("/nonexistent/procwriter.jsonl"), IoError);
  CHECK_THROWS_AS(load_split(testing::fixture_dir(), "dev"), InvalidArgument);
}

TEST_CASE("fixture splits load and satisfy the step invariants") {
  for (const char* name : {"train", "valid", "test"}) {
    const DatasetSplit s = load_split(testing::fixture_dir(), name);
    CHECK(s.name == name);
    CHECK_FALSE(s.empty());
    for (const auto& ex : s.examples)
      for (const auto& ref : ex.references()) {
        CHECK_FALSE(ref.empty());
        for (const auto& e : ref) CHECK_FALSE(is_stop_literal(e.text()));
      }
  }
}

TEST_CASE("write then parse is the identity") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    DatasetSplit s{"valid", {}};
    const std::size_t n = rng() % 6;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<SubEventSequence> refs;
      const std::size_t r = 1 + rng() % 3;
      for (std::size_t j = 0; j < r; ++j) {
        std::vector<std::string> steps;
        const std::size_t m = 1 + rng() % 5;
        for (std::size_t k = 0; k < m; ++k)
          steps.push_back("Step \"" + std::to_string(rng() % 100) + "\" \\ with unicode \xc3\xa9.");
        refs.push_back(SubEventSequence::from_texts(steps));
      }
      s.examples.emplace_back(Process("title " + std::to_string(rng() % 1000)), refs);
    }
    std::ostringstream out;
    write_dataset(out, s);
    std::istringstream in(out.str());
    CHECK(parse_dataset(in, "valid") == s);
  }
}

TEST_CASE("subsample_fewshot edge cases") {
  const DatasetSplit s = numbered_split(20);
  CHECK(subsample_fewshot(s, 20, 7) == s);
  CHECK(subsample_fewshot(s, 0, 7).empty());
  CHECK_THROWS_AS(subsample_fewshot(s, 21, 7), InvalidArgument);
}

TEST_CASE("subsample_fewshot is a deterministic order-preserving subset") {
  const DatasetSplit s = numbered_split(200);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const DatasetSplit a = subsample_fewshot(s, 37, seed);
    CHECK(a == subsample_fewshot(s, 37, seed));
    REQUIRE(a.size() == 37);
    std::vector<std::size_t> positions;
    for (const auto& ex : a.examples) {
      auto it = std::find(s.examples.begin(), s.examples.end(), ex);
      REQUIRE(it != s.examples.end());
      positions.push_back(static_cast<std::size_t>(it - s.examples.begin()));
    }
    CHECK(std::is_sorted(positions.begin(), positions.end()));
    CHECK(std::adjacent_find(positions.begin(), positions.end()) == positions.end());
  }
}

TEST_CASE("subsample_fewshot is roughly uniform") {
  // Each of 10 items should be picked in about 3/10 of the draws.
  const DatasetSplit s = numbered_split(10);
  std::vector<int> hits(10, 0);
  const int draws = 4000;
  for (int seed = 0; seed < draws; ++seed)
    for (const auto& ex : subsample_fewshot(s, 3, static_cast<std::uint64_t>(seed)).examples) {
      const auto& t = ex.process().title();
      hits[static_cast<std::size_t>(std::stoi(t.substr(t.rfind(' ') + 1)))]++;
    }
  for (int h : hits) CHECK(std::abs(h / double(draws) - 0.3) < 0.05);
}

TEST_CASE("5000-shot subsample of a 73,847-row split") {
  const DatasetSplit s = numbered_split(73847);
  const DatasetSplit a = subsample_fewshot(s, 5000, 42);
  CHECK(a.size() == 5000);
  CHECK(a.name == "train");
}
