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

#include "procwriter/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <optional>
#include <random>

#include <nlohmann/json.hpp>

#include "procwriter/error.hpp"
#include "procwriter/text.hpp"

namespace procwriter {

using json = nlohmann::json;

namespace {

[[noreturn]] void fail(std::size_t line, std::string_view field, const std::string& what) {
  throw ParseError("line " + std::to_string(line) + ": field '" + std::string(field) +
                   "': " + what);
}

ProcessExample parse_record(const std::string& text, std::size_t line) {
  json row;
  try {
    row = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(line, "<record>", std::string("invalid JSON: ") + e.what());
  }
  if (!row.is_object()) fail(line, "<record>", "expected a JSON object");

  auto title_it = row.find("process");
  if (title_it == row.end() || !title_it->is_string()) fail(line, "process", "missing or not a string");
  std::optional<Process> process;
  try {
    process.emplace(title_it->get<std::string>());
  } catch (const InvalidArgument& e) {
    fail(line, "process", e.what());
  }

  auto refs_it = row.find("references");
  if (refs_it == row.end() || !refs_it->is_array()) fail(line, "references", "missing or not an array");
  if (refs_it->empty()) fail(line, "references", "empty reference list");

  std::vector<SubEventSequence> references;
  for (std::size_t r = 0; r < refs_it->size(); ++r) {
    const auto& ref = (*refs_it)[r];
    std::string field = "references[" + std::to_string(r) + "]";
    if (!ref.is_array()) fail(line, field, "not an array");
    if (ref.empty()) fail(line, field, "empty reference");
    SubEventSequence seq;
    for (std::size_t s = 0; s < ref.size(); ++s) {
      std::string step_field = field + "[" + std::to_string(s) + "]";
      if (!ref[s].is_string()) fail(line, step_field, "not a string");
      try {
        seq.push_back(SubEvent(ref[s].get<std::string>()));
      } catch (const InvalidArgument& e) {
        fail(line, step_field, e.what());
      }
    }
    references.push_back(std::move(seq));
  }
  return ProcessExample(std::move(*process), std::move(references));
}

}  // namespace

DatasetSplit parse_dataset(std::istream& in, std::string split_name) {
  DatasetSplit split{std::move(split_name), {}};
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (trim(text).empty()) continue;
    split.examples.push_back(parse_record(text, line));
  }
  return split;
}

DatasetSplit load_dataset(const std::filesystem::path& path, DatasetFormat format,
                          std::string split_name) {
  if (format != DatasetFormat::kJsonl) throw InvalidArgument("unsupported dataset format");
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset file " + path.string());
  if (split_name.empty()) split_name = path.stem().string();
  try {
    return parse_dataset(in, std::move(split_name));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

DatasetSplit load_split(const std::filesystem::path& dataset_dir, std::string_view split) {
  if (split != "train" && split != "valid" && split != "test")
    throw InvalidArgument("unknown split '" + std::string(split) + "' (expected train, valid or test)");
  return load_dataset(dataset_dir / (std::string(split) + ".jsonl"), DatasetFormat::kJsonl,
                      std::string(split));
}

void write_dataset(std::ostream& out, const DatasetSplit& split) {
  for (const auto& ex : split.examples) {
    json refs = json::array();
    for (const auto& ref : ex.references()) refs.push_back(ref.texts());
    json row = {{"process", ex.process().title()}, {"references", std::move(refs)}};
    out << row.dump() << '\n';
  }
}

void save_dataset(const std::filesystem::path& path, const DatasetSplit& split) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write dataset file " + path.string());
  write_dataset(out, split);
}

DatasetSplit subsample_fewshot(const DatasetSplit& split, std::size_t n, std::uint64_t seed) {
  if (n > split.size())
    throw InvalidArgument("few-shot size " + std::to_string(n) + " exceeds split size " +
                          std::to_string(split.size()));
  DatasetSplit out{split.name, {}};
  out.examples.reserve(n);
  std::mt19937_64 rng(seed);
  // Selection sampling over a forward range keeps survivors in order.
  std::sample(split.examples.begin(), split.examples.end(), std::back_inserter(out.examples), n,
              rng);
  return out;
}

}  // namespace procwriter
