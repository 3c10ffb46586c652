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
#include <iosfwd>
#include <string>
#include <string_view>

#include "procwriter/types.hpp"

namespace procwriter {

// Only one on-disk format exists today; the enum keeps call sites explicit.
enum class DatasetFormat { kJsonl };

// One JSON object per line:
//   {"process": "<title>", "references": [["<step>", ...], ...]}
// Blank lines are skipped. Errors carry the 1-based line number and the
// offending field.
DatasetSplit parse_dataset(std::istream& in, std::string split_name);

DatasetSplit load_dataset(const std::filesystem::path& path,
                          DatasetFormat format = DatasetFormat::kJsonl,
                          std::string split_name = {});

// Loads `<dir>/<split>.jsonl`; split must be train, valid or test.
DatasetSplit load_split(const std::filesystem::path& dataset_dir,
                        std::string_view split);

void write_dataset(std::ostream& out, const DatasetSplit& split);
void save_dataset(const std::filesystem::path& path, const DatasetSplit& split);

// Uniform sample of exactly n examples without replacement. Survivors keep
// their original relative order. Deterministic for a fixed seed.
DatasetSplit subsample_fewshot(const DatasetSplit& split, std::size_t n,
                               std::uint64_t seed);

}  // namespace procwriter
