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
#include <string>
#include <string_view>
#include <vector>

namespace procwriter {

inline constexpr std::string_view kStopLiteral = "none";

std::string_view trim(std::string_view s);
std::string to_lower(std::string_view s);
bool iequals(std::string_view a, std::string_view b);

// Case-insensitive match against `stop` after stripping surrounding
// whitespace.
bool is_stop_literal(std::string_view text,
                     std::string_view stop = kStopLiteral);

// Lowercases, splits ASCII punctuation into separate tokens and splits on
// whitespace. Used by the metrics and by the feature extractors.
std::vector<std::string> tokenize(std::string_view text);

// Tokens that contain at least one alphanumeric character.
std::vector<std::string> content_words(std::string_view text);

// Small English function-word list ("a", "the", "your", ...).
bool is_stopword(std::string_view word);

// 64-bit FNV-1a. Stable across platforms, unlike std::hash.
std::uint64_t fnv1a(std::string_view s, std::uint64_t basis = 14695981039346656037ULL);

std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b);

std::size_t levenshtein(std::string_view a, std::string_view b);

}  // namespace procwriter
