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

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace procwriter {

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::size_t dimension() const = 0;
  // Deterministic; always `dimension()` entries.
  virtual std::vector<double> embed(std::string_view text) const = 0;
};

// Each token maps to a pseudo-random unit vector seeded from its hash; a
// text is the sum of its token vectors (zero for empty text). Stands in for
// pretrained word or sentence embeddings.
class HashEmbedder final : public Embedder {
 public:
  explicit HashEmbedder(std::size_t dimension = 64, std::uint64_t seed = 0);

  std::size_t dimension() const override { return dimension_; }
  std::vector<double> embed(std::string_view text) const override;

 private:
  std::vector<double> token_vector(std::string_view token) const;

  std::size_t dimension_;
  std::uint64_t seed_;
};

// Cosine similarity; 0 when either vector has zero norm. Throws
// InvalidArgument on a dimension mismatch.
double cosine(std::span<const double> a, std::span<const double> b);

}  // namespace procwriter
