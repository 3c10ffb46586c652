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

#include "procwriter/embedding.hpp"

#include <cmath>
#include <random>

#include "procwriter/error.hpp"
#include "procwriter/text.hpp"

namespace procwriter {

HashEmbedder::HashEmbedder(std::size_t dimension, std::uint64_t seed)
    : dimension_(dimension), seed_(seed) {
  if (dimension == 0) throw InvalidArgument("embedding dimension must be positive");
}

std::vector<double> HashEmbedder::token_vector(std::string_view token) const {
  std::mt19937_64 rng(hash_combine(seed_, fnv1a(token)));
  std::vector<double> v(dimension_);
  double norm = 0.0;
  // Box-Muller by hand: std::normal_distribution is not specified
  // bit-for-bit across standard libraries.
  for (std::size_t i = 0; i < dimension_; ++i) {
    const double u1 = (static_cast<double>(rng() >> 11) + 1.0) / 9007199254740993.0;
    const double u2 = static_cast<double>(rng() >> 11) / 9007199254740992.0;
    v[i] = std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    norm += v[i] * v[i];
  }
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
  return v;
}

std::vector<double> HashEmbedder::embed(std::string_view text) const {
  std::vector<double> sum(dimension_, 0.0);
  for (const auto& token : tokenize(text)) {
    const auto v = token_vector(token);
    for (std::size_t i = 0; i < dimension_; ++i) sum[i] += v[i];
  }
  return sum;
}

double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw InvalidArgument("cosine: dimension mismatch (" + std::to_string(a.size()) + " vs " +
                          std::to_string(b.size()) + ")");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace procwriter
