// Copyright 2026 The demoee Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DEMOEE_EMBEDDER_HPP_
#define DEMOEE_EMBEDDER_HPP_

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

namespace demoee {

// Sentence embedder used for similarity-based demonstration retrieval.
// Implementations must be deterministic and return vectors of a fixed length.
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::vector<float> embed(const std::vector<std::string>& tokens) const = 0;
  virtual std::size_t dimension() const = 0;
};

// Signed feature hashing of lower-cased tokens into `dimension` buckets.
class HashedBagEmbedder : public Embedder {
 public:
  explicit HashedBagEmbedder(std::size_t dimension = 256);
  std::vector<float> embed(const std::vector<std::string>& tokens) const override;
  std::size_t dimension() const override { return dimension_; }

 private:
  std::size_t dimension_;
};

// Wraps another embedder and multiplies its output by a constant.
class ScaledEmbedder : public Embedder {
 public:
  ScaledEmbedder(const Embedder& inner, float scale) : inner_(inner), scale_(scale) {}
  std::vector<float> embed(const std::vector<std::string>& tokens) const override;
  std::size_t dimension() const override { return inner_.dimension(); }

 private:
  const Embedder& inner_;
  float scale_;
};

// Client for an HTTP sentence-embedding service. POSTs
//   {"inputs": ["tok tok tok", ...]}
// to `endpoint` (e.g. http://127.0.0.1:8080/embed) and expects
//   {"embeddings": [[...], ...]}.
// Results are cached per sentence; embed() is safe to call concurrently.
class HttpEmbedder : public Embedder {
 public:
  HttpEmbedder(std::string endpoint, std::size_t dimension, std::size_t batch_size = 32);
  ~HttpEmbedder() override;

  std::vector<float> embed(const std::vector<std::string>& tokens) const override;
  std::size_t dimension() const override { return dimension_; }

  // Embeds many sentences in batches of batch_size.
  std::vector<std::vector<float>> embed_batch(
      const std::vector<std::vector<std::string>>& sentences) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::size_t dimension_;
  std::size_t batch_size_;
};

// Cosine similarity; -1 when either vector has zero norm.
double cosine_similarity(const std::vector<float>& a, const std::vector<float>& b);

}  // namespace demoee

#endif  // DEMOEE_EMBEDDER_HPP_
