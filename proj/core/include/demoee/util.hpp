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

#ifndef DEMOEE_UTIL_HPP_
#define DEMOEE_UTIL_HPP_

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace demoee {

// Space-joins tokens [begin, end).
std::string join_tokens(std::span<const std::string> tokens, std::size_t begin, std::size_t end);
std::string join_tokens(std::span<const std::string> tokens);

// Splits on runs of ASCII whitespace; no empty pieces.
std::vector<std::string> split_whitespace(std::string_view text);

// Splits on every occurrence of `delim`; keeps empty pieces.
std::vector<std::string> split_on(std::string_view text, std::string_view delim);

std::string_view trim(std::string_view text);

bool contains(std::string_view haystack, std::string_view needle);

// Every start index where `needle` occurs as a contiguous token run.
std::vector<std::size_t> find_token_runs(std::span<const std::string> tokens,
                                         std::span<const std::string> needle);

// Lower-case hex SHA-256.
std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::string& path);

// Incremental SHA-256.
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(std::string_view data);
  std::string hex_digest();

 private:
  void* ctx_;
};

uint64_t fnv1a64(std::string_view data);

// All randomness is drawn from std::mt19937_64, whose output sequence is fixed
// by the standard. Distributions are implemented here rather than with
// <random> distributions, whose algorithms are implementation-defined.
using Rng = std::mt19937_64;

// Derives an independent stream from a master seed and a stream name.
Rng make_rng(uint64_t seed, std::string_view stream);
uint64_t derive_seed(uint64_t seed, std::string_view stream);

// Uniform integer in [0, n); n > 0.
std::size_t uniform_index(Rng& rng, std::size_t n);
// Uniform real in [0, 1).
double uniform_real(Rng& rng);
bool bernoulli(Rng& rng, double p);

template <typename T>
void shuffle(std::vector<T>& items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::size_t j = uniform_index(rng, i);
    std::swap(items[i - 1], items[j]);
  }
}

// k distinct indices out of [0, n), in draw order; k is clamped to n.
std::vector<std::size_t> sample_without_replacement(Rng& rng, std::size_t n, std::size_t k);

// round(fraction * n) with halves rounded up.
std::size_t fraction_count(double fraction, std::size_t n);

}  // namespace demoee

#endif  // DEMOEE_UTIL_HPP_
