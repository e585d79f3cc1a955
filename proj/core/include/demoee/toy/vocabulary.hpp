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

#ifndef DEMOEE_TOY_VOCABULARY_HPP_
#define DEMOEE_TOY_VOCABULARY_HPP_

#include <nlohmann/json.hpp>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "demoee/corpus.hpp"

namespace demoee::toy {

// Whitespace split; a trailing "." is split off any longer token.
std::vector<std::string> tokenize(std::string_view text);
// Inverse of tokenize for record text: "." attaches to the previous token.
std::string detokenize(const std::vector<std::string>& tokens);

class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kBos = 2;
  static constexpr int kEos = 3;

  Vocabulary();
  explicit Vocabulary(const std::vector<std::string>& words);

  // Corpus tokens, schema labels, placeholder labels, template words and the
  // special tokens.
  static Vocabulary from_corpus(const Corpus& corpus);

  int id(const std::string& word) const;
  bool contains(const std::string& word) const { return index_.count(word) != 0; }
  const std::string& word(int id) const { return words_.at(static_cast<std::size_t>(id)); }
  int size() const { return static_cast<int>(words_.size()); }
  const std::vector<std::string>& words() const { return words_; }

  nlohmann::json to_json() const { return words_; }
  static Vocabulary from_json(const nlohmann::json& j);

 private:
  void add(const std::string& word);

  std::vector<std::string> words_;
  std::unordered_map<std::string, int> index_;
};

}  // namespace demoee::toy

#endif  // DEMOEE_TOY_VOCABULARY_HPP_
