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

#include "demoee/toy/vocabulary.hpp"

#include <algorithm>
#include <set>

#include "demoee/errors.hpp"
#include "demoee/util.hpp"

namespace demoee::toy {

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  for (auto& tok : split_whitespace(text)) {
    if (tok.size() > 1 && tok.back() == '.') {
      tok.pop_back();
      out.push_back(std::move(tok));
      out.emplace_back(".");
    } else {
      out.push_back(std::move(tok));
    }
  }
  return out;
}

std::string detokenize(const std::vector<std::string>& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty() && t != ".") out += ' ';
    out += t;
  }
  return out;
}

namespace {
const std::vector<std::string> kReserved = {"<pad>", "<unk>", "<bos>", "<eos>"};
}

Vocabulary::Vocabulary() {
  for (const auto& w : kReserved) add(w);
}

Vocabulary::Vocabulary(const std::vector<std::string>& words) {
  for (std::size_t i = 0; i < kReserved.size(); ++i)
    if (i >= words.size() || words[i] != kReserved[i])
      throw ParseError("vocabulary must start with <pad> <unk> <bos> <eos>");
  for (const auto& w : words) {
    if (index_.count(w)) throw ParseError("duplicate vocabulary word '" + w + "'");
    add(w);
  }
}

void Vocabulary::add(const std::string& word) {
  if (index_.count(word)) return;
  index_.emplace(word, static_cast<int>(words_.size()));
  words_.push_back(word);
}

int Vocabulary::id(const std::string& word) const {
  auto it = index_.find(word);
  return it == index_.end() ? kUnk : it->second;
}

Vocabulary Vocabulary::from_corpus(const Corpus& corpus) {
  std::set<std::string> words;
  auto add_text = [&](std::string_view text) {
    for (auto& t : tokenize(text)) words.insert(std::move(t));
  };
  const auto& sp = corpus.schema.special_tokens();
  for (const auto& w :
       {std::string("Event"), std::string("type"), std::string("trigger"), std::string("is"),
        std::string("."), sp.mask_token, sp.sep_token, sp.pad_word, sp.arg_joiner})
    words.insert(w);
  const LabelMap labels(corpus.schema);
  for (const auto* s : {&labels.original(), &labels.blinded()})
    for (const auto& t : s->event_types()) {
      add_text(t.name);
      for (const auto& r : t.roles) add_text(r);
    }
  for (const auto& ex : corpus.examples) {
    for (const auto& t : ex.tokens) words.insert(t);
    add_text(join_tokens(ex.tokens));
  }
  Vocabulary v;
  for (const auto& w : words) v.add(w);
  return v;
}

Vocabulary Vocabulary::from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw ParseError("vocabulary must be a JSON array");
  return Vocabulary(j.get<std::vector<std::string>>());
}

}  // namespace demoee::toy
