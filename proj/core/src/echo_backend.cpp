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

#include <algorithm>
#include <fstream>
#include <tuple>

#include "demoee/errors.hpp"
#include "demoee/generation.hpp"

namespace demoee {

EchoBackend::EchoBackend(Corpus gold) : gold_(std::move(gold)), labels_(gold_.schema) {
  for (std::size_t i = 0; i < gold_.examples.size(); ++i)
    by_sentence_.emplace(join_tokens(gold_.examples[i].tokens), i);
}

double EchoBackend::train_step(std::span<const TrainingExample>, double) { return 0.0; }

std::string EchoBackend::generate(const ComposedInput& input, std::size_t) const {
  ++calls_;
  const std::string& mask = gold_.schema.special_tokens().mask_token;
  const std::string& pad = gold_.schema.special_tokens().pad_word;

  // Recover the type label and role labels from the prompt.
  std::string type_label;
  std::vector<std::string> role_labels;
  const auto clauses = split_on(input.part(input.prompt), ". ");
  for (std::size_t c = 0; c < clauses.size(); ++c) {
    std::string cl(trim(clauses[c]));
    if (c + 1 == clauses.size() && !cl.empty() && cl.back() == '.') cl.pop_back();
    const auto is_pos = cl.find(" is ");
    if (is_pos == std::string::npos) continue;
    const std::string head = cl.substr(0, is_pos);
    const std::string value = cl.substr(is_pos + 4);
    if (head == "Event type")
      type_label = value;
    else if (head != "Event trigger" && value == mask)
      role_labels.push_back(head);
  }

  ParsedRecord pad_record{pad, {}};
  std::vector<ParsedRecord> answer;
  std::string real_type;
  if (gold_.schema.contains(type_label)) {
    real_type = type_label;
  } else {
    try {
      real_type = labels_.real_type(type_label);
    } catch (const LookupError&) {
    }
  }

  auto it = by_sentence_.find(std::string(input.part(input.sentence)));
  if (!real_type.empty() && it != by_sentence_.end()) {
    const auto& def = gold_.schema.type(real_type);
    auto records = gold_.examples[it->second].records_of(real_type);
    std::stable_sort(records.begin(), records.end(),
                     [](const EventRecord& a, const EventRecord& b) {
                       return std::tie(a.trigger.start, a.trigger.end) <
                              std::tie(b.trigger.start, b.trigger.end);
                     });
    for (const auto& r : records) {
      ParsedRecord p{r.trigger.text, {}};
      for (std::size_t j = 0; j < def.roles.size() && j < role_labels.size(); ++j) {
        RoleValues rv{role_labels[j], {}};
        std::vector<const Span*> spans;
        for (const auto& a : r.arguments)
          if (a.role == def.roles[j]) spans.push_back(&a.span);
        std::stable_sort(spans.begin(), spans.end(), [](const Span* a, const Span* b) {
          return std::tie(a->start, a->end) < std::tie(b->start, b->end);
        });
        for (const auto* s : spans) rv.values.push_back(s->text);
        if (!rv.values.empty()) p.role_values.push_back(std::move(rv));
      }
      answer.push_back(std::move(p));
    }
  }
  if (answer.empty()) answer.push_back(pad_record);
  return render_records(answer, role_labels, gold_.schema.special_tokens());
}

std::string EchoBackend::parameters_fingerprint() const {
  Sha256 h;
  h.update("echo\n");
  h.update(schema_to_json(gold_.schema, -1));
  for (const auto& ex : gold_.examples) h.update(example_to_json(ex).dump());
  return h.hex_digest();
}

void EchoBackend::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  write_jsonl(gold_, out);
}

void EchoBackend::load(const std::string& path) {
  gold_ = load_jsonl(path, gold_.schema);
  labels_ = LabelMap(gold_.schema);
  by_sentence_.clear();
  for (std::size_t i = 0; i < gold_.examples.size(); ++i)
    by_sentence_.emplace(join_tokens(gold_.examples[i].tokens), i);
}

}  // namespace demoee
