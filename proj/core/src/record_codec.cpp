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

#include "demoee/record_codec.hpp"

#include <algorithm>
#include <tuple>

#include "demoee/errors.hpp"
#include "demoee/util.hpp"

namespace demoee {

namespace {

constexpr const char* kTriggerHead = "Event trigger";

std::string clause(const std::string& head, const std::string& value) {
  return head + " is " + value + ".";
}

}  // namespace

std::vector<std::string> ParsedRecord::values_of(const std::string& role) const {
  for (const auto& rv : role_values)
    if (rv.role == role) return rv.values;
  return {};
}

DecodeDiagnostics& DecodeDiagnostics::operator+=(const DecodeDiagnostics& other) {
  skipped_clauses += other.skipped_clauses;
  unmatched_triggers += other.unmatched_triggers;
  unmatched_arguments += other.unmatched_arguments;
  return *this;
}

nlohmann::json DecodeDiagnostics::to_json() const {
  return {{"skipped_clauses", skipped_clauses},
          {"unmatched_triggers", unmatched_triggers},
          {"unmatched_arguments", unmatched_arguments}};
}

RecordSequence linearize(const std::string& event_type, const std::vector<EventRecord>& records,
                         const EventSchema& schema) {
  const auto& def = schema.type(event_type);
  const auto& special = schema.special_tokens();
  for (const auto& r : records)
    if (r.event_type != event_type)
      throw ContractError("linearize: record of type '" + r.event_type + "' in a '" + event_type +
                          "' sequence");

  if (records.empty()) return {event_type, empty_record_text(event_type, schema)};

  std::vector<const EventRecord*> ordered;
  for (const auto& r : records) ordered.push_back(&r);
  std::stable_sort(ordered.begin(), ordered.end(), [](const EventRecord* a, const EventRecord* b) {
    return std::tie(a->trigger.start, a->trigger.end) < std::tie(b->trigger.start, b->trigger.end);
  });

  const std::string joiner = " " + special.arg_joiner + " ";
  std::string text;
  for (const auto* r : ordered) {
    if (!text.empty()) text += ' ';
    text += clause(kTriggerHead, r->trigger.text);
    for (const auto& role : def.roles) {
      std::vector<const Span*> spans;
      for (const auto& a : r->arguments)
        if (a.role == role) spans.push_back(&a.span);
      std::stable_sort(spans.begin(), spans.end(), [](const Span* a, const Span* b) {
        return std::tie(a->start, a->end) < std::tie(b->start, b->end);
      });
      std::string value;
      for (const auto* s : spans) {
        if (!value.empty()) value += joiner;
        value += s->text;
      }
      text += ' ';
      text += clause(role, value.empty() ? special.pad_word : value);
    }
  }
  return {event_type, text};
}

std::string empty_record_text(const std::string& event_type, const EventSchema& schema) {
  const auto& def = schema.type(event_type);
  const auto& pad = schema.special_tokens().pad_word;
  std::string text = clause(kTriggerHead, pad);
  for (const auto& role : def.roles) text += " " + clause(role, pad);
  return text;
}

std::vector<ParsedRecord> parse_records(const std::string& text, const std::string& event_type,
                                        const EventSchema& schema, DecodeDiagnostics* diagnostics) {
  DecodeDiagnostics local;
  const EventTypeDef* def = nullptr;
  if (auto i = schema.index_of(event_type)) def = &schema.type(*i);
  const auto& special = schema.special_tokens();
  const std::string joiner = " " + special.arg_joiner + " ";

  std::vector<ParsedRecord> records;
  const auto segments = split_on(trim(text), ". ");
  for (std::size_t s = 0; s < segments.size(); ++s) {
    std::string_view seg = trim(segments[s]);
    if (s + 1 == segments.size() && !seg.empty() && seg.back() == '.') seg.remove_suffix(1);
    seg = trim(seg);
    if (seg.empty()) continue;

    const std::size_t is_pos = seg.find(" is ");
    if (is_pos == std::string_view::npos) {
      ++local.skipped_clauses;
      continue;
    }
    const std::string head(trim(seg.substr(0, is_pos)));
    const std::string value(trim(seg.substr(is_pos + 4)));

    if (head == kTriggerHead) {
      records.push_back({value, {}});
      continue;
    }
    if (records.empty() || def == nullptr || !def->has_role(head)) {
      ++local.skipped_clauses;
      continue;
    }
    auto& current = records.back();
    RoleValues* slot = nullptr;
    for (auto& rv : current.role_values)
      if (rv.role == head) slot = &rv;
    std::vector<std::string> values;
    for (const auto& piece : split_on(value, joiner)) {
      std::string v(trim(piece));
      if (!v.empty() && v != special.pad_word) values.push_back(std::move(v));
    }
    if (slot == nullptr) {
      current.role_values.push_back({head, {}});
      slot = &current.role_values.back();
    }
    slot->values.insert(slot->values.end(), values.begin(), values.end());
  }

  // Schema order for roles, empty role slots removed.
  std::vector<ParsedRecord> out;
  for (auto& r : records) {
    std::vector<RoleValues> ordered;
    if (def != nullptr)
      for (const auto& role : def->roles)
        for (auto& rv : r.role_values)
          if (rv.role == role && !rv.values.empty()) ordered.push_back(std::move(rv));
    r.role_values = std::move(ordered);
    if (r.trigger_text == special.pad_word && r.role_values.empty()) continue;
    out.push_back(std::move(r));
  }
  if (diagnostics) *diagnostics += local;
  return out;
}

std::vector<EventRecord> resolve_offsets(const std::vector<ParsedRecord>& parsed,
                                         const std::vector<std::string>& tokens,
                                         const std::string& event_type,
                                         DecodeDiagnostics* diagnostics) {
  DecodeDiagnostics local;
  std::vector<EventRecord> out;
  for (const auto& p : parsed) {
    const auto trig_needle = split_whitespace(p.trigger_text);
    const auto trig_hits = find_token_runs(tokens, trig_needle);
    if (trig_hits.empty()) {
      ++local.unmatched_triggers;
      continue;
    }
    const std::size_t anchor = trig_hits.front();
    EventRecord first{event_type, make_span(tokens, anchor, anchor + trig_needle.size()), {}};
    for (const auto& rv : p.role_values) {
      for (const auto& value : rv.values) {
        const auto needle = split_whitespace(value);
        const auto hits = find_token_runs(tokens, needle);
        if (hits.empty()) {
          ++local.unmatched_arguments;
          continue;
        }
        std::size_t best = hits.front();
        std::size_t best_dist = best > anchor ? best - anchor : anchor - best;
        for (auto h : hits) {
          std::size_t d = h > anchor ? h - anchor : anchor - h;
          if (d < best_dist) {
            best = h;
            best_dist = d;
          }
        }
        first.arguments.push_back({rv.role, make_span(tokens, best, best + needle.size())});
      }
    }
    out.push_back(std::move(first));
    for (std::size_t i = 1; i < trig_hits.size(); ++i)
      out.push_back(
          {event_type, make_span(tokens, trig_hits[i], trig_hits[i] + trig_needle.size()), {}});
  }
  std::stable_sort(out.begin(), out.end(), [](const EventRecord& a, const EventRecord& b) {
    return std::tie(a.trigger.start, a.trigger.end) < std::tie(b.trigger.start, b.trigger.end);
  });
  if (diagnostics) *diagnostics += local;
  return out;
}

std::string render_records(const std::vector<ParsedRecord>& records,
                           const std::vector<std::string>& role_order,
                           const SpecialTokens& special) {
  const std::string joiner = " " + special.arg_joiner + " ";
  std::string text;
  for (const auto& r : records) {
    if (!text.empty()) text += ' ';
    text += clause(kTriggerHead, r.trigger_text);
    for (const auto& role : role_order) {
      std::string value;
      for (const auto& v : r.values_of(role)) {
        if (!value.empty()) value += joiner;
        value += v;
      }
      text += " " + clause(role, value.empty() ? special.pad_word : value);
    }
  }
  return text;
}

}  // namespace demoee
