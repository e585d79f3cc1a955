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

#include "demoee/corpus.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include "demoee/errors.hpp"
#include "demoee/util.hpp"

namespace demoee {

using nlohmann::json;

Span make_span(const std::vector<std::string>& tokens, std::size_t start, std::size_t end) {
  return Span{start, end, join_tokens(tokens, start, end)};
}

bool AnnotatedExample::bears(const std::string& event_type) const {
  for (const auto& r : records)
    if (r.event_type == event_type) return true;
  return false;
}

std::vector<EventRecord> AnnotatedExample::records_of(const std::string& event_type) const {
  std::vector<EventRecord> out;
  for (const auto& r : records)
    if (r.event_type == event_type) out.push_back(r);
  return out;
}

std::size_t AnnotatedExample::filled_role_count(const std::string& event_type) const {
  std::set<std::string> roles;
  for (const auto& r : records)
    if (r.event_type == event_type)
      for (const auto& a : r.arguments) roles.insert(a.role);
  return roles.size();
}

std::size_t Corpus::event_count() const {
  std::size_t n = 0;
  for (const auto& ex : examples) n += ex.records.size();
  return n;
}

std::size_t Corpus::argument_count() const {
  std::size_t n = 0;
  for (const auto& ex : examples)
    for (const auto& r : ex.records) n += r.arguments.size();
  return n;
}

std::vector<std::size_t> Corpus::bearing(const std::string& event_type) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < examples.size(); ++i)
    if (examples[i].bears(event_type)) out.push_back(i);
  return out;
}

const AnnotatedExample* Corpus::find(const std::string& id) const {
  for (const auto& ex : examples)
    if (ex.id == id) return &ex;
  return nullptr;
}

namespace {

void check_span(const Span& span, const AnnotatedExample& ex, const std::string& what,
                const std::string& joiner, const std::string& where) {
  if (span.end <= span.start || span.end > ex.tokens.size())
    throw ValidationError(where + ": " + what + " span [" + std::to_string(span.start) + "," +
                          std::to_string(span.end) + ") out of range for " +
                          std::to_string(ex.tokens.size()) + " tokens");
  const std::string text = join_tokens(ex.tokens, span.start, span.end);
  if (span.text != text)
    throw ValidationError(where + ": " + what + " span text '" + span.text +
                          "' does not match tokens '" + text + "'");
  // The record grammar has no escape for the argument joiner.
  if (contains(" " + text + " ", " " + joiner + " "))
    throw ValidationError(where + ": " + what + " '" + text + "' contains the joiner '" + joiner +
                          "'");
}

}  // namespace

void validate_example(const AnnotatedExample& example, const EventSchema& schema,
                      const std::string& where) {
  if (example.id.empty()) throw ValidationError(where + ": empty id");
  const auto& joiner = schema.special_tokens().arg_joiner;
  for (const auto& record : example.records) {
    if (!schema.contains(record.event_type))
      throw ValidationError(where + ": unknown event type '" + record.event_type + "'");
    const auto& def = schema.type(record.event_type);
    check_span(record.trigger, example, "trigger", joiner, where);
    for (const auto& arg : record.arguments) {
      if (!def.has_role(arg.role))
        throw ValidationError(where + ": unknown role '" + arg.role + "' for event type '" +
                              record.event_type + "'");
      check_span(arg.span, example, "argument", joiner, where);
    }
  }
}

void validate_corpus(const Corpus& corpus) {
  std::set<std::string> ids;
  for (std::size_t i = 0; i < corpus.examples.size(); ++i) {
    const auto& ex = corpus.examples[i];
    const std::string where = "example " + std::to_string(i + 1) + " ('" + ex.id + "')";
    validate_example(ex, corpus.schema, where);
    if (!ids.insert(ex.id).second) throw ValidationError(where + ": duplicate id");
  }
}

namespace {

json span_to_json(const Span& s) { return {{"start", s.start}, {"end", s.end}}; }

Span span_from_json(const json& obj, const std::vector<std::string>& tokens) {
  if (!obj.is_object() || !obj.contains("start") || !obj.contains("end") ||
      !obj["start"].is_number_integer() || !obj["end"].is_number_integer())
    throw ParseError("span must be an object with integer 'start' and 'end'");
  const auto start = obj["start"].get<long long>();
  const auto end = obj["end"].get<long long>();
  if (start < 0 || end < 0) throw ValidationError("negative span offset");
  Span s{static_cast<std::size_t>(start), static_cast<std::size_t>(end), ""};
  if (s.start < s.end && s.end <= tokens.size()) s.text = join_tokens(tokens, s.start, s.end);
  return s;
}

}  // namespace

json record_to_json(const EventRecord& record) {
  json args = json::array();
  for (const auto& a : record.arguments)
    args.push_back({{"role", a.role}, {"span", span_to_json(a.span)}});
  return {{"event_type", record.event_type},
          {"trigger", span_to_json(record.trigger)},
          {"arguments", args}};
}

json example_to_json(const AnnotatedExample& example) {
  json records = json::array();
  for (const auto& r : example.records) records.push_back(record_to_json(r));
  return {{"id", example.id}, {"tokens", example.tokens}, {"records", records}};
}

EventRecord record_from_json(const json& obj, const std::vector<std::string>& tokens) {
  if (!obj.is_object() || !obj.contains("event_type") || !obj["event_type"].is_string())
    throw ParseError("record needs a string 'event_type'");
  if (!obj.contains("trigger")) throw ParseError("record needs a 'trigger'");
  EventRecord r;
  r.event_type = obj["event_type"].get<std::string>();
  r.trigger = span_from_json(obj["trigger"], tokens);
  if (obj.contains("arguments")) {
    if (!obj["arguments"].is_array()) throw ParseError("'arguments' must be an array");
    for (const auto& a : obj["arguments"]) {
      if (!a.is_object() || !a.contains("role") || !a["role"].is_string() || !a.contains("span"))
        throw ParseError("argument needs a string 'role' and a 'span'");
      r.arguments.push_back({a["role"].get<std::string>(), span_from_json(a["span"], tokens)});
    }
  }
  return r;
}

AnnotatedExample example_from_json(const json& obj) {
  if (!obj.is_object()) throw ParseError("example must be a JSON object");
  if (!obj.contains("id") || !obj["id"].is_string()) throw ParseError("missing string 'id'");
  if (!obj.contains("tokens") || !obj["tokens"].is_array())
    throw ParseError("missing array 'tokens'");
  AnnotatedExample ex;
  ex.id = obj["id"].get<std::string>();
  for (const auto& t : obj["tokens"]) {
    if (!t.is_string()) throw ParseError("tokens must be strings");
    ex.tokens.push_back(t.get<std::string>());
  }
  if (obj.contains("records")) {
    if (!obj["records"].is_array()) throw ParseError("'records' must be an array");
    for (const auto& r : obj["records"]) ex.records.push_back(record_from_json(r, ex.tokens));
  }
  return ex;
}

Corpus read_jsonl(std::istream& in, const EventSchema& schema, const std::string& source) {
  Corpus corpus{schema, {}};
  std::set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::string where = source + ":" + std::to_string(line_no);
    AnnotatedExample ex;
    try {
      ex = example_from_json(json::parse(line));
    } catch (const json::parse_error& e) {
      throw ParseError(where + ": " + e.what());
    } catch (const ParseError& e) {
      throw ParseError(where + ": " + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError(where + ": " + e.what());
    }
    validate_example(ex, schema, where);
    if (!ids.insert(ex.id).second) throw ValidationError(where + ": duplicate id '" + ex.id + "'");
    corpus.examples.push_back(std::move(ex));
  }
  return corpus;
}

Corpus load_jsonl(const std::string& path, const EventSchema& schema) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open corpus file " + path);
  return read_jsonl(in, schema, path);
}

void write_jsonl(const Corpus& corpus, std::ostream& out) {
  for (const auto& ex : corpus.examples) out << example_to_json(ex).dump() << "\n";
}

void save_jsonl(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  write_jsonl(corpus, out);
}

Corpus filter_to_schema(const Corpus& corpus, const EventSchema& schema, bool drop_empty) {
  Corpus out{schema, {}};
  for (const auto& ex : corpus.examples) {
    AnnotatedExample copy{ex.id, ex.tokens, {}};
    for (const auto& r : ex.records)
      if (schema.contains(r.event_type)) copy.records.push_back(r);
    if (drop_empty && copy.records.empty()) continue;
    out.examples.push_back(std::move(copy));
  }
  return out;
}

}  // namespace demoee
