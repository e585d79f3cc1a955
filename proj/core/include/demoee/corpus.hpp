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

#ifndef DEMOEE_CORPUS_HPP_
#define DEMOEE_CORPUS_HPP_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "demoee/schema.hpp"

namespace demoee {

// Half-open token range [start, end) of a sentence.
struct Span {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string text;

  auto operator<=>(const Span&) const = default;
};

Span make_span(const std::vector<std::string>& tokens, std::size_t start, std::size_t end);

struct Argument {
  std::string role;
  Span span;

  auto operator<=>(const Argument&) const = default;
};

struct EventRecord {
  std::string event_type;
  Span trigger;
  std::vector<Argument> arguments;

  bool operator==(const EventRecord&) const = default;
};

struct AnnotatedExample {
  std::string id;
  std::vector<std::string> tokens;
  std::vector<EventRecord> records;

  bool bears(const std::string& event_type) const;
  std::vector<EventRecord> records_of(const std::string& event_type) const;
  // Distinct roles filled across the records of `event_type`.
  std::size_t filled_role_count(const std::string& event_type) const;

  bool operator==(const AnnotatedExample&) const = default;
};

struct Corpus {
  EventSchema schema;
  std::vector<AnnotatedExample> examples;

  std::size_t size() const { return examples.size(); }
  bool empty() const { return examples.empty(); }
  std::size_t event_count() const;
  std::size_t argument_count() const;
  // Indices of examples carrying at least one record of `event_type`.
  std::vector<std::size_t> bearing(const std::string& event_type) const;
  const AnnotatedExample* find(const std::string& id) const;
};

// Checks spans, labels and id uniqueness. `where` prefixes error messages.
void validate_example(const AnnotatedExample& example, const EventSchema& schema,
                      const std::string& where);
void validate_corpus(const Corpus& corpus);

nlohmann::json example_to_json(const AnnotatedExample& example);
nlohmann::json record_to_json(const EventRecord& record);
// Span texts are rebuilt from `tokens`.
EventRecord record_from_json(const nlohmann::json& obj, const std::vector<std::string>& tokens);
AnnotatedExample example_from_json(const nlohmann::json& obj);

Corpus load_jsonl(const std::string& path, const EventSchema& schema);
Corpus read_jsonl(std::istream& in, const EventSchema& schema,
                  const std::string& source = "<stream>");
void write_jsonl(const Corpus& corpus, std::ostream& out);
void save_jsonl(const Corpus& corpus, const std::string& path);

// Synthetic corpus generation.
struct SynthOptions {
  // Probability that a sentence carries at least one event.
  double event_rate = 0.75;
  // Upper bound on events per sentence (distinct types).
  std::size_t max_events = 2;
  // Probability that a role gets a filler.
  double role_fill_rate = 0.7;
  // Probability that a person-like role takes two conjoined fillers.
  double multi_argument_rate = 0.1;
};

Corpus generate_synthetic(const EventSchema& schema, std::size_t n, uint64_t seed,
                          const SynthOptions& options = {});

// Low-resource samplers.
struct SampleResult {
  Corpus corpus;
  std::vector<std::string> warnings;
};

SampleResult sample_k_shot(const Corpus& corpus, std::size_t k, uint64_t seed);

enum class RatioPopulation { kFullSet, kEventBearing };

SampleResult sample_ratio(const Corpus& corpus, double ratio, uint64_t seed,
                          RatioPopulation population = RatioPopulation::kFullSet);

struct DomainSplit {
  EventSchema src_schema;
  EventSchema tgt_schema;
  Corpus src_train, src_eval, tgt_train, tgt_eval;
};

// Source domain = top_n most frequent event types (ties broken by schema order).
DomainSplit build_domain_split(const Corpus& corpus, std::size_t top_n, double train_frac,
                               uint64_t seed);

// Event-type frequencies (record counts) in schema order.
std::vector<std::pair<std::string, std::size_t>> event_type_frequencies(const Corpus& corpus);

// Keeps only records of types in `schema`; drops examples left with none when
// `drop_empty` is set.
Corpus filter_to_schema(const Corpus& corpus, const EventSchema& schema, bool drop_empty);

}  // namespace demoee

#endif  // DEMOEE_CORPUS_HPP_
