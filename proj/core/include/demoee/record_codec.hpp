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

#ifndef DEMOEE_RECORD_CODEC_HPP_
#define DEMOEE_RECORD_CODEC_HPP_

#include <cstddef>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "demoee/corpus.hpp"
#include "demoee/schema.hpp"

namespace demoee {

// Natural-language form of every record of one event type in one sentence:
// "Event trigger is T. Role1 is A1. Role2 is A2 & A3. Role3 is None."
struct RecordSequence {
  std::string event_type;
  std::string text;
};

struct RoleValues {
  std::string role;
  std::vector<std::string> values;

  bool operator==(const RoleValues&) const = default;
};

struct ParsedRecord {
  std::string trigger_text;
  std::vector<RoleValues> role_values;

  // Values of `role`, empty when the role is absent.
  std::vector<std::string> values_of(const std::string& role) const;
  bool operator==(const ParsedRecord&) const = default;
};

struct DecodeDiagnostics {
  std::size_t skipped_clauses = 0;
  std::size_t unmatched_triggers = 0;
  std::size_t unmatched_arguments = 0;

  DecodeDiagnostics& operator+=(const DecodeDiagnostics& other);
  nlohmann::json to_json() const;
};

// Records must all be of `event_type`; they are emitted in ascending trigger
// order. An empty list yields the all-pad pseudo-record.
RecordSequence linearize(const std::string& event_type, const std::vector<EventRecord>& records,
                         const EventSchema& schema);

// The all-pad target used for event types a sentence does not mention.
std::string empty_record_text(const std::string& event_type, const EventSchema& schema);

// Total over arbitrary text; unusable clauses are counted in `diagnostics`.
std::vector<ParsedRecord> parse_records(const std::string& text, const std::string& event_type,
                                        const EventSchema& schema,
                                        DecodeDiagnostics* diagnostics = nullptr);

// Anchors parsed strings in the sentence. Each trigger match becomes a
// mention; arguments attach to the mention of the first trigger match and
// sit at their occurrence nearest to it.
std::vector<EventRecord> resolve_offsets(const std::vector<ParsedRecord>& parsed,
                                         const std::vector<std::string>& tokens,
                                         const std::string& event_type,
                                         DecodeDiagnostics* diagnostics = nullptr);

// Renders parsed records back to text with the given role order, replacing
// missing roles by the pad word. Used by the demonstration perturbation.
std::string render_records(const std::vector<ParsedRecord>& records,
                           const std::vector<std::string>& role_order,
                           const SpecialTokens& special);

}  // namespace demoee

#endif  // DEMOEE_RECORD_CODEC_HPP_
