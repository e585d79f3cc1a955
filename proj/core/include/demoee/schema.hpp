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

#ifndef DEMOEE_SCHEMA_HPP_
#define DEMOEE_SCHEMA_HPP_

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace demoee {

struct SpecialTokens {
  std::string mask_token = "<Mask>";
  std::string sep_token = "<SEP>";
  std::string pad_word = "None";
  std::string arg_joiner = "&";

  bool operator==(const SpecialTokens&) const = default;
};

struct EventTypeDef {
  std::string name;
  std::vector<std::string> roles;

  bool has_role(const std::string& role) const;
  bool operator==(const EventTypeDef&) const = default;
};

// Ordered inventory of event types and their roles. The order of types and of
// roles within a type is the order used by every prompt and linearization.
class EventSchema {
 public:
  EventSchema() = default;
  // Throws ValidationError when an invariant does not hold.
  EventSchema(std::vector<EventTypeDef> event_types, SpecialTokens special = {});

  const std::vector<EventTypeDef>& event_types() const { return event_types_; }
  const SpecialTokens& special_tokens() const { return special_; }
  std::size_t size() const { return event_types_.size(); }
  bool empty() const { return event_types_.empty(); }

  std::optional<std::size_t> index_of(const std::string& event_type) const;
  bool contains(const std::string& event_type) const { return index_of(event_type).has_value(); }
  // Throws LookupError for unknown types.
  const EventTypeDef& type(const std::string& event_type) const;
  const EventTypeDef& type(std::size_t index) const { return event_types_.at(index); }

  // Sub-schema keeping the named types in this schema's order.
  EventSchema restricted_to(const std::vector<std::string>& names) const;

  // Number of distinct role names across all types.
  std::size_t distinct_role_count() const;

  bool operator==(const EventSchema&) const = default;

 private:
  std::vector<EventTypeDef> event_types_;
  SpecialTokens special_;
  std::map<std::string, std::size_t> index_;
};

// Checks a single type or role name against the parsing constraints.
bool is_valid_label(const std::string& name);

EventSchema load_schema(const std::string& path);
EventSchema parse_schema(const std::string& json_text);
std::string schema_to_json(const EventSchema& schema, int indent = 2);
void save_schema(const EventSchema& schema, const std::string& path);

struct Prompt {
  std::string event_type;
  std::string text;
  bool label_blind = false;
};

// "Event type is {E}. Event trigger is <Mask>. {O_1} is <Mask>. ..."
Prompt build_prompt(const EventSchema& schema, const std::string& event_type);
// Same skeleton with "T{i}" for the type and "R{i}{j}" for its roles.
Prompt build_label_blind_prompt(const EventSchema& schema, const std::string& event_type);

std::string blind_type_name(std::size_t type_index);
std::string blind_role_name(std::size_t type_index, std::size_t role_index);

// Bidirectional mapping between real and placeholder labels of one schema.
class LabelMap {
 public:
  explicit LabelMap(const EventSchema& schema);

  const EventSchema& original() const { return original_; }
  const EventSchema& blinded() const { return blinded_; }

  const std::string& blind_type(const std::string& type) const;
  const std::string& real_type(const std::string& blind_type) const;
  const std::string& blind_role(const std::string& type, const std::string& role) const;
  const std::string& real_role(const std::string& blind_type, const std::string& blind_role) const;

 private:
  EventSchema original_;
  EventSchema blinded_;
  std::map<std::string, std::string> type_to_blind_, blind_to_type_;
  std::map<std::pair<std::string, std::string>, std::string> role_to_blind_, blind_to_role_;
};

}  // namespace demoee

#endif  // DEMOEE_SCHEMA_HPP_
