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

#include "demoee/schema.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "demoee/errors.hpp"
#include "demoee/util.hpp"

namespace demoee {

using nlohmann::json;

bool EventTypeDef::has_role(const std::string& role) const {
  for (const auto& r : roles)
    if (r == role) return true;
  return false;
}

bool is_valid_label(const std::string& name) {
  if (trim(name).empty()) return false;
  if (contains(name, " is ")) return false;
  if (contains(name, ". ")) return false;
  return true;
}

EventSchema::EventSchema(std::vector<EventTypeDef> event_types, SpecialTokens special)
    : event_types_(std::move(event_types)), special_(std::move(special)) {
  if (special_.mask_token.empty() || special_.sep_token.empty() || special_.pad_word.empty() ||
      special_.arg_joiner.empty())
    throw ValidationError("special tokens must be non-empty");
  for (std::size_t i = 0; i < event_types_.size(); ++i) {
    const auto& t = event_types_[i];
    if (!is_valid_label(t.name)) throw ValidationError("invalid event type name '" + t.name + "'");
    if (!index_.emplace(t.name, i).second)
      throw ValidationError("duplicate event type '" + t.name + "'");
    std::set<std::string> seen;
    for (const auto& role : t.roles) {
      if (!is_valid_label(role))
        throw ValidationError("invalid role name '" + role + "' in event type '" + t.name + "'");
      // Would collide with the trigger clause head.
      if (role == "Event trigger")
        throw ValidationError("role name 'Event trigger' is reserved (event type '" + t.name +
                              "')");
      if (!seen.insert(role).second)
        throw ValidationError("duplicate role '" + role + "' in event type '" + t.name + "'");
    }
  }
}

std::optional<std::size_t> EventSchema::index_of(const std::string& event_type) const {
  auto it = index_.find(event_type);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const EventTypeDef& EventSchema::type(const std::string& event_type) const {
  auto it = index_.find(event_type);
  if (it == index_.end()) throw LookupError("unknown event type '" + event_type + "'");
  return event_types_[it->second];
}

EventSchema EventSchema::restricted_to(const std::vector<std::string>& names) const {
  std::set<std::string> keep(names.begin(), names.end());
  std::vector<EventTypeDef> types;
  for (const auto& t : event_types_)
    if (keep.count(t.name)) types.push_back(t);
  return EventSchema(std::move(types), special_);
}

std::size_t EventSchema::distinct_role_count() const {
  std::set<std::string> roles;
  for (const auto& t : event_types_) roles.insert(t.roles.begin(), t.roles.end());
  return roles.size();
}

EventSchema parse_schema(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("schema is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("event_types") || !doc["event_types"].is_array())
    throw ParseError("schema must be an object with an 'event_types' array");

  std::vector<EventTypeDef> types;
  std::size_t i = 0;
  for (const auto& entry : doc["event_types"]) {
    const std::string where = "event_types[" + std::to_string(i++) + "]";
    if (!entry.is_object() || !entry.contains("name") || !entry["name"].is_string())
      throw ParseError(where + ": missing string field 'name'");
    EventTypeDef def;
    def.name = entry["name"].get<std::string>();
    if (entry.contains("roles")) {
      if (!entry["roles"].is_array())
        throw ParseError(where + " ('" + def.name + "'): 'roles' must be an array");
      for (const auto& r : entry["roles"]) {
        if (!r.is_string())
          throw ParseError(where + " ('" + def.name + "'): role entries must be strings");
        def.roles.push_back(r.get<std::string>());
      }
    }
    types.push_back(std::move(def));
  }

  SpecialTokens special;
  if (doc.contains("special_tokens")) {
    const auto& st = doc["special_tokens"];
    if (!st.is_object()) throw ParseError("'special_tokens' must be an object");
    auto read = [&](const char* key, std::string& slot) {
      if (!st.contains(key)) return;
      if (!st[key].is_string())
        throw ParseError(std::string("special_tokens.") + key + " must be a string");
      slot = st[key].get<std::string>();
    };
    read("mask", special.mask_token);
    read("sep", special.sep_token);
    read("pad_word", special.pad_word);
    read("arg_joiner", special.arg_joiner);
  }
  return EventSchema(std::move(types), std::move(special));
}

EventSchema load_schema(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open schema file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_schema(buf.str());
}

std::string schema_to_json(const EventSchema& schema, int indent) {
  json doc;
  doc["event_types"] = json::array();
  for (const auto& t : schema.event_types())
    doc["event_types"].push_back({{"name", t.name}, {"roles", t.roles}});
  const auto& st = schema.special_tokens();
  doc["special_tokens"] = {{"mask", st.mask_token},
                           {"sep", st.sep_token},
                           {"pad_word", st.pad_word},
                           {"arg_joiner", st.arg_joiner}};
  return doc.dump(indent);
}

void save_schema(const EventSchema& schema, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << schema_to_json(schema) << "\n";
}

std::string blind_type_name(std::size_t type_index) { return "T" + std::to_string(type_index); }

std::string blind_role_name(std::size_t type_index, std::size_t role_index) {
  return "R" + std::to_string(type_index) + std::to_string(role_index);
}

namespace {

std::string render_prompt(const std::string& type_label,
                          const std::vector<std::string>& role_labels, const std::string& mask) {
  std::string text = "Event type is " + type_label + ". Event trigger is " + mask + ".";
  for (const auto& role : role_labels) text += " " + role + " is " + mask + ".";
  return text;
}

}  // namespace

Prompt build_prompt(const EventSchema& schema, const std::string& event_type) {
  const auto& def = schema.type(event_type);
  return {event_type, render_prompt(def.name, def.roles, schema.special_tokens().mask_token),
          false};
}

Prompt build_label_blind_prompt(const EventSchema& schema, const std::string& event_type) {
  const std::size_t i = *schema.index_of(schema.type(event_type).name);
  const auto& def = schema.type(i);
  std::vector<std::string> roles;
  for (std::size_t j = 0; j < def.roles.size(); ++j) roles.push_back(blind_role_name(i, j));
  return {event_type, render_prompt(blind_type_name(i), roles, schema.special_tokens().mask_token),
          true};
}

LabelMap::LabelMap(const EventSchema& schema) : original_(schema) {
  std::vector<EventTypeDef> types;
  for (std::size_t i = 0; i < schema.size(); ++i) {
    const auto& def = schema.type(i);
    EventTypeDef blind{blind_type_name(i), {}};
    type_to_blind_[def.name] = blind.name;
    blind_to_type_[blind.name] = def.name;
    for (std::size_t j = 0; j < def.roles.size(); ++j) {
      std::string r = blind_role_name(i, j);
      role_to_blind_[{def.name, def.roles[j]}] = r;
      blind_to_role_[{blind.name, r}] = def.roles[j];
      blind.roles.push_back(std::move(r));
    }
    types.push_back(std::move(blind));
  }
  blinded_ = EventSchema(std::move(types), schema.special_tokens());
}

const std::string& LabelMap::blind_type(const std::string& type) const {
  auto it = type_to_blind_.find(type);
  if (it == type_to_blind_.end()) throw LookupError("unknown event type '" + type + "'");
  return it->second;
}

const std::string& LabelMap::real_type(const std::string& blind_type) const {
  auto it = blind_to_type_.find(blind_type);
  if (it == blind_to_type_.end()) throw LookupError("unknown blind type '" + blind_type + "'");
  return it->second;
}

const std::string& LabelMap::blind_role(const std::string& type, const std::string& role) const {
  auto it = role_to_blind_.find({type, role});
  if (it == role_to_blind_.end())
    throw LookupError("unknown role '" + role + "' of '" + type + "'");
  return it->second;
}

const std::string& LabelMap::real_role(const std::string& blind_type,
                                       const std::string& blind_role) const {
  auto it = blind_to_role_.find({blind_type, blind_role});
  if (it == blind_to_role_.end())
    throw LookupError("unknown blind role '" + blind_role + "' of '" + blind_type + "'");
  return it->second;
}

}  // namespace demoee
