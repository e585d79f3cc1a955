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

#include <doctest.h>

#include <set>

#include "demoee/errors.hpp"
#include "fixtures.hpp"

using namespace demoee;
using demoee::testing::ace_schema;
using demoee::testing::toy_schema;

namespace {

std::size_t count_of(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1))
    ++n;
  return n;
}

}  // namespace

TEST_CASE("ace schema has 33 types and 22 roles") {
  const auto s = ace_schema();
  CHECK(s.size() == 33);
  CHECK(s.distinct_role_count() == 22);
  // Independent recount.
  std::set<std::string> roles;
  for (const auto& t : s.event_types()) roles.insert(t.roles.begin(), t.roles.end());
  CHECK(roles.size() == 22);
}

TEST_CASE("single type without roles is valid") {
  const auto s = parse_schema(R"({"event_types":[{"name":"X","roles":[]}]})");
  REQUIRE(s.size() == 1);
  CHECK(s.type("X").roles.empty());
}

TEST_CASE("role names containing ' is ' are rejected") {
  CHECK_NOTHROW(parse_schema(R"({"event_types":[{"name":"X","roles":["is a"]}]})"));
  CHECK_THROWS_AS(parse_schema(R"({"event_types":[{"name":"X","roles":["x is y"]}]})"),
                  ValidationError);
  CHECK(is_valid_label("is a"));
  CHECK_FALSE(is_valid_label("x is y"));
}

TEST_CASE("schema errors") {
  CHECK_THROWS_AS(parse_schema("{not json"), ParseError);
  CHECK_THROWS_AS(parse_schema(R"({"types":[]})"), ParseError);
  CHECK_THROWS_AS(parse_schema(R"({"event_types":[{"roles":[]}]})"), ParseError);
  CHECK_THROWS_AS(
      parse_schema(R"({"event_types":[{"name":"X","roles":[]},{"name":"X","roles":[]}]})"),
      ValidationError);
  CHECK_THROWS_AS(parse_schema(R"({"event_types":[{"name":"X","roles":["A","A"]}]})"),
                  ValidationError);
  CHECK_THROWS_AS(load_schema("/nonexistent/schema.json"), ParseError);
  CHECK_THROWS_AS(toy_schema().type("Nope"), LookupError);
}

TEST_CASE("schema json round trip") {
  const auto s = ace_schema();
  CHECK(parse_schema(schema_to_json(s)) == s);
}

TEST_CASE("schema prompt for Transport") {
  const auto s = toy_schema();
  const auto p = build_prompt(s, "Transport");
  CHECK(p.text ==
        "Event type is Transport. Event trigger is <Mask>. Artifact is <Mask>. Origin is <Mask>. "
        "Destination is <Mask>. Vehicle is <Mask>. Agent is <Mask>.");
  CHECK_FALSE(p.label_blind);
  CHECK_THROWS_AS(build_prompt(s, "Nope"), LookupError);
}

TEST_CASE("prompt for a type without roles") {
  const auto s = parse_schema(R"({"event_types":[{"name":"X","roles":[]}]})");
  CHECK(build_prompt(s, "X").text == "Event type is X. Event trigger is <Mask>.");
}

TEST_CASE("mask count is one plus the role count") {
  const auto s = ace_schema();
  for (const auto& t : s.event_types()) {
    CHECK(count_of(build_prompt(s, t.name).text, "<Mask>") == 1 + t.roles.size());
    CHECK(count_of(build_label_blind_prompt(s, t.name).text, "<Mask>") == 1 + t.roles.size());
  }
}

TEST_CASE("label-blind prompts") {
  const auto s = parse_schema(R"({"event_types":[{"name":"A","roles":["X","Y"]},
      {"name":"B","roles":[]},{"name":"C","roles":[]},{"name":"D","roles":[]},
      {"name":"E","roles":[]},{"name":"F","roles":[]}]})");
  const auto p = build_label_blind_prompt(s, "A");
  CHECK(p.text == "Event type is T0. Event trigger is <Mask>. R00 is <Mask>. R01 is <Mask>.");
  CHECK(p.label_blind);
  CHECK(build_label_blind_prompt(s, "F").text == "Event type is T5. Event trigger is <Mask>.");
  CHECK_THROWS_AS(build_label_blind_prompt(s, "Z"), LookupError);
}

TEST_CASE("label map inverts") {
  const auto s = ace_schema();
  const LabelMap m(s);
  CHECK(m.blinded().size() == s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto& t = s.type(i);
    const auto& bt = m.blind_type(t.name);
    CHECK(bt == blind_type_name(i));
    CHECK(m.real_type(bt) == t.name);
    for (std::size_t j = 0; j < t.roles.size(); ++j) {
      const auto& br = m.blind_role(t.name, t.roles[j]);
      CHECK(br == blind_role_name(i, j));
      CHECK(m.real_role(bt, br) == t.roles[j]);
    }
  }
}

TEST_CASE("restricted_to keeps schema order") {
  const auto s = toy_schema();
  const auto r = s.restricted_to({"Elect", "Die"});
  REQUIRE(r.size() == 2);
  CHECK(r.type(0).name == "Die");
  CHECK(r.type(1).name == "Elect");
}
