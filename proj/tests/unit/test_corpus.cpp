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

#include <sstream>

#include "demoee/errors.hpp"
#include "fixtures.hpp"

using namespace demoee;
using demoee::testing::kelly_example;
using demoee::testing::toy_schema;

namespace {

Corpus parse(const std::string& text) {
  std::istringstream in(text);
  return read_jsonl(in, toy_schema());
}

std::string dump(const Corpus& c) {
  std::ostringstream out;
  write_jsonl(c, out);
  return out.str();
}

}  // namespace

TEST_CASE("Kelly sentence line parses into two records") {
  const auto line = example_to_json(kelly_example()).dump() + "\n";
  const auto c = parse(line);
  REQUIRE(c.size() == 1);
  CHECK(c.examples[0].records.size() == 2);
  CHECK(c.examples[0] == kelly_example());
  CHECK(c.event_count() == 2);
  CHECK(c.argument_count() == 5);
}

TEST_CASE("empty input gives an empty corpus") {
  CHECK(parse("").empty());
  CHECK(parse("\n\n").empty());
}

TEST_CASE("invalid lines are rejected with their line number") {
  const std::string good = example_to_json(kelly_example()).dump();
  auto bad_span = kelly_example();
  bad_span.id = "other";
  bad_span.records[0].trigger.end = bad_span.records[0].trigger.start;
  try {
    parse(good + "\n" + example_to_json(bad_span).dump() + "\n");
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find(":2") != std::string::npos);
  }

  auto out_of_range = kelly_example();
  out_of_range.records[0].arguments[0].span.end = 99;
  CHECK_THROWS_AS(parse(example_to_json(out_of_range).dump()), ValidationError);

  auto unknown_type = kelly_example();
  unknown_type.records[0].event_type = "Fly";
  CHECK_THROWS_AS(parse(example_to_json(unknown_type).dump()), ValidationError);

  auto unknown_role = kelly_example();
  unknown_role.records[0].arguments[0].role = "Pilot";
  CHECK_THROWS_AS(parse(example_to_json(unknown_role).dump()), ValidationError);

  CHECK_THROWS_AS(parse(good + "\n" + good + "\n"), ValidationError);
  CHECK_THROWS_AS(parse("{broken\n"), ParseError);
}

TEST_CASE("record_from_json rebuilds span text from tokens") {
  const auto ex = kelly_example();
  const auto r = record_from_json(record_to_json(ex.records[0]), ex.tokens);
  CHECK(r == ex.records[0]);
}

TEST_CASE("synthetic corpora are deterministic") {
  const auto s = toy_schema();
  const auto a = generate_synthetic(s, 200, 7);
  const auto b = generate_synthetic(s, 200, 7);
  CHECK(a.size() == 200);
  CHECK(dump(a) == dump(b));
  CHECK(dump(a) != dump(generate_synthetic(s, 200, 8)));
  CHECK(generate_synthetic(s, 0, 7).empty());
  CHECK_NOTHROW(validate_corpus(a));
}

TEST_CASE("jsonl write/read round trip") {
  const auto s = toy_schema();
  const auto a = generate_synthetic(s, 50, 1);
  const auto b = parse(dump(a));
  CHECK(a.examples == b.examples);
}

TEST_CASE("filter_to_schema") {
  const auto s = toy_schema();
  Corpus c{s, {kelly_example()}};
  const auto sub = s.restricted_to({"Meet"});
  const auto kept = filter_to_schema(c, sub, false);
  REQUIRE(kept.size() == 1);
  REQUIRE(kept.examples[0].records.size() == 1);
  CHECK(kept.examples[0].records[0].event_type == "Meet");
  CHECK(filter_to_schema(c, s.restricted_to({"Die"}), true).empty());
  CHECK(filter_to_schema(c, s.restricted_to({"Die"}), false).size() == 1);
}

TEST_CASE("example helpers") {
  const auto ex = kelly_example();
  CHECK(ex.bears("Meet"));
  CHECK_FALSE(ex.bears("Die"));
  CHECK(ex.filled_role_count("Transport") == 3);
  CHECK(ex.filled_role_count("Meet") == 1);
}
