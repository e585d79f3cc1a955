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

#include <cmath>

#include "demoee/errors.hpp"
#include "demoee/generation.hpp"
#include "demoee/record_codec.hpp"
#include "demoee/toy/toy_backend.hpp"
#include "fixtures.hpp"

using namespace demoee;
using namespace demoee::toy;
using demoee::testing::kelly_example;
using demoee::testing::TempDir;
using demoee::testing::toy_schema;

namespace {

ToyConfig small_config(uint64_t seed = 1) {
  ToyConfig c;
  c.layers = 1;
  c.heads = 2;
  c.d_model = 32;
  c.d_ff = 64;
  c.seed = seed;
  return c;
}

std::vector<TrainingExample> batch_of(const Corpus& c, std::size_t n) {
  std::vector<TrainingExample> out;
  Rng rng = make_rng(0, "batch");
  const DemoSelector selector(c, DemoStrategy::kRichRole);
  const auto lookup = demo_lookup(selector);
  for (const auto& ex : c.examples) {
    for (auto& te : make_training_examples(ex, c.schema, lookup, TrainingConfig{}, rng)) {
      if (out.size() == n) return out;
      out.push_back(std::move(te));
    }
  }
  return out;
}

}  // namespace

TEST_CASE("tokenize and detokenize") {
  CHECK(tokenize("Event trigger is arrived. Origin is Beijing.") ==
        std::vector<std::string>{"Event", "trigger", "is", "arrived", ".", "Origin", "is",
                                 "Beijing", "."});
  CHECK(tokenize("a . b") == std::vector<std::string>{"a", ".", "b"});
  CHECK(detokenize(tokenize("Event trigger is arrived. A is x & y.")) ==
        "Event trigger is arrived. A is x & y.");
}

TEST_CASE("vocabulary") {
  const auto s = toy_schema();
  const Corpus c{s, {kelly_example()}};
  const auto v = Vocabulary::from_corpus(c);
  CHECK(v.word(Vocabulary::kPad) == "<pad>");
  CHECK(v.word(Vocabulary::kEos) == "<eos>");
  for (const auto* w : {"Kelly", "Transport", "Destination", "T1", "R10", "<Mask>", "<SEP>", "None",
                        "&", "Event", "trigger", "is", "."})
    CHECK(v.contains(w));
  CHECK(v.id("never-seen") == Vocabulary::kUnk);
  CHECK(Vocabulary::from_json(v.to_json()).words() == v.words());
}

TEST_CASE("toy config validation and json") {
  CHECK_NOTHROW(ToyConfig{}.validate());
  auto bad = ToyConfig{};
  bad.heads = 3;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = ToyConfig{};
  bad.dropout = 1.0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  auto c = small_config(9);
  c.word_dropout = 0.2;
  const auto back = ToyConfig::from_json(c.to_json());
  CHECK(back.to_json() == c.to_json());
  const auto d = toy_training_defaults();
  CHECK(d.negative_rate == 11);
  CHECK(d.learning_rate > 0.0);
}

TEST_CASE("teacher-forced loss equals step-by-step probabilities") {
  const auto s = toy_schema();
  const auto corpus = generate_synthetic(s, 20, 1);
  const ToyBackend model(Vocabulary::from_corpus(corpus), small_config());
  const auto& ex = corpus.examples[0];
  // A two-token target: a copyable sentence word and a template word.
  const TrainingExample te{
      compose_input(empty_demonstration("Die"), ex.tokens, build_prompt(s, "Die"), s),
      ex.tokens[0] + " is", Polarity::kPositive, "Die", ex.id};
  const std::vector<std::string> y = tokenize(te.target);
  REQUIRE(y.size() == 2);
  const double p1 = model.next_token_probability(te.input, {}, y[0]);
  const double p2 = model.next_token_probability(te.input, {y[0]}, y[1]);
  const double p3 = model.next_token_probability(te.input, y, "<eos>");
  const double want = -(std::log(p1) + std::log(p2) + std::log(p3)) / 3.0;
  const std::vector<TrainingExample> batch{te};
  CHECK(model.loss(batch) == doctest::Approx(want).epsilon(1e-4));
}

TEST_CASE("next-token probabilities sum to one over the vocabulary") {
  const auto s = toy_schema();
  const auto corpus = generate_synthetic(s, 10, 2);
  const ToyBackend model(Vocabulary::from_corpus(corpus), small_config());
  const auto& ex = corpus.examples[1];
  const auto in = compose_input(empty_demonstration("Meet"), ex.tokens, build_prompt(s, "Meet"), s);
  double total = 0.0;
  for (int id = 0; id < model.vocabulary().size(); ++id)
    total += model.next_token_probability(in, {"Event"}, model.vocabulary().word(id));
  CHECK(total == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("generation is deterministic and survives save/load") {
  const auto s = toy_schema();
  const auto corpus = generate_synthetic(s, 20, 3);
  ToyBackend model(Vocabulary::from_corpus(corpus), small_config());
  const auto batch = batch_of(corpus, 8);
  model.train_step(batch, 1e-3);
  const auto& in = batch[0].input;
  const auto out = model.generate(in, 20);
  CHECK(out == model.generate(in, 20));
  CHECK(tokenize(out).size() <= 20);

  TempDir dir("toy");
  model.save(dir.file("m.bin"));
  const auto loaded = ToyBackend::from_file(dir.file("m.bin"));
  CHECK(loaded.parameters_fingerprint() == model.parameters_fingerprint());
  CHECK(loaded.optimizer_steps() == 1);
  CHECK(loaded.generate(in, 20) == out);

  ToyBackend other(Vocabulary::from_corpus(corpus), small_config(2));
  CHECK(other.parameters_fingerprint() != model.parameters_fingerprint());
  other.load(dir.file("m.bin"));
  CHECK(other.parameters_fingerprint() == model.parameters_fingerprint());

  // Continued training from the loaded optimizer state matches.
  model.train_step(batch, 1e-3);
  other.train_step(batch, 1e-3);
  CHECK(other.parameters_fingerprint() == model.parameters_fingerprint());

  demoee::testing::write_file(dir.file("junk.bin"), "not a model");
  CHECK_THROWS(ToyBackend::from_file(dir.file("junk.bin")));
  CHECK_THROWS(ToyBackend::from_file(dir.file("missing.bin")));
}

TEST_CASE("training steps reduce loss reproducibly") {
  const auto s = toy_schema();
  const auto corpus = generate_synthetic(s, 30, 4);
  const auto batch = batch_of(corpus, 8);
  auto run = [&] {
    ToyBackend model(Vocabulary::from_corpus(corpus), small_config(5));
    std::vector<double> curve;
    for (int i = 0; i < 30; ++i) curve.push_back(model.train_step(batch, 3e-3));
    return std::make_pair(curve, model.parameters_fingerprint());
  };
  const auto a = run(), b = run();
  CHECK(a.first == b.first);
  CHECK(a.second == b.second);
  CHECK(a.first.back() < 0.5 * a.first.front());
}

TEST_CASE("a train step changes the fingerprint; loss does not") {
  const auto s = toy_schema();
  const auto corpus = generate_synthetic(s, 10, 6);
  ToyBackend model(Vocabulary::from_corpus(corpus), small_config());
  const auto batch = batch_of(corpus, 4);
  const auto before = model.parameters_fingerprint();
  model.loss(batch);
  model.generate(batch[0].input, 10);
  CHECK(model.parameters_fingerprint() == before);
  model.train_step(batch, 1e-3);
  CHECK(model.parameters_fingerprint() != before);
  CHECK(model.optimizer_steps() == 1);
  CHECK(model.parameter_count() > 0);
}

TEST_CASE("out-of-vocabulary sentence words can be copied") {
  const auto s = toy_schema();
  const auto corpus = generate_synthetic(s, 40, 7);
  ToyBackend model(Vocabulary::from_corpus(corpus), small_config(8));
  // Teach the model to copy the first sentence word after "Event trigger is".
  std::vector<TrainingExample> batch;
  for (const auto& ex : corpus.examples) {
    if (batch.size() == 16) break;
    batch.push_back(
        {compose_input(empty_demonstration("Die"), ex.tokens, build_prompt(s, "Die"), s),
         "Event trigger is " + ex.tokens[0] + ".", Polarity::kPositive, "Die", ex.id});
  }
  for (int i = 0; i < 150; ++i) model.train_step(batch, 3e-3);
  const std::vector<std::string> sentence = {"Zyxwv", "walked", "home", "."};
  REQUIRE_FALSE(model.vocabulary().contains("Zyxwv"));
  const auto in = compose_input(empty_demonstration("Die"), sentence, build_prompt(s, "Die"), s);
  CHECK(model.generate(in, 12) == "Event trigger is Zyxwv.");
}
