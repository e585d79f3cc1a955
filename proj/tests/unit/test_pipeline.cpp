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
#include "demoee/pipeline.hpp"
#include "demoee/toy/toy_backend.hpp"
#include "fixtures.hpp"

using namespace demoee;
using demoee::testing::ace_schema;
using demoee::testing::kelly_example;
using demoee::testing::toy_schema;

namespace {

// Small randomly initialized toy model: fast, and its output depends on every
// part of the input.
toy::ToyBackend tiny_toy(const Corpus& corpus, uint64_t seed = 3) {
  toy::ToyConfig cfg;
  cfg.layers = 1;
  cfg.heads = 2;
  cfg.d_model = 32;
  cfg.d_ff = 64;
  cfg.seed = seed;
  return toy::ToyBackend(toy::Vocabulary::from_corpus(corpus), cfg);
}

TrainingConfig short_generation() {
  TrainingConfig g;
  g.max_target_length = 24;
  return g;
}

bool same_records(std::vector<EventRecord> a, std::vector<EventRecord> b) {
  auto norm = [](std::vector<EventRecord>& rs) {
    for (auto& r : rs) std::sort(r.arguments.begin(), r.arguments.end());
    std::sort(rs.begin(), rs.end(), [](const EventRecord& x, const EventRecord& y) {
      return std::tie(x.event_type, x.trigger) < std::tie(y.event_type, y.trigger);
    });
  };
  norm(a);
  norm(b);
  return a == b;
}

}  // namespace

TEST_CASE("echo oracle closes the loop on a synthetic corpus") {
  const auto s = toy_schema();
  const auto gold = generate_synthetic(s, 200, 12);
  const EchoBackend echo(gold);
  for (const auto strategy : {DemoStrategy::kRichRole, DemoStrategy::kRichContext}) {
    PipelineConfig pc;
    pc.strategy = strategy;
    const Extractor x(echo, s, gold, pc);
    const auto r = score(gold, x.predict(gold).predictions);
    CHECK(r.trig_c.f1 == 1.0);
    CHECK(r.arg_c.f1 == 1.0);
  }
}

TEST_CASE("echo oracle closes the loop under label blinding") {
  const auto s = toy_schema();
  const auto gold = generate_synthetic(s, 100, 13);
  const EchoBackend echo(gold);
  PipelineConfig pc;
  pc.label_blind = true;
  const Extractor x(echo, s, gold, pc);
  const auto r = score(gold, x.predict(gold).predictions);
  CHECK(r.trig_c.f1 == 1.0);
  CHECK(r.arg_c.f1 == 1.0);
}

TEST_CASE("prompt-only blinding keeps real labels in training targets") {
  const auto s = toy_schema();
  const Corpus c{s, {kelly_example()}};
  TrainingConfig cfg;
  cfg.epochs = 1;
  // The echo backend sees every composed input through train_step.
  class Recorder : public EchoBackend {
   public:
    using EchoBackend::EchoBackend;
    double train_step(std::span<const TrainingExample> batch, double) override {
      for (const auto& te : batch) seen.push_back(te);
      return 0.0;
    }
    std::vector<TrainingExample> seen;
  };
  for (bool blind_targets : {true, false}) {
    Recorder rec(c);
    PipelineConfig pc;
    pc.label_blind = true;
    pc.blind_targets = blind_targets;
    train_pipeline(rec, c, pc, cfg);
    REQUIRE_FALSE(rec.seen.empty());
    for (const auto& te : rec.seen) {
      CHECK(te.input.part(te.input.prompt).find("Event type is T") == 0);
      if (blind_targets)
        CHECK(te.target.find("Artifact") == std::string::npos);
      else if (te.polarity == Polarity::kPositive && te.event_type == "Transport")
        CHECK(te.target.find("Artifact is Kelly.") != std::string::npos);
    }
    bool any_real = false;
    for (const auto& te : rec.seen) any_real = any_real || te.event_type == "Transport";
    CHECK(any_real == !blind_targets);
  }
}

TEST_CASE("Kelly sentence yields Transport and Meet") {
  const auto s = toy_schema();
  const Corpus gold{s, {kelly_example()}};
  const EchoBackend echo(gold);
  const Extractor x(echo, s, gold, {});
  const auto recs = x.extract(kelly_example().tokens, "kelly");
  REQUIRE(recs.size() == 2);
  CHECK(recs[0].event_type == "Transport");
  CHECK(recs[1].event_type == "Meet");
  CHECK(same_records(recs, kelly_example().records));
}

TEST_CASE("all-pad generations extract nothing") {
  const auto s = toy_schema();
  const EchoBackend echo(Corpus{s, {}});
  const Extractor x(echo, s, Corpus{s, {}}, {});
  CHECK(x.extract({"nothing", "happened"}).empty());
}

TEST_CASE("one generate call per schema type") {
  const auto s = ace_schema();
  const auto gold = generate_synthetic(s, 3, 1);
  const EchoBackend echo(gold);
  const Extractor x(echo, s, gold, {});
  const auto before = echo.generate_calls();
  x.extract(gold.examples[0].tokens, gold.examples[0].id);
  CHECK(echo.generate_calls() - before == 33);
  CHECK(x.predict(gold).generate_calls == 99);
}

TEST_CASE("parallel extraction matches sequential") {
  const auto s = toy_schema();
  const auto c = generate_synthetic(s, 12, 5);
  const auto model = tiny_toy(c);
  PipelineConfig seq, par;
  par.parallel = true;
  const Extractor a(model, s, c, seq, short_generation()), b(model, s, c, par, short_generation());
  const auto pa = a.predict(c), pb = b.predict(c);
  CHECK(pa.predictions == pb.predictions);
}

TEST_CASE("no-demo output equals dropping every demonstration") {
  const auto s = toy_schema();
  const auto c = generate_synthetic(s, 15, 6);
  const auto model = tiny_toy(c);
  PipelineConfig none;
  none.use_demo = false;
  PipelineConfig dropped;
  dropped.robustness = RobustnessConfig{RobustnessMode::kDrop, 1.0, RobustnessPhase::kTest, 0};
  PipelineConfig clean;
  const Extractor a(model, s, c, none, short_generation());
  const Extractor b(model, s, c, dropped, short_generation());
  const Extractor d(model, s, c, clean, short_generation());
  const auto pa = a.predict(c).predictions;
  CHECK(pa == b.predict(c).predictions);
  // Sanity: the clean configuration does supply demonstrations.
  const auto& ex0 = c.examples[0];
  CHECK_FALSE(
      d.demo_for(ex0.tokens, ex0.id,
                 c.examples[0].records.empty() ? "Die" : c.examples[0].records[0].event_type)
          .empty());
  for (const auto& ex : c.examples)
    CHECK(a.extract(ex.tokens, ex.id) == b.extract(ex.tokens, ex.id));
}

TEST_CASE("parameter-agnostic adaptation never touches the backend") {
  const auto s = ace_schema();
  const auto corpus = generate_synthetic(s, 300, 7);
  const auto split = build_domain_split(corpus, 10, 0.8, 1);
  const auto model = tiny_toy(corpus);
  const auto before = model.parameters_fingerprint();
  std::vector<std::string> warnings;
  const auto x = adapt_parameter_agnostic(model, split.tgt_schema, split.tgt_train, {},
                                          short_generation(), nullptr, &warnings);
  std::size_t n = 0;
  for (const auto& ex : split.tgt_eval.examples) {
    if (n == 10) break;
    for (const auto& r : x.extract(ex.tokens, ex.id))
      CHECK(split.tgt_schema.contains(r.event_type));
    ++n;
  }
  CHECK(model.parameters_fingerprint() == before);

  // Types missing from the target pool fall back to empty demonstrations.
  const Corpus tiny_pool{split.tgt_schema, {}};
  warnings.clear();
  const auto y = adapt_parameter_agnostic(model, split.tgt_schema, tiny_pool, {},
                                          short_generation(), nullptr, &warnings);
  CHECK(warnings.size() == split.tgt_schema.size());
  CHECK(y.demo_for({"a"}, "", split.tgt_schema.type(0).name).empty());
}

TEST_CASE("echo oracle decodes target types never seen in source training") {
  const auto s = ace_schema();
  const auto corpus = generate_synthetic(s, 200, 8);
  const auto split = build_domain_split(corpus, 10, 0.8, 1);
  const EchoBackend echo(split.tgt_eval);
  const auto x = adapt_parameter_agnostic(echo, split.tgt_schema, split.tgt_train, {});
  const auto pred = x.predict(split.tgt_eval);
  const auto r = score(split.tgt_eval, pred.predictions);
  CHECK(r.trig_c.f1 == 1.0);
  CHECK(r.arg_c.f1 == 1.0);
  for (const auto& [id, recs] : pred.predictions)
    for (const auto& rec : recs) CHECK_FALSE(split.src_schema.contains(rec.event_type));
}

TEST_CASE("parameter-adaptive with zero epochs leaves parameters alone") {
  const auto s = toy_schema();
  const auto c = generate_synthetic(s, 10, 9);
  auto model = tiny_toy(c);
  const auto before = model.parameters_fingerprint();
  auto cfg = TrainingConfig::adaptation();
  CHECK(cfg.epochs == 45);
  cfg.epochs = 0;
  adapt_parameter_adaptive(model, c, {}, cfg);
  CHECK(model.parameters_fingerprint() == before);
}

TEST_CASE("robustness transforms") {
  std::vector<Demonstration> demos;
  const auto s = toy_schema();
  const auto c = generate_synthetic(s, 300, 2);
  for (const auto& ex : c.examples)
    if (ex.bears("Attack") && demos.size() < 50)
      demos.push_back(build_demonstration(ex, "Attack", s));
  REQUIRE(demos.size() == 50);
  for (auto mode : {RobustnessMode::kPerturb, RobustnessMode::kDrop}) {
    const auto out =
        apply_robustness(demos, {mode, 0.4, RobustnessPhase::kTest, 1}, s.special_tokens(), 0);
    std::size_t changed = 0;
    for (std::size_t i = 0; i < demos.size(); ++i) changed += out[i] == demos[i] ? 0 : 1;
    CHECK(changed == 20);
  }
  CHECK(to_string(RobustnessMode::kDrop) == "drop");
  CHECK(to_string(RobustnessPhase::kTest) == "test");
}

TEST_CASE("test-phase robustness leaves training inputs alone") {
  const auto s = toy_schema();
  const auto c = generate_synthetic(s, 30, 10);
  TrainingConfig cfg;
  cfg.epochs = 2;
  auto digest = [&](std::optional<RobustnessConfig> rc) {
    EchoBackend echo(c);
    PipelineConfig pc;
    pc.robustness = rc;
    return train_pipeline(echo, c, pc, cfg).train.inputs_digest;
  };
  const auto base = digest(std::nullopt);
  for (auto mode : {RobustnessMode::kPerturb, RobustnessMode::kDrop}) {
    CHECK(digest(RobustnessConfig{mode, 0.4, RobustnessPhase::kTest, 0}) == base);
    CHECK(digest(RobustnessConfig{mode, 0.4, RobustnessPhase::kTrain, 0}) != base);
    CHECK(digest(RobustnessConfig{mode, 0.4, RobustnessPhase::kBoth, 0}) != base);
  }
}

TEST_CASE("blinding round trip") {
  const auto s = toy_schema();
  const LabelMap labels(s);
  const auto c = generate_synthetic(s, 40, 3);
  const auto blind = blind_corpus(c, labels);
  CHECK(blind.schema == labels.blinded());
  for (std::size_t i = 0; i < c.size(); ++i) {
    for (const auto& r : blind.examples[i].records) CHECK(r.event_type[0] == 'T');
    CHECK(unblind_records(blind.examples[i].records, labels) == c.examples[i].records);
  }
}

TEST_CASE("prediction jsonl round trip") {
  const auto s = toy_schema();
  const auto gold = generate_synthetic(s, 30, 4);
  const EchoBackend echo(gold);
  const Extractor x(echo, s, gold, {});
  const auto pred = x.predict(gold);
  std::stringstream buf;
  write_predictions_jsonl(gold, pred, buf);
  CHECK(read_predictions_jsonl(buf, gold) == pred.predictions);

  std::stringstream bad(R"({"id":"ghost","tokens":["a"],"records":[]})"
                        "\n");
  CHECK_THROWS_AS(read_predictions_jsonl(bad, gold), ValidationError);
}

TEST_CASE("training pipeline warns on types without examples") {
  const auto s = toy_schema();
  Corpus c{s, {kelly_example()}};
  EchoBackend echo(c);
  TrainingConfig cfg;
  cfg.epochs = 1;
  const auto r = train_pipeline(echo, c, {}, cfg);
  CHECK(r.warnings.size() == 3);
  CHECK(r.train.steps == 1);
}
