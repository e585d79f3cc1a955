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

#include <algorithm>
#include <filesystem>
#include <limits>
#include <nlohmann/json.hpp>
#include <set>

#include "demoee/errors.hpp"
#include "demoee/generation.hpp"
#include "demoee/record_codec.hpp"
#include "fixtures.hpp"

using namespace demoee;
using demoee::testing::ace_schema;
using demoee::testing::kelly_example;
using demoee::testing::TempDir;
using demoee::testing::toy_schema;

namespace {

// Returns the same text for every input; train_step returns `loss`.
class FixedBackend : public Seq2SeqBackend {
 public:
  explicit FixedBackend(std::string text, double loss = 1.0)
      : text_(std::move(text)), loss_(loss) {}
  std::string name() const override { return "fixed"; }
  double train_step(std::span<const TrainingExample> batch, double) override {
    seen += batch.size();
    return loss_;
  }
  std::string generate(const ComposedInput&, std::size_t) const override { return text_; }
  std::string parameters_fingerprint() const override { return "fixed"; }
  void save(const std::string& path) const override { std::ofstream(path) << text_; }
  void load(const std::string&) override {}
  std::size_t seen = 0;

 private:
  std::string text_;
  double loss_;
};

AnnotatedExample with_types(const std::vector<std::string>& types) {
  AnnotatedExample ex{"x", {"a", "b", "c"}, {}};
  for (const auto& t : types) ex.records.push_back({t, make_span(ex.tokens, 1, 2), {}});
  return ex;
}

std::size_t count(const std::vector<PlannedPair>& pairs, Polarity p) {
  return static_cast<std::size_t>(
      std::count_if(pairs.begin(), pairs.end(), [&](const auto& x) { return x.polarity == p; }));
}

}  // namespace

TEST_CASE("composed input layout") {
  const auto s = toy_schema();
  const auto ex = kelly_example();
  const auto demo = build_demonstration(ex, "Transport", s);
  const auto prompt = build_prompt(s, "Transport");
  const auto in = compose_input(demo, ex.tokens, prompt, s);
  CHECK(in.text == demo.text() + " <SEP> " + join_tokens(ex.tokens) + " <SEP> " + prompt.text);
  CHECK(in.part(in.demo) == demo.text());
  CHECK(in.part(in.sentence) == join_tokens(ex.tokens));
  CHECK(in.part(in.prompt) == prompt.text);

  const auto bare = compose_input(empty_demonstration("Transport"), ex.tokens, prompt, s);
  CHECK(bare.text == "<SEP> " + join_tokens(ex.tokens) + " <SEP> " + prompt.text);
  CHECK(bare.demo.length() == 0);
  CHECK(bare.part(bare.sentence) == join_tokens(ex.tokens));
}

TEST_CASE("negative sampling examples") {
  const auto s = ace_schema();
  TrainingConfig cfg;
  CHECK(cfg.negative_rate == 11);
  Rng rng = make_rng(0, "t");
  auto two = plan_training_pairs(with_types({"Attack", "Meet"}), s, cfg, rng);
  CHECK(count(two, Polarity::kPositive) == 2);
  CHECK(count(two, Polarity::kNegative) == 22);
  auto one = plan_training_pairs(with_types({"Attack"}), s, cfg, rng);
  CHECK(count(one, Polarity::kPositive) == 1);
  CHECK(count(one, Polarity::kNegative) == 11);
  auto none = plan_training_pairs(with_types({}), s, cfg, rng);
  CHECK(none.size() == 1);
  CHECK(count(none, Polarity::kNegative) == 1);
}

TEST_CASE("negative sampling law over random sentences") {
  const auto s = ace_schema();
  Rng gen = make_rng(42, "law");
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t k = 1 + uniform_index(gen, 6);
    std::vector<std::string> types;
    for (auto i : sample_without_replacement(gen, s.size(), k)) types.push_back(s.type(i).name);
    const auto ex = with_types(types);
    for (std::size_t m : {0u, 1u, 11u, 40u}) {
      TrainingConfig cfg;
      cfg.negative_rate = m;
      Rng rng = make_rng(trial, "plan");
      const auto pairs = plan_training_pairs(ex, s, cfg, rng);
      CHECK(count(pairs, Polarity::kPositive) == k);
      CHECK(count(pairs, Polarity::kNegative) == std::min(m * k, s.size() - k));
      std::set<std::string> seen;
      for (const auto& p : pairs) {
        CHECK(seen.insert(p.event_type).second);
        CHECK(ex.bears(p.event_type) == (p.polarity == Polarity::kPositive));
      }
    }
  }
}

TEST_CASE("training examples carry linearized and pad targets") {
  const auto s = toy_schema();
  const auto ex = kelly_example();
  Rng rng = make_rng(1, "x");
  TrainingConfig cfg;
  const auto out = make_training_examples(ex, s, no_demo_lookup(), cfg, rng);
  REQUIRE(out.size() == 5);
  for (const auto& te : out) {
    if (te.polarity == Polarity::kPositive)
      CHECK(te.target == linearize(te.event_type, ex.records_of(te.event_type), s).text);
    else
      CHECK(te.target == empty_record_text(te.event_type, s));
    CHECK(te.input.demo.length() == 0);
  }
  const auto blind =
      make_training_examples(ex, s, no_demo_lookup(), cfg, rng, PromptMode::kLabelBlind);
  for (const auto& te : blind) CHECK(te.input.part(te.input.prompt).find("Event type is T") == 0);
}

TEST_CASE("warmup schedule") {
  TrainingConfig cfg;
  cfg.learning_rate = 1.0;
  cfg.warmup_fraction = 0.1;
  CHECK(scheduled_learning_rate(cfg, 0, 100) == doctest::Approx(0.1));
  CHECK(scheduled_learning_rate(cfg, 4, 100) == doctest::Approx(0.5));
  CHECK(scheduled_learning_rate(cfg, 9, 100) == doctest::Approx(1.0));
  CHECK(scheduled_learning_rate(cfg, 50, 100) == doctest::Approx(1.0));
  cfg.warmup_fraction = 0.0;
  CHECK(scheduled_learning_rate(cfg, 0, 100) == doctest::Approx(1.0));
}

TEST_CASE("training config validation and json") {
  TrainingConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  CHECK(TrainingConfig::adaptation().epochs == 45);
  auto bad = cfg;
  bad.batch_size = 0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = cfg;
  bad.beam_width = 4;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  cfg.negative_rate = 3;
  cfg.seed = 17;
  const auto back = TrainingConfig::from_json(cfg.to_json());
  CHECK(back.negative_rate == 3);
  CHECK(back.seed == 17);
}

TEST_CASE("generate_records with fixed outputs") {
  const auto s = toy_schema();
  const auto ex = kelly_example();
  const TrainingConfig cfg;
  FixedBackend pad(empty_record_text("Transport", s));
  CHECK(generate_records(pad, ex.tokens, "Transport", s, empty_demonstration("Transport"), cfg)
            .empty());

  FixedBackend unmatched("Event trigger is flew. Artifact is Kelly.");
  DecodeDiagnostics d;
  CHECK(generate_records(unmatched, ex.tokens, "Transport", s, empty_demonstration("Transport"),
                         cfg, PromptMode::kSchema, &d)
            .empty());
  CHECK(d.unmatched_triggers == 1);
}

TEST_CASE("echo backend returns exactly the gold records") {
  const auto s = toy_schema();
  const auto gold = generate_synthetic(s, 60, 4);
  const EchoBackend echo(gold);
  const TrainingConfig cfg;
  for (const auto& ex : gold.examples)
    for (const auto& t : s.event_types()) {
      auto got = generate_records(echo, ex.tokens, t.name, s, empty_demonstration(t.name), cfg);
      auto want = ex.records_of(t.name);
      auto key = [](const EventRecord& a, const EventRecord& b) {
        return std::tie(a.trigger.start, a.trigger.end) < std::tie(b.trigger.start, b.trigger.end);
      };
      std::stable_sort(want.begin(), want.end(), key);
      REQUIRE(got.size() == want.size());
      for (std::size_t i = 0; i < got.size(); ++i) {
        CHECK(got[i].trigger == want[i].trigger);
        auto a = got[i].arguments, b = want[i].arguments;
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        CHECK(a == b);
      }
    }
}

TEST_CASE("echo backend answers unknown sentences with the pad record") {
  const auto s = toy_schema();
  const EchoBackend echo(Corpus{s, {kelly_example()}});
  const auto in =
      compose_input(empty_demonstration("Die"), {"unseen", "text"}, build_prompt(s, "Die"), s);
  CHECK(echo.generate(in, 128) == empty_record_text("Die", s));
}

TEST_CASE("zero epochs leave the backend untouched") {
  const auto s = toy_schema();
  const auto c = generate_synthetic(s, 10, 1);
  FixedBackend b("x");
  TrainingConfig cfg;
  cfg.epochs = 0;
  const auto before = b.parameters_fingerprint();
  const auto r = train(b, c, no_demo_lookup(), cfg);
  CHECK(r.steps == 0);
  CHECK(r.epoch_losses.empty());
  CHECK(b.seen == 0);
  CHECK(b.parameters_fingerprint() == before);
}

TEST_CASE("training visits every planned pair once per epoch") {
  const auto s = toy_schema();
  const auto c = generate_synthetic(s, 30, 1);
  FixedBackend b("x", 0.5);
  TrainingConfig cfg;
  cfg.epochs = 3;
  cfg.batch_size = 7;
  TempDir dir("train");
  TrainHooks hooks;
  hooks.checkpoint_dir = dir.file("ckpt");
  std::vector<double> seen_losses;
  hooks.on_epoch = [&](std::size_t, double l) { seen_losses.push_back(l); };
  const auto r = train(b, c, no_demo_lookup(), cfg, hooks);
  std::size_t expected = 0;
  for (const auto& ex : c.examples)
    expected += ex.records.empty() ? 1 : [&] {
      std::set<std::string> types;
      for (const auto& rec : ex.records) types.insert(rec.event_type);
      return types.size() + std::min(11 * types.size(), s.size() - types.size());
    }();
  CHECK(r.examples_per_epoch == expected);
  CHECK(b.seen == 3 * expected);
  CHECK(r.steps == 3 * ((expected + 6) / 7));
  CHECK(r.epoch_losses == std::vector<double>{0.5, 0.5, 0.5});
  CHECK(seen_losses == r.epoch_losses);

  namespace fs = std::filesystem;
  CHECK(fs::exists(hooks.checkpoint_dir + "/model.bin"));
  CHECK(fs::exists(hooks.checkpoint_dir + "/loss_curve.csv"));
  const auto meta =
      nlohmann::json::parse(demoee::testing::read_file(hooks.checkpoint_dir + "/meta.json"));
  CHECK(meta["epoch"] == 3);
  CHECK(meta["backend"] == "fixed");
  CHECK(demoee::testing::read_file(hooks.checkpoint_dir + "/loss_curve.csv") ==
        "epoch,mean_loss\n1,0.5\n2,0.5\n3,0.5\n");

  // Same seed, same inputs.
  FixedBackend b2("x", 0.5);
  CHECK(train(b2, c, no_demo_lookup(), cfg).inputs_digest == r.inputs_digest);
  cfg.seed = 1;
  FixedBackend b3("x", 0.5);
  CHECK(train(b3, c, no_demo_lookup(), cfg).inputs_digest != r.inputs_digest);
}

TEST_CASE("non-finite loss aborts with a batch dump") {
  const auto s = toy_schema();
  const auto c = generate_synthetic(s, 10, 1);
  FixedBackend b("x", std::numeric_limits<double>::quiet_NaN());
  TrainingConfig cfg;
  cfg.epochs = 2;
  cfg.batch_size = 4;
  TempDir dir("nan");
  TrainHooks hooks;
  hooks.checkpoint_dir = dir.file("ckpt");
  try {
    train(b, c, no_demo_lookup(), cfg, hooks);
    FAIL("expected a training error");
  } catch (const TrainingError& e) {
    std::size_t lines = 0;
    for (char ch : e.batch_dump()) lines += ch == '\n' ? 1 : 0;
    CHECK(lines == 4);
    CHECK(e.batch_dump().find("\"target\"") != std::string::npos);
    CHECK(demoee::testing::read_file(hooks.checkpoint_dir + "/diverged_batch.jsonl") ==
          e.batch_dump());
  }
}
