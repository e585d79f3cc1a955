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

#include "demoee/generation.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "demoee/errors.hpp"

namespace demoee {

namespace fs = std::filesystem;
using nlohmann::json;

ComposedInput compose_input(const Demonstration& demo, const std::vector<std::string>& tokens,
                            const Prompt& prompt, const EventSchema& schema) {
  const std::string& sep = schema.special_tokens().sep_token;
  const std::string demo_text = demo.text();
  const std::string sentence = join_tokens(tokens);

  ComposedInput in;
  in.text = demo_text;
  in.demo = {0, demo_text.size()};
  if (!demo_text.empty()) in.text += ' ';
  in.text += sep + ' ';
  in.sentence.begin = in.text.size();
  in.text += sentence;
  in.sentence.end = in.text.size();
  in.text += ' ' + sep + ' ';
  in.prompt.begin = in.text.size();
  in.text += prompt.text;
  in.prompt.end = in.text.size();
  return in;
}

TrainingConfig TrainingConfig::adaptation() {
  TrainingConfig c;
  c.epochs = 45;
  return c;
}

void TrainingConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ValidationError("learning_rate must be positive");
  if (warmup_fraction < 0.0 || warmup_fraction > 1.0)
    throw ValidationError("warmup_fraction must be in [0, 1]");
  if (batch_size == 0) throw ValidationError("batch_size must be positive");
  if (max_target_length == 0) throw ValidationError("max_target_length must be positive");
  if (beam_width != 1) throw ValidationError("only greedy decoding (beam width 1) is supported");
}

json TrainingConfig::to_json() const {
  return {{"negative_rate", negative_rate},
          {"event_free_negatives", event_free_negatives},
          {"learning_rate", learning_rate},
          {"warmup_fraction", warmup_fraction},
          {"batch_size", batch_size},
          {"epochs", epochs},
          {"seed", seed},
          {"max_target_length", max_target_length},
          {"beam_width", beam_width}};
}

TrainingConfig TrainingConfig::from_json(const json& obj) {
  TrainingConfig c;
  auto get = [&](const char* key, auto& slot) {
    if (obj.contains(key)) slot = obj[key].get<std::decay_t<decltype(slot)>>();
  };
  get("negative_rate", c.negative_rate);
  get("event_free_negatives", c.event_free_negatives);
  get("learning_rate", c.learning_rate);
  get("warmup_fraction", c.warmup_fraction);
  get("batch_size", c.batch_size);
  get("epochs", c.epochs);
  get("seed", c.seed);
  get("max_target_length", c.max_target_length);
  get("beam_width", c.beam_width);
  return c;
}

Prompt make_prompt(const EventSchema& schema, const std::string& event_type, PromptMode mode) {
  return mode == PromptMode::kLabelBlind ? build_label_blind_prompt(schema, event_type)
                                         : build_prompt(schema, event_type);
}

DemoLookup demo_lookup(const DemoSelector& selector) {
  return [&selector](const AnnotatedExample& sentence, const std::string& type) {
    return selector.demo_for(type, sentence.tokens, sentence.id);
  };
}

DemoLookup no_demo_lookup() {
  return [](const AnnotatedExample&, const std::string& type) { return empty_demonstration(type); };
}

std::vector<PlannedPair> plan_training_pairs(const AnnotatedExample& example,
                                             const EventSchema& schema,
                                             const TrainingConfig& config, Rng& rng) {
  std::vector<PlannedPair> pairs;
  std::vector<std::string> unannotated;
  for (const auto& t : schema.event_types()) {
    if (example.bears(t.name))
      pairs.push_back({t.name, Polarity::kPositive});
    else
      unannotated.push_back(t.name);
  }
  const std::size_t positives = pairs.size();
  const std::size_t wanted =
      positives > 0 ? config.negative_rate * positives : config.event_free_negatives;
  for (auto i : sample_without_replacement(rng, unannotated.size(), wanted))
    pairs.push_back({unannotated[i], Polarity::kNegative});
  return pairs;
}

namespace {

std::string target_for(const AnnotatedExample& example, const PlannedPair& pair,
                       const EventSchema& schema) {
  return pair.polarity == Polarity::kPositive
             ? linearize(pair.event_type, example.records_of(pair.event_type), schema).text
             : empty_record_text(pair.event_type, schema);
}

}  // namespace

std::vector<TrainingExample> make_training_examples(const AnnotatedExample& example,
                                                    const EventSchema& schema,
                                                    const DemoLookup& demos,
                                                    const TrainingConfig& config, Rng& rng,
                                                    PromptMode mode) {
  std::vector<TrainingExample> out;
  for (const auto& pair : plan_training_pairs(example, schema, config, rng)) {
    const Demonstration demo =
        demos ? demos(example, pair.event_type) : empty_demonstration(pair.event_type);
    out.push_back(
        {compose_input(demo, example.tokens, make_prompt(schema, pair.event_type, mode), schema),
         target_for(example, pair, schema), pair.polarity, pair.event_type, example.id});
  }
  return out;
}

double scheduled_learning_rate(const TrainingConfig& config, std::size_t step,
                               std::size_t total_steps) {
  const double warmup = std::ceil(config.warmup_fraction * static_cast<double>(total_steps));
  if (warmup <= 0.0) return config.learning_rate;
  return config.learning_rate * std::min(1.0, static_cast<double>(step + 1) / warmup);
}

void write_checkpoint(const Seq2SeqBackend& backend, const std::string& dir,
                      const TrainingConfig& config, const EventSchema& schema, std::size_t epoch,
                      const std::vector<double>& losses) {
  fs::create_directories(dir);
  backend.save((fs::path(dir) / "model.bin").string());
  json meta = {{"backend", backend.name()},
               {"config", config.to_json()},
               {"schema_digest", sha256_hex(schema_to_json(schema, -1))},
               {"schema", json::parse(schema_to_json(schema, -1))},
               {"epoch", epoch},
               {"loss", losses.empty() ? json(nullptr) : json(losses.back())},
               {"parameters_fingerprint", backend.parameters_fingerprint()}};
  std::ofstream(fs::path(dir) / "meta.json") << meta.dump(2) << "\n";
  std::ofstream csv(fs::path(dir) / "loss_curve.csv");
  csv << "epoch,mean_loss\n";
  for (std::size_t e = 0; e < losses.size(); ++e) {
    std::ostringstream v;
    v.precision(9);
    v << losses[e];
    csv << (e + 1) << "," << v.str() << "\n";
  }
}

namespace {

std::string dump_batch(std::span<const TrainingExample> batch) {
  std::string out;
  for (const auto& ex : batch)
    out += json{{"source_id", ex.source_id},
                {"event_type", ex.event_type},
                {"input", ex.input.text},
                {"target", ex.target}}
               .dump() +
           "\n";
  return out;
}

}  // namespace

TrainResult train(Seq2SeqBackend& backend, const Corpus& corpus, const DemoLookup& demos,
                  const TrainingConfig& config, const TrainHooks& hooks) {
  config.validate();
  const EventSchema& schema = corpus.schema;
  TrainResult result;
  Sha256 digest;

  // Pair counts per sentence do not depend on which negatives are drawn, so
  // the epoch size is fixed.
  std::size_t per_epoch = 0;
  {
    Rng probe = make_rng(config.seed, "negatives/probe");
    for (const auto& ex : corpus.examples)
      per_epoch += plan_training_pairs(ex, schema, config, probe).size();
  }
  result.examples_per_epoch = per_epoch;
  const std::size_t batches_per_epoch = (per_epoch + config.batch_size - 1) / config.batch_size;
  const std::size_t total_steps = batches_per_epoch * config.epochs;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    Rng neg_rng = make_rng(config.seed, "negatives/epoch" + std::to_string(epoch));
    Rng order_rng = make_rng(config.seed, "shuffle/epoch" + std::to_string(epoch));

    struct Pending {
      const AnnotatedExample* example;
      PlannedPair pair;
    };
    std::vector<Pending> pending;
    std::vector<Demonstration> epoch_demos;
    for (const auto& ex : corpus.examples) {
      for (auto& pair : plan_training_pairs(ex, schema, config, neg_rng)) {
        epoch_demos.push_back(demos ? demos(ex, pair.event_type)
                                    : empty_demonstration(pair.event_type));
        pending.push_back({&ex, std::move(pair)});
      }
    }
    if (hooks.demo_transform) epoch_demos = hooks.demo_transform(std::move(epoch_demos), epoch);

    std::vector<TrainingExample> examples;
    examples.reserve(pending.size());
    for (std::size_t i = 0; i < pending.size(); ++i) {
      const auto& p = pending[i];
      examples.push_back(
          {compose_input(epoch_demos[i], p.example->tokens,
                         make_prompt(schema, p.pair.event_type, hooks.prompt_mode), schema),
           target_for(*p.example, p.pair, schema), p.pair.polarity, p.pair.event_type,
           p.example->id});
    }
    shuffle(examples, order_rng);
    for (const auto& ex : examples) {
      digest.update(ex.input.text);
      digest.update("\t");
      digest.update(ex.target);
      digest.update("\n");
    }

    double loss_sum = 0.0;
    std::size_t n_batches = 0;
    for (std::size_t b = 0; b < examples.size(); b += config.batch_size) {
      const std::size_t end = std::min(examples.size(), b + config.batch_size);
      std::span<const TrainingExample> batch(examples.data() + b, end - b);
      const double lr = scheduled_learning_rate(config, result.steps, total_steps);
      const double loss = backend.train_step(batch, lr);
      if (!std::isfinite(loss)) {
        std::string dump = dump_batch(batch);
        if (!hooks.checkpoint_dir.empty()) {
          fs::create_directories(hooks.checkpoint_dir);
          std::ofstream(fs::path(hooks.checkpoint_dir) / "diverged_batch.jsonl") << dump;
        }
        throw TrainingError("non-finite loss at epoch " + std::to_string(epoch + 1) + ", step " +
                                std::to_string(result.steps + 1),
                            std::move(dump));
      }
      loss_sum += loss;
      ++n_batches;
      ++result.steps;
    }
    result.epoch_losses.push_back(n_batches ? loss_sum / static_cast<double>(n_batches) : 0.0);
    if (hooks.on_epoch) hooks.on_epoch(epoch + 1, result.epoch_losses.back());
    if (!hooks.checkpoint_dir.empty())
      write_checkpoint(backend, hooks.checkpoint_dir, config, schema, epoch + 1,
                       result.epoch_losses);
  }
  result.inputs_digest = digest.hex_digest();
  return result;
}

std::vector<EventRecord> generate_records(const Seq2SeqBackend& backend,
                                          const std::vector<std::string>& tokens,
                                          const std::string& event_type, const EventSchema& schema,
                                          const Demonstration& demo, const TrainingConfig& config,
                                          PromptMode mode, DecodeDiagnostics* diagnostics) {
  const ComposedInput input =
      compose_input(demo, tokens, make_prompt(schema, event_type, mode), schema);
  const std::string generated = backend.generate(input, config.max_target_length);
  const auto parsed = parse_records(generated, event_type, schema, diagnostics);
  return resolve_offsets(parsed, tokens, event_type, diagnostics);
}

}  // namespace demoee
