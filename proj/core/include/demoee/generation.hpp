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

#ifndef DEMOEE_GENERATION_HPP_
#define DEMOEE_GENERATION_HPP_

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <nlohmann/json.hpp>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "demoee/corpus.hpp"
#include "demoee/demo_builder.hpp"
#include "demoee/record_codec.hpp"
#include "demoee/schema.hpp"
#include "demoee/util.hpp"

namespace demoee {

// Character range [begin, end) of one part of a composed input.
struct Segment {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t length() const { return end - begin; }
};

// "[demo] <SEP> [sentence] <SEP> [prompt]". With an empty demonstration the
// text starts with the separator and the demo segment is empty.
struct ComposedInput {
  std::string text;
  Segment demo;
  Segment sentence;
  Segment prompt;

  std::string_view part(const Segment& s) const {
    return std::string_view(text).substr(s.begin, s.length());
  }
};

ComposedInput compose_input(const Demonstration& demo, const std::vector<std::string>& tokens,
                            const Prompt& prompt, const EventSchema& schema);

enum class Polarity { kPositive, kNegative };

struct TrainingExample {
  ComposedInput input;
  std::string target;
  Polarity polarity = Polarity::kPositive;
  std::string event_type;
  std::string source_id;
};

struct TrainingConfig {
  // Negatives per positive (m).
  std::size_t negative_rate = 11;
  // Negatives drawn for a sentence with no annotated event; 0 keeps the
  // strict m * |positives| law.
  std::size_t event_free_negatives = 1;
  double learning_rate = 4e-5;
  double warmup_fraction = 0.1;
  std::size_t batch_size = 16;
  std::size_t epochs = 90;
  uint64_t seed = 0;
  std::size_t max_target_length = 128;
  std::size_t beam_width = 1;

  // Defaults for continued training on a target domain.
  static TrainingConfig adaptation();
  void validate() const;
  nlohmann::json to_json() const;
  static TrainingConfig from_json(const nlohmann::json& obj);
};

// Trainable sequence-to-sequence generator. generate() must be deterministic
// for fixed parameters and safe to call concurrently.
class Seq2SeqBackend {
 public:
  virtual ~Seq2SeqBackend() = default;

  virtual std::string name() const = 0;
  // One optimizer update; returns the mean per-token NLL of the batch targets
  // computed before the update.
  virtual double train_step(std::span<const TrainingExample> batch, double learning_rate) = 0;
  // Greedy decoding, at most `max_length` output tokens.
  virtual std::string generate(const ComposedInput& input, std::size_t max_length) const = 0;
  virtual std::string parameters_fingerprint() const = 0;

  virtual void save(const std::string& path) const = 0;
  virtual void load(const std::string& path) = 0;
};

enum class PromptMode { kSchema, kLabelBlind };

Prompt make_prompt(const EventSchema& schema, const std::string& event_type, PromptMode mode);

// Supplies the demonstration paired with a sentence for one event type.
using DemoLookup =
    std::function<Demonstration(const AnnotatedExample& sentence, const std::string& event_type)>;

DemoLookup demo_lookup(const DemoSelector& selector);
DemoLookup no_demo_lookup();

// Event types to train on for one sentence, positives first, then negatives
// in draw order.
struct PlannedPair {
  std::string event_type;
  Polarity polarity;
};

std::vector<PlannedPair> plan_training_pairs(const AnnotatedExample& example,
                                             const EventSchema& schema,
                                             const TrainingConfig& config, Rng& rng);

std::vector<TrainingExample> make_training_examples(const AnnotatedExample& example,
                                                    const EventSchema& schema,
                                                    const DemoLookup& demos,
                                                    const TrainingConfig& config, Rng& rng,
                                                    PromptMode mode = PromptMode::kSchema);

struct TrainHooks {
  // When set, model.bin / meta.json / loss_curve.csv are written every epoch.
  std::string checkpoint_dir;
  PromptMode prompt_mode = PromptMode::kSchema;
  // Applied to the full list of an epoch's demonstrations before composing.
  std::function<std::vector<Demonstration>(std::vector<Demonstration>, std::size_t epoch)>
      demo_transform;
  std::function<void(std::size_t epoch, double mean_loss)> on_epoch;
};

struct TrainResult {
  std::vector<double> epoch_losses;
  // SHA-256 over every composed input and target fed to the backend.
  std::string inputs_digest;
  std::size_t steps = 0;
  std::size_t examples_per_epoch = 0;
};

// Linear warmup over warmup_fraction of all steps, then constant.
double scheduled_learning_rate(const TrainingConfig& config, std::size_t step,
                               std::size_t total_steps);

TrainResult train(Seq2SeqBackend& backend, const Corpus& corpus, const DemoLookup& demos,
                  const TrainingConfig& config, const TrainHooks& hooks = {});

void write_checkpoint(const Seq2SeqBackend& backend, const std::string& dir,
                      const TrainingConfig& config, const EventSchema& schema, std::size_t epoch,
                      const std::vector<double>& losses);

// compose -> generate -> parse -> resolve offsets.
std::vector<EventRecord> generate_records(const Seq2SeqBackend& backend,
                                          const std::vector<std::string>& tokens,
                                          const std::string& event_type, const EventSchema& schema,
                                          const Demonstration& demo, const TrainingConfig& config,
                                          PromptMode mode = PromptMode::kSchema,
                                          DecodeDiagnostics* diagnostics = nullptr);

// Oracle backend. Answers from a gold corpus by reading the sentence and the
// prompt out of the composed input; the prompt's own labels (real or
// placeholder) are used in the answer. Unknown sentences get the all-pad
// record. train_step does nothing.
class EchoBackend : public Seq2SeqBackend {
 public:
  explicit EchoBackend(Corpus gold);

  std::string name() const override { return "echo"; }
  double train_step(std::span<const TrainingExample> batch, double learning_rate) override;
  std::string generate(const ComposedInput& input, std::size_t max_length) const override;
  std::string parameters_fingerprint() const override;
  void save(const std::string& path) const override;
  void load(const std::string& path) override;

  std::size_t generate_calls() const { return calls_.load(); }

 private:
  Corpus gold_;
  LabelMap labels_;
  std::map<std::string, std::size_t> by_sentence_;
  mutable std::atomic<std::size_t> calls_{0};
};

}  // namespace demoee

#endif  // DEMOEE_GENERATION_HPP_
