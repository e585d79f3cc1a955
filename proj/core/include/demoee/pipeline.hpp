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

#ifndef DEMOEE_PIPELINE_HPP_
#define DEMOEE_PIPELINE_HPP_

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "demoee/corpus.hpp"
#include "demoee/demo_builder.hpp"
#include "demoee/embedder.hpp"
#include "demoee/evaluation.hpp"
#include "demoee/generation.hpp"
#include "demoee/schema.hpp"

namespace demoee {

enum class RobustnessMode { kPerturb, kDrop };
enum class RobustnessPhase { kTrain, kTest, kBoth };

struct RobustnessConfig {
  RobustnessMode mode = RobustnessMode::kPerturb;
  double fraction = 0.4;
  RobustnessPhase phase = RobustnessPhase::kTest;
  uint64_t seed = 0;

  bool applies_to_training() const { return phase != RobustnessPhase::kTest; }
  bool applies_to_inference() const { return phase != RobustnessPhase::kTrain; }
};

std::string to_string(RobustnessMode mode);
std::string to_string(RobustnessPhase phase);

struct PipelineConfig {
  DemoStrategy strategy = DemoStrategy::kRichRole;
  // false: every demonstration is empty.
  bool use_demo = true;
  // Replace type and role names by placeholders in prompts.
  bool label_blind = false;
  // With label_blind, also use placeholders in targets and demonstrations.
  bool blind_targets = true;
  std::optional<RobustnessConfig> robustness;
  // Generate the event types of one sentence on worker threads.
  bool parallel = false;
};

// Applies a robustness transform to a list of demonstrations.
std::vector<Demonstration> apply_robustness(std::vector<Demonstration> demos,
                                            const RobustnessConfig& config,
                                            const SpecialTokens& special, uint64_t stream);

// Binds a backend to a schema, a demonstration pool and a pipeline config.
// Handles label blinding transparently: inputs and outputs always use the
// real schema labels. Never modifies the backend.
class Extractor {
 public:
  Extractor(const Seq2SeqBackend& backend, EventSchema schema, const Corpus& demo_pool,
            PipelineConfig config, TrainingConfig generation = {},
            const Embedder* embedder = nullptr);

  // All event types of the schema, in schema order then trigger order.
  std::vector<EventRecord> extract(const std::vector<std::string>& tokens,
                                   const std::string& id = "",
                                   DecodeDiagnostics* diagnostics = nullptr) const;

  struct CorpusPrediction {
    Predictions predictions;
    std::map<std::string, DecodeDiagnostics> diagnostics;
    std::size_t generate_calls = 0;
  };
  // Batch prediction. Inference-phase robustness is applied to the list of
  // every (sentence, type) demonstration of the corpus.
  CorpusPrediction predict(const Corpus& corpus) const;

  const EventSchema& schema() const { return schema_; }
  const PipelineConfig& config() const { return config_; }

  // Demonstration for one sentence and real event type (before robustness).
  Demonstration demo_for(const std::vector<std::string>& tokens, const std::string& id,
                         const std::string& event_type) const;

 private:
  std::vector<EventRecord> run_type(const std::vector<std::string>& tokens,
                                    const std::string& event_type, const Demonstration& demo,
                                    DecodeDiagnostics* diagnostics) const;

  const Seq2SeqBackend& backend_;
  EventSchema schema_;
  PipelineConfig config_;
  TrainingConfig generation_;
  std::unique_ptr<LabelMap> labels_;
  // Demonstration pool in the labels the backend sees.
  std::unique_ptr<Corpus> pool_;
  std::unique_ptr<DemoSelector> selector_;
};

struct PipelineTrainResult {
  TrainResult train;
  std::vector<std::string> warnings;
};

// Trains on `corpus` with demonstrations drawn from `corpus` itself.
PipelineTrainResult train_pipeline(Seq2SeqBackend& backend, const Corpus& corpus,
                                   const PipelineConfig& config, const TrainingConfig& training,
                                   const TrainHooks& hooks = {},
                                   const Embedder* embedder = nullptr);

// Applies a source-trained backend to a new schema through prompts and
// demonstrations only.
Extractor adapt_parameter_agnostic(const Seq2SeqBackend& backend, const EventSchema& tgt_schema,
                                   const Corpus& tgt_demo_corpus, const PipelineConfig& config,
                                   const TrainingConfig& generation = {},
                                   const Embedder* embedder = nullptr,
                                   std::vector<std::string>* warnings = nullptr);

// Continues training on the target training set (45 epochs by default).
PipelineTrainResult adapt_parameter_adaptive(
    Seq2SeqBackend& backend, const Corpus& tgt_train, const PipelineConfig& config,
    const TrainingConfig& training = TrainingConfig::adaptation(), const TrainHooks& hooks = {},
    const Embedder* embedder = nullptr);

// Corpus with every type and role renamed through `labels`.
Corpus blind_corpus(const Corpus& corpus, const LabelMap& labels);
std::vector<EventRecord> unblind_records(const std::vector<EventRecord>& records,
                                         const LabelMap& labels);

// Prediction JSONL: the corpus line format with "records" holding predictions
// plus a "diagnostics" object.
void write_predictions_jsonl(const Corpus& corpus, const Extractor::CorpusPrediction& prediction,
                             std::ostream& out);
Predictions read_predictions_jsonl(std::istream& in, const Corpus& gold);

}  // namespace demoee

#endif  // DEMOEE_PIPELINE_HPP_
