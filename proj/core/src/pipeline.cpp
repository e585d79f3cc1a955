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

#include "demoee/pipeline.hpp"

#include <future>
#include <istream>
#include <ostream>

#include "demoee/errors.hpp"

namespace demoee {

std::string to_string(RobustnessMode mode) {
  return mode == RobustnessMode::kPerturb ? "perturb" : "drop";
}

std::string to_string(RobustnessPhase phase) {
  switch (phase) {
    case RobustnessPhase::kTrain:
      return "train";
    case RobustnessPhase::kTest:
      return "test";
    case RobustnessPhase::kBoth:
      return "both";
  }
  return "unknown";
}

std::vector<Demonstration> apply_robustness(std::vector<Demonstration> demos,
                                            const RobustnessConfig& config,
                                            const SpecialTokens& special, uint64_t stream) {
  const uint64_t seed = derive_seed(config.seed, "robustness/" + std::to_string(stream));
  if (config.mode == RobustnessMode::kPerturb)
    return perturb_demonstrations(std::move(demos), config.fraction, seed, special);
  return drop_demonstrations(std::move(demos), config.fraction, seed);
}

Corpus blind_corpus(const Corpus& corpus, const LabelMap& labels) {
  Corpus out{labels.blinded(), {}};
  out.examples.reserve(corpus.examples.size());
  for (const auto& ex : corpus.examples) {
    AnnotatedExample copy{ex.id, ex.tokens, {}};
    for (const auto& r : ex.records) {
      EventRecord b{labels.blind_type(r.event_type), r.trigger, {}};
      for (const auto& a : r.arguments)
        b.arguments.push_back({labels.blind_role(r.event_type, a.role), a.span});
      copy.records.push_back(std::move(b));
    }
    out.examples.push_back(std::move(copy));
  }
  return out;
}

std::vector<EventRecord> unblind_records(const std::vector<EventRecord>& records,
                                         const LabelMap& labels) {
  std::vector<EventRecord> out;
  for (const auto& r : records) {
    EventRecord u{labels.real_type(r.event_type), r.trigger, {}};
    for (const auto& a : r.arguments)
      u.arguments.push_back({labels.real_role(r.event_type, a.role), a.span});
    out.push_back(std::move(u));
  }
  return out;
}

namespace {

bool blinds_targets(const PipelineConfig& c) { return c.label_blind && c.blind_targets; }

PromptMode prompt_mode(const PipelineConfig& c) {
  return c.label_blind && !c.blind_targets ? PromptMode::kLabelBlind : PromptMode::kSchema;
}

const Embedder& default_embedder() {
  static const HashedBagEmbedder embedder(256);
  return embedder;
}

}  // namespace

Extractor::Extractor(const Seq2SeqBackend& backend, EventSchema schema, const Corpus& demo_pool,
                     PipelineConfig config, TrainingConfig generation, const Embedder* embedder)
    : backend_(backend),
      schema_(std::move(schema)),
      config_(std::move(config)),
      generation_(std::move(generation)) {
  Corpus pool = filter_to_schema(demo_pool, schema_, false);
  if (blinds_targets(config_)) {
    labels_ = std::make_unique<LabelMap>(schema_);
    pool_ = std::make_unique<Corpus>(blind_corpus(pool, *labels_));
  } else {
    pool_ = std::make_unique<Corpus>(std::move(pool));
  }
  if (config_.use_demo) {
    if (config_.strategy == DemoStrategy::kSimilar && embedder == nullptr)
      embedder = &default_embedder();
    selector_ = std::make_unique<DemoSelector>(*pool_, config_.strategy, embedder);
  }
}

Demonstration Extractor::demo_for(const std::vector<std::string>& tokens, const std::string& id,
                                  const std::string& event_type) const {
  const std::string type = labels_ ? labels_->blind_type(event_type) : event_type;
  if (!selector_) return empty_demonstration(type);
  return selector_->demo_for(type, tokens, id);
}

std::vector<EventRecord> Extractor::run_type(const std::vector<std::string>& tokens,
                                             const std::string& event_type,
                                             const Demonstration& demo,
                                             DecodeDiagnostics* diagnostics) const {
  const EventSchema& working = labels_ ? labels_->blinded() : schema_;
  const std::string type = labels_ ? labels_->blind_type(event_type) : event_type;
  auto records = generate_records(backend_, tokens, type, working, demo, generation_,
                                  prompt_mode(config_), diagnostics);
  return labels_ ? unblind_records(records, *labels_) : records;
}

std::vector<EventRecord> Extractor::extract(const std::vector<std::string>& tokens,
                                            const std::string& id,
                                            DecodeDiagnostics* diagnostics) const {
  const auto& types = schema_.event_types();
  std::vector<Demonstration> demos;
  for (const auto& t : types) demos.push_back(demo_for(tokens, id, t.name));
  if (config_.robustness && config_.robustness->applies_to_inference())
    demos = apply_robustness(std::move(demos), *config_.robustness, schema_.special_tokens(),
                             fnv1a64(id + "\x1f" + join_tokens(tokens)));

  std::vector<std::vector<EventRecord>> per_type(types.size());
  std::vector<DecodeDiagnostics> diags(types.size());
  if (config_.parallel) {
    std::vector<std::future<std::vector<EventRecord>>> jobs;
    for (std::size_t i = 0; i < types.size(); ++i)
      jobs.push_back(std::async(std::launch::async, [&, i] {
        return run_type(tokens, types[i].name, demos[i], &diags[i]);
      }));
    for (std::size_t i = 0; i < types.size(); ++i) per_type[i] = jobs[i].get();
  } else {
    for (std::size_t i = 0; i < types.size(); ++i)
      per_type[i] = run_type(tokens, types[i].name, demos[i], &diags[i]);
  }

  std::vector<EventRecord> out;
  for (std::size_t i = 0; i < types.size(); ++i) {
    out.insert(out.end(), per_type[i].begin(), per_type[i].end());
    if (diagnostics) *diagnostics += diags[i];
  }
  return out;
}

Extractor::CorpusPrediction Extractor::predict(const Corpus& corpus) const {
  const auto& types = schema_.event_types();
  std::vector<Demonstration> demos;
  demos.reserve(corpus.examples.size() * types.size());
  for (const auto& ex : corpus.examples)
    for (const auto& t : types) demos.push_back(demo_for(ex.tokens, ex.id, t.name));
  if (config_.robustness && config_.robustness->applies_to_inference())
    demos = apply_robustness(std::move(demos), *config_.robustness, schema_.special_tokens(), 0);

  CorpusPrediction out;
  std::size_t k = 0;
  for (const auto& ex : corpus.examples) {
    auto& records = out.predictions[ex.id];
    auto& diag = out.diagnostics[ex.id];
    for (const auto& t : types) {
      auto recs = run_type(ex.tokens, t.name, demos[k++], &diag);
      ++out.generate_calls;
      records.insert(records.end(), recs.begin(), recs.end());
    }
  }
  return out;
}

PipelineTrainResult train_pipeline(Seq2SeqBackend& backend, const Corpus& corpus,
                                   const PipelineConfig& config, const TrainingConfig& training,
                                   const TrainHooks& hooks, const Embedder* embedder) {
  PipelineTrainResult result;
  std::unique_ptr<LabelMap> labels;
  const Corpus* working = &corpus;
  Corpus blinded;
  if (blinds_targets(config)) {
    labels = std::make_unique<LabelMap>(corpus.schema);
    blinded = blind_corpus(corpus, *labels);
    working = &blinded;
  }

  std::unique_ptr<DemoSelector> selector;
  DemoLookup lookup = no_demo_lookup();
  if (config.use_demo) {
    if (config.strategy == DemoStrategy::kSimilar && embedder == nullptr)
      embedder = &default_embedder();
    selector = std::make_unique<DemoSelector>(*working, config.strategy, embedder);
    lookup = demo_lookup(*selector);
    for (const auto& t : corpus.schema.event_types())
      if (corpus.bearing(t.name).empty())
        result.warnings.push_back("event type '" + t.name +
                                  "' has no training example; its demonstration is empty");
  }

  TrainHooks h = hooks;
  h.prompt_mode = prompt_mode(config);
  if (config.robustness && config.robustness->applies_to_training() && !h.demo_transform) {
    const RobustnessConfig rc = *config.robustness;
    const SpecialTokens special = corpus.schema.special_tokens();
    h.demo_transform = [rc, special](std::vector<Demonstration> demos, std::size_t epoch) {
      return apply_robustness(std::move(demos), rc, special, 1000 + epoch);
    };
  }
  result.train = train(backend, *working, lookup, training, h);
  return result;
}

Extractor adapt_parameter_agnostic(const Seq2SeqBackend& backend, const EventSchema& tgt_schema,
                                   const Corpus& tgt_demo_corpus, const PipelineConfig& config,
                                   const TrainingConfig& generation, const Embedder* embedder,
                                   std::vector<std::string>* warnings) {
  if (warnings && config.use_demo)
    for (const auto& t : tgt_schema.event_types())
      if (tgt_demo_corpus.bearing(t.name).empty())
        warnings->push_back("target event type '" + t.name +
                            "' has no demonstration example; using the empty demonstration");
  return Extractor(backend, tgt_schema, tgt_demo_corpus, config, generation, embedder);
}

PipelineTrainResult adapt_parameter_adaptive(Seq2SeqBackend& backend, const Corpus& tgt_train,
                                             const PipelineConfig& config,
                                             const TrainingConfig& training,
                                             const TrainHooks& hooks, const Embedder* embedder) {
  return train_pipeline(backend, tgt_train, config, training, hooks, embedder);
}

void write_predictions_jsonl(const Corpus& corpus, const Extractor::CorpusPrediction& prediction,
                             std::ostream& out) {
  for (const auto& ex : corpus.examples) {
    nlohmann::json records = nlohmann::json::array();
    auto it = prediction.predictions.find(ex.id);
    if (it != prediction.predictions.end())
      for (const auto& r : it->second) records.push_back(record_to_json(r));
    auto d = prediction.diagnostics.find(ex.id);
    nlohmann::json line = {
        {"id", ex.id},
        {"tokens", ex.tokens},
        {"records", records},
        {"diagnostics",
         d == prediction.diagnostics.end() ? DecodeDiagnostics{}.to_json() : d->second.to_json()}};
    out << line.dump() << "\n";
  }
}

Predictions read_predictions_jsonl(std::istream& in, const Corpus& gold) {
  Predictions out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::string where = "predictions:" + std::to_string(line_no);
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(where + ": " + e.what());
    }
    if (!obj.is_object() || !obj.contains("id") || !obj["id"].is_string())
      throw ParseError(where + ": missing string 'id'");
    const std::string id = obj["id"].get<std::string>();
    const AnnotatedExample* g = gold.find(id);
    if (g == nullptr) throw ValidationError(where + ": unknown example id '" + id + "'");
    auto& records = out[id];
    if (obj.contains("records"))
      for (const auto& r : obj["records"]) {
        try {
          records.push_back(record_from_json(r, g->tokens));
        } catch (const Error& e) {
          throw ParseError(where + ": " + e.what());
        }
      }
  }
  return out;
}

}  // namespace demoee
