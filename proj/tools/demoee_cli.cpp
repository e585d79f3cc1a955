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

// demoee: data preparation, splits, training, prediction, scoring and
// robustness runs for demonstration-enhanced schema-guided event extraction.

#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <memory>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "demoee/adapter_backend.hpp"
#include "demoee/corpus.hpp"
#include "demoee/embedder.hpp"
#include "demoee/errors.hpp"
#include "demoee/evaluation.hpp"
#include "demoee/generation.hpp"
#include "demoee/manifest.hpp"
#include "demoee/pipeline.hpp"
#include "demoee/schema.hpp"
#include "demoee/toy/toy_backend.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace demoee;

namespace {

// Options of one subcommand that may also come from the --config JSON file.
// A value given on the command line always wins.
class Overlay {
 public:
  template <typename T>
  CLI::Option* option(CLI::App* app, const std::string& flag, T& var, const std::string& help,
                      bool required = false) {
    auto* opt =
        app->add_option(flag, var, help + (required ? " (required)" : ""))->capture_default_str();
    bind(opt, var);
    if (required) required_.push_back(opt);
    return opt;
  }
  CLI::Option* flag(CLI::App* app, const std::string& flag, bool& var, const std::string& help) {
    auto* opt = app->add_flag(flag, var, help);
    bind(opt, var);
    return opt;
  }
  // Fills unset options from `config`, then checks required ones.
  void apply(const json& config) const {
    for (const auto& f : setters_) f(config);
    for (const auto* opt : required_) {
      const std::string key = opt->get_lnames().front();
      if (opt->count() == 0 && !config.contains(key))
        throw ValidationError("--" + key + " is required (flag or config key)");
    }
  }

 private:
  template <typename T>
  void bind(CLI::Option* opt, T& var) {
    const std::string key = opt->get_lnames().front();
    setters_.push_back([opt, &var, key](const json& config) {
      if (opt->count() != 0 || !config.contains(key)) return;
      try {
        var = config.at(key).get<T>();
      } catch (const json::exception& e) {
        throw ValidationError("config key '" + key + "': " + e.what());
      }
    });
  }

  std::vector<std::function<void(const json&)>> setters_;
  std::vector<const CLI::Option*> required_;
};

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

void ensure_dir(const std::string& dir) {
  if (dir.empty()) throw ValidationError("--out is required");
  fs::create_directories(dir);
}

std::string in_dir(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

// ---- shared option groups ----

struct PipelineOptions {
  std::string strategy = "rich-role";
  bool no_demo = false;
  bool label_blind = false;
  bool parallel = false;
  std::string embedder_url;
  std::size_t embedder_dim = 768;
  std::size_t embedder_batch = 32;

  void add(CLI::App* app, Overlay& o) {
    o.option(app, "--strategy", strategy,
             "Demonstration strategy: rich-role, rich-context, similar");
    o.flag(app, "--no-demo", no_demo, "Use no demonstrations");
    o.flag(app, "--label-blind", label_blind, "Replace type and role names by placeholders");
    o.option(app, "--embedder-url", embedder_url,
             "Sentence-embedding service for 'similar' (default: hashed bag of tokens)");
    o.option(app, "--embedder-dim", embedder_dim, "Embedding length returned by the service");
    o.option(app, "--embedder-batch", embedder_batch, "Sentences per embedding request");
  }
  // Null means the library default.
  const Embedder* embedder() const {
    if (embedder_url.empty()) return nullptr;
    if (!http_) http_ = std::make_shared<HttpEmbedder>(embedder_url, embedder_dim, embedder_batch);
    return http_.get();
  }
  PipelineConfig build() const {
    PipelineConfig c;
    c.strategy = parse_strategy(strategy);
    c.use_demo = !no_demo;
    c.label_blind = label_blind;
    c.parallel = parallel;
    return c;
  }
  json to_json() const {
    json j = {{"strategy", strategy}, {"no-demo", no_demo}, {"label-blind", label_blind}};
    if (!embedder_url.empty())
      j["embedder"] = {{"url", embedder_url}, {"dim", embedder_dim}, {"batch", embedder_batch}};
    return j;
  }

 private:
  mutable std::shared_ptr<HttpEmbedder> http_;
};

struct TrainOptions {
  std::size_t m = 11;
  std::size_t epochs = 0;
  double lr = 0.0;
  double warmup = 0.1;
  std::size_t batch = 16;
  std::size_t event_free_negatives = 1;
  std::size_t max_target_length = 128;
  std::string backend = "toy";
  json toy = json::object();

  void add(CLI::App* app, Overlay& o) {
    o.option(app, "--m", m, "Negative sampling rate: negatives per positive event type");
    o.option(app, "--epochs", epochs, "Training epochs (0: backend default)");
    o.option(app, "--lr", lr, "Peak learning rate (0: backend default)");
    o.option(app, "--warmup", warmup, "Fraction of steps with linear warmup");
    o.option(app, "--batch", batch, "Batch size");
    o.option(app, "--event-free-negatives", event_free_negatives,
             "Negatives drawn for a sentence without events");
    o.option(app, "--max-target-length", max_target_length, "Generation cap in tokens");
    o.option(app, "--backend", backend, "toy, echo or adapter:<executable>");
  }

  TrainingConfig build(uint64_t seed) const {
    TrainingConfig c = backend == "toy" ? toy::toy_training_defaults() : TrainingConfig{};
    c.negative_rate = m;
    c.event_free_negatives = event_free_negatives;
    if (epochs != 0) c.epochs = epochs;
    if (lr != 0.0) c.learning_rate = lr;
    c.warmup_fraction = warmup;
    c.batch_size = batch;
    c.seed = seed;
    c.max_target_length = max_target_length;
    c.validate();
    return c;
  }
};

std::unique_ptr<Seq2SeqBackend> make_backend(const std::string& kind, const EventSchema& schema,
                                             const Corpus* vocab_corpus,
                                             const std::string& model_dir, const Corpus* oracle,
                                             const json& toy_overrides, uint64_t seed) {
  const std::string model = model_dir.empty() ? "" : in_dir(model_dir, "model.bin");
  if (kind == "toy") {
    if (!model.empty()) return std::make_unique<toy::ToyBackend>(toy::ToyBackend::from_file(model));
    if (vocab_corpus == nullptr) throw ValidationError("toy backend needs --model or a corpus");
    json cfg = toy_overrides;
    cfg["seed"] = seed;
    return std::make_unique<toy::ToyBackend>(toy::Vocabulary::from_corpus(*vocab_corpus),
                                             toy::ToyConfig::from_json(cfg));
  }
  if (kind == "echo") {
    if (oracle == nullptr) throw ValidationError("echo backend needs a gold corpus");
    return std::make_unique<EchoBackend>(*oracle);
  }
  if (kind.rfind("adapter:", 0) == 0) {
    auto b = std::make_unique<AdapterBackend>(kind.substr(8), schema.special_tokens());
    if (!model.empty() && fs::exists(model)) b->load(model);
    return b;
  }
  throw ValidationError("unknown backend '" + kind + "' (toy, echo, adapter:<path>)");
}

std::string fmt(double v, int digits = 4) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

RobustnessMode parse_mode(const std::string& s) {
  if (s == "perturb") return RobustnessMode::kPerturb;
  if (s == "drop") return RobustnessMode::kDrop;
  throw ValidationError("robustness mode must be perturb or drop");
}

struct TrainedRun {
  std::unique_ptr<Seq2SeqBackend> backend;
  PipelineTrainResult result;
};

TrainedRun train_run(const TrainOptions& t, const PipelineConfig& pc, const Embedder* embedder,
                     const Corpus& train, uint64_t seed, const std::string& checkpoint_dir,
                     bool quiet = false) {
  const TrainingConfig tc = t.build(seed);
  TrainedRun run;
  run.backend = make_backend(t.backend, train.schema, &train, "", &train, t.toy, seed);
  TrainHooks hooks;
  hooks.checkpoint_dir = checkpoint_dir;
  if (!quiet)
    hooks.on_epoch = [](std::size_t epoch, double loss) {
      std::cerr << "epoch " << epoch << " mean_loss " << fmt(loss, 6) << "\n";
    };
  run.result = train_pipeline(*run.backend, train, pc, tc, hooks, embedder);
  for (const auto& w : run.result.warnings) std::cerr << "warning: " << w << "\n";
  return run;
}

// ---- commands ----

struct SynthCmd {
  std::string schema, out;
  std::size_t n = 200;
  uint64_t seed = 0;
  SynthOptions synth;

  void add(CLI::App* app, Overlay& o) {
    o.option(app, "--schema", schema, "Event schema JSON", true);
    o.option(app, "--n", n, "Number of sentences");
    o.option(app, "--seed", seed, "Master seed");
    o.option(app, "--event-rate", synth.event_rate, "Probability a sentence has an event");
    o.option(app, "--max-events", synth.max_events, "Most events per sentence");
    o.option(app, "--role-fill-rate", synth.role_fill_rate, "Probability a role is filled");
    o.option(app, "--out", out, "Output directory", true);
  }
  int run() {
    ensure_dir(out);
    RunManifest manifest("synth");
    manifest.add_input(schema);
    const EventSchema s = load_schema(schema);
    const Corpus c = generate_synthetic(s, n, seed, synth);
    const std::string path = in_dir(out, "corpus.jsonl");
    save_jsonl(c, path);
    manifest.set_config({{"n", n},
                         {"seed", seed},
                         {"event-rate", synth.event_rate},
                         {"max-events", synth.max_events},
                         {"role-fill-rate", synth.role_fill_rate},
                         {"multi-argument-rate", synth.multi_argument_rate}});
    manifest.add_seed("master", seed);
    manifest.add_output(path);
    manifest.write(in_dir(out, "manifest.json"));
    std::cout << "wrote " << c.size() << " sentences, " << c.event_count() << " events to " << path
              << "\n";
    return 0;
  }
};

struct SplitCmd {
  std::string schema, corpus, out, mode = "kshot", population = "full";
  std::size_t k = 5, top_n = 10;
  double ratio = 0.1, train_frac = 0.8;
  uint64_t seed = 0;

  void add(CLI::App* app, Overlay& o) {
    o.option(app, "--schema", schema, "Event schema JSON", true);
    o.option(app, "--corpus", corpus, "Corpus JSONL", true);
    o.option(app, "--mode", mode, "kshot, ratio or domain");
    o.option(app, "--k", k, "Examples per event type (kshot)");
    o.option(app, "--ratio", ratio, "Fraction of sentences (ratio)");
    o.option(app, "--population", population, "full or event-bearing (ratio)");
    o.option(app, "--top-n", top_n, "Source-domain size (domain)");
    o.option(app, "--train-frac", train_frac, "Train fraction per domain (domain)");
    o.option(app, "--seed", seed, "Master seed");
    o.option(app, "--out", out, "Output directory", true);
  }

  static json ids(const Corpus& c) {
    json a = json::array();
    for (const auto& ex : c.examples) a.push_back(ex.id);
    return a;
  }

  int run() {
    ensure_dir(out);
    RunManifest manifest("split");
    manifest.add_input(schema);
    manifest.add_input(corpus);
    manifest.add_seed("master", seed);
    const EventSchema s = load_schema(schema);
    const Corpus c = load_jsonl(corpus, s);
    json config = {{"mode", mode}, {"seed", seed}};
    json split_ids = json::object();
    auto emit = [&](const Corpus& part, const std::string& name) {
      const std::string path = in_dir(out, name + ".jsonl");
      save_jsonl(part, path);
      manifest.add_output(path);
      split_ids[name] = ids(part);
      std::cout << name << ": " << part.size() << " sentences, " << part.event_count()
                << " events\n";
    };
    if (mode == "kshot") {
      config["k"] = k;
      auto r = sample_k_shot(c, k, seed);
      for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
      emit(r.corpus, "train");
    } else if (mode == "ratio") {
      config["ratio"] = ratio;
      config["population"] = population;
      RatioPopulation pop;
      if (population == "full")
        pop = RatioPopulation::kFullSet;
      else if (population == "event-bearing" || population == "event")
        pop = RatioPopulation::kEventBearing;
      else
        throw ValidationError("--population must be full or event-bearing");
      auto r = sample_ratio(c, ratio, seed, pop);
      for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
      emit(r.corpus, "train");
    } else if (mode == "domain") {
      config["top-n"] = top_n;
      config["train-frac"] = train_frac;
      const DomainSplit d = build_domain_split(c, top_n, train_frac, seed);
      for (const auto& [name, sch] :
           {std::pair{"src_schema", &d.src_schema}, std::pair{"tgt_schema", &d.tgt_schema}}) {
        const std::string path = in_dir(out, std::string(name) + ".json");
        save_schema(*sch, path);
        manifest.add_output(path);
      }
      emit(d.src_train, "src_train");
      emit(d.src_eval, "src_eval");
      emit(d.tgt_train, "tgt_train");
      emit(d.tgt_eval, "tgt_eval");
    } else {
      throw ValidationError("--mode must be kshot, ratio or domain");
    }
    manifest.set_config(config);
    manifest.note("split_ids", split_ids);
    manifest.write(in_dir(out, "manifest.json"));
    return 0;
  }
};

struct TrainCmd {
  std::string schema, corpus, out, init;
  uint64_t seed = 0;
  PipelineOptions pipeline;
  TrainOptions train;

  void add(CLI::App* app, Overlay& o) {
    o.option(app, "--schema", schema, "Event schema JSON", true);
    o.option(app, "--corpus", corpus, "Training corpus JSONL", true);
    o.option(app, "--seed", seed, "Master seed");
    o.option(app, "--init", init, "Continue from this model directory");
    o.option(app, "--out", out, "Checkpoint directory", true);
    pipeline.add(app, o);
    train.add(app, o);
  }

  int run() {
    ensure_dir(out);
    RunManifest manifest("train");
    manifest.add_input(schema);
    manifest.add_input(corpus);
    const EventSchema s = load_schema(schema);
    const Corpus c = load_jsonl(corpus, s);
    const PipelineConfig pc = pipeline.build();
    const TrainingConfig tc = train.build(seed);
    std::cout << "negative sampling rate m = " << tc.negative_rate << "\n";
    std::cout << "epochs = " << tc.epochs << ", learning rate = " << tc.learning_rate
              << ", batch = " << tc.batch_size << "\n";

    std::unique_ptr<Seq2SeqBackend> backend;
    if (!init.empty()) {
      manifest.add_input(in_dir(init, "model.bin"));
      backend = make_backend(train.backend, s, &c, init, &c, train.toy, seed);
    } else {
      backend = make_backend(train.backend, s, &c, "", &c, train.toy, seed);
    }
    TrainHooks hooks;
    hooks.checkpoint_dir = out;
    hooks.on_epoch = [](std::size_t epoch, double loss) {
      std::cerr << "epoch " << epoch << " mean_loss " << fmt(loss, 6) << "\n";
    };
    const auto result = train_pipeline(*backend, c, pc, tc, hooks, pipeline.embedder());
    for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
    if (tc.epochs == 0) write_checkpoint(*backend, out, tc, s, 0, {});

    json pipe = pipeline.to_json();
    pipe["backend"] = train.backend;
    pipe["train_corpus"] = fs::absolute(corpus).string();
    pipe["schema"] = fs::absolute(schema).string();
    const std::string pipe_path = in_dir(out, "pipeline.json");
    std::ofstream(pipe_path) << pipe.dump(2) << "\n";

    json config = pipeline.to_json();
    config["training"] = tc.to_json();
    config["backend"] = train.backend;
    config["init"] = init;
    manifest.set_config(config);
    manifest.add_seed("master", seed);
    manifest.note("inputs_digest", result.train.inputs_digest);
    manifest.note("epoch_losses", result.train.epoch_losses);
    manifest.note("parameters_fingerprint", backend->parameters_fingerprint());
    for (const char* f : {"model.bin", "meta.json", "loss_curve.csv", "pipeline.json"})
      manifest.add_output(in_dir(out, f));
    manifest.write(in_dir(out, "manifest.json"));
    std::cout << "trained " << result.train.steps << " steps; checkpoint in " << out << "\n";
    return 0;
  }
};

struct PredictCmd {
  std::string schema, corpus, model, demo_corpus, oracle, out, backend;
  std::string robustness_mode;
  double robustness_fraction = 0.4;
  std::size_t max_target_length = 128;
  uint64_t seed = 0;
  PipelineOptions pipeline;
  CLI::Option *strategy_opt = nullptr, *no_demo_opt = nullptr, *blind_opt = nullptr;

  void add(CLI::App* app, Overlay& o) {
    o.option(app, "--schema", schema, "Event schema JSON (may differ from training)", true);
    o.option(app, "--corpus", corpus, "Sentences to extract from (JSONL)", true);
    o.option(app, "--model", model, "Model directory written by train");
    o.option(app, "--demo-corpus", demo_corpus,
             "Demonstration pool (default: the model's training corpus)");
    o.option(app, "--backend", backend, "toy, echo or adapter:<executable> (default: the model's)");
    o.option(app, "--oracle", oracle, "Gold corpus for the echo backend (default: --corpus)");
    o.option(app, "--max-target-length", max_target_length, "Generation cap in tokens");
    o.option(app, "--robustness-mode", robustness_mode, "perturb or drop (test-time)");
    o.option(app, "--robustness-fraction", robustness_fraction,
             "Fraction of demonstrations altered");
    o.option(app, "--seed", seed, "Master seed");
    o.flag(app, "--parallel", pipeline.parallel, "Generate event types on worker threads");
    o.option(app, "--out", out, "Output directory", true);
    pipeline.add(app, o);
    strategy_opt = app->get_option("--strategy");
    no_demo_opt = app->get_option("--no-demo");
    blind_opt = app->get_option("--label-blind");
  }

  int run() {
    ensure_dir(out);
    RunManifest manifest("predict");
    json saved = json::object();
    if (!model.empty() && fs::exists(in_dir(model, "pipeline.json")))
      saved = read_json_file(in_dir(model, "pipeline.json"));
    if (strategy_opt->count() == 0 && saved.contains("strategy"))
      pipeline.strategy = saved["strategy"].get<std::string>();
    if (no_demo_opt->count() == 0 && saved.contains("no-demo"))
      pipeline.no_demo = saved["no-demo"].get<bool>();
    if (blind_opt->count() == 0 && saved.contains("label-blind"))
      pipeline.label_blind = saved["label-blind"].get<bool>();
    if (backend.empty()) backend = saved.value("backend", std::string("toy"));
    if (demo_corpus.empty()) demo_corpus = saved.value("train_corpus", std::string());

    manifest.add_input(schema);
    manifest.add_input(corpus);
    const EventSchema s = load_schema(schema);
    const Corpus c = load_jsonl(corpus, s);
    PipelineConfig pc = pipeline.build();
    if (!robustness_mode.empty())
      pc.robustness = RobustnessConfig{parse_mode(robustness_mode), robustness_fraction,
                                       RobustnessPhase::kTest, seed};

    Corpus pool{s, {}};
    if (pc.use_demo) {
      if (demo_corpus.empty())
        throw ValidationError("--demo-corpus is required when the model has no training corpus");
      manifest.add_input(demo_corpus);
      pool = filter_to_schema(load_jsonl(demo_corpus, s), s, false);
    }
    std::unique_ptr<Corpus> gold;
    if (backend == "echo") {
      const std::string path = oracle.empty() ? corpus : oracle;
      gold = std::make_unique<Corpus>(load_jsonl(path, s));
    } else if (model.empty()) {
      throw ValidationError("--model is required for backend " + backend);
    }
    if (!model.empty() && backend != "echo") manifest.add_input(in_dir(model, "model.bin"));
    auto be = make_backend(backend, s, nullptr, backend == "echo" ? "" : model, gold.get(),
                           json::object(), seed);
    const std::string before = be->parameters_fingerprint();

    TrainingConfig gen;
    gen.max_target_length = max_target_length;
    Extractor extractor(*be, s, pool, pc, gen, pipeline.embedder());
    const auto prediction = extractor.predict(c);
    const std::string path = in_dir(out, "predictions.jsonl");
    {
      std::ofstream f(path);
      write_predictions_jsonl(c, prediction, f);
    }
    DecodeDiagnostics total;
    for (const auto& [_, d] : prediction.diagnostics) total += d;

    json config = pipeline.to_json();
    config["backend"] = backend;
    config["model"] = model;
    config["demo-corpus"] = demo_corpus;
    config["max-target-length"] = max_target_length;
    if (pc.robustness)
      config["robustness"] = {{"mode", robustness_mode}, {"fraction", robustness_fraction}};
    manifest.set_config(config);
    manifest.add_seed("master", seed);
    manifest.note("generate_calls", prediction.generate_calls);
    manifest.note("diagnostics", total.to_json());
    manifest.note("parameters_fingerprint", be->parameters_fingerprint());
    manifest.note("parameters_unchanged", before == be->parameters_fingerprint());
    manifest.add_output(path);
    manifest.write(in_dir(out, "manifest.json"));
    std::cout << "predicted " << c.size() << " sentences with " << prediction.generate_calls
              << " generate calls -> " << path << "\n";
    return 0;
  }
};

void print_report(const ScoreReport& r) {
  std::cout << "Trig-C P " << fmt(r.trig_c.precision) << " R " << fmt(r.trig_c.recall) << " F1 "
            << fmt(r.trig_c.f1) << "\n";
  std::cout << "Arg-C  P " << fmt(r.arg_c.precision) << " R " << fmt(r.arg_c.recall) << " F1 "
            << fmt(r.arg_c.f1) << "\n";
}

void write_report(const ScoreReport& r, const std::string& dir, RunManifest* manifest) {
  const std::string report = in_dir(dir, "report.json");
  const std::string csv = in_dir(dir, "per_type.csv");
  std::ofstream(report) << r.to_json().dump(2) << "\n";
  std::ofstream(csv) << r.per_type_csv();
  if (manifest) {
    manifest->add_output(report);
    manifest->add_output(csv);
  }
}

struct ScoreCmd {
  std::string schema, gold, pred, out;

  void add(CLI::App* app, Overlay& o) {
    o.option(app, "--schema", schema, "Event schema JSON", true);
    o.option(app, "--gold", gold, "Gold corpus JSONL", true);
    o.option(app, "--pred", pred, "Predictions JSONL", true);
    o.option(app, "--out", out, "Output directory", true);
  }
  int run() {
    ensure_dir(out);
    RunManifest manifest("score");
    manifest.add_input(schema);
    manifest.add_input(gold);
    manifest.add_input(pred);
    const EventSchema s = load_schema(schema);
    const Corpus g = load_jsonl(gold, s);
    std::ifstream in(pred);
    if (!in) throw ValidationError("cannot read " + pred);
    const ScoreReport r = score(g, read_predictions_jsonl(in, g));
    write_report(r, out, &manifest);
    manifest.write(in_dir(out, "manifest.json"));
    print_report(r);
    return 0;
  }
};

ScoreReport evaluate(const Seq2SeqBackend& backend, const Corpus& train, const Corpus& eval,
                     const PipelineConfig& pc, const Embedder* embedder,
                     std::size_t max_target_length) {
  TrainingConfig gen;
  gen.max_target_length = max_target_length;
  Extractor extractor(backend, eval.schema, train, pc, gen, embedder);
  return score(eval, extractor.predict(eval).predictions);
}

struct RobustnessCmd {
  std::string schema, corpus, eval_corpus, out;
  double fraction = 0.4;
  uint64_t seed = 0;
  PipelineOptions pipeline;
  TrainOptions train;

  void add(CLI::App* app, Overlay& o) {
    o.option(app, "--schema", schema, "Event schema JSON", true);
    o.option(app, "--corpus", corpus, "Training corpus JSONL", true);
    o.option(app, "--eval-corpus", eval_corpus, "Evaluation corpus JSONL", true);
    o.option(app, "--fraction", fraction, "Fraction of demonstrations perturbed or dropped");
    o.option(app, "--seed", seed, "Master seed");
    o.option(app, "--out", out, "Output directory", true);
    pipeline.add(app, o);
    train.add(app, o);
  }

  int run() {
    ensure_dir(out);
    RunManifest manifest("robustness");
    for (const auto& p : {schema, corpus, eval_corpus}) manifest.add_input(p);
    const EventSchema s = load_schema(schema);
    const Corpus tr = load_jsonl(corpus, s);
    const Corpus ev = load_jsonl(eval_corpus, s);
    const PipelineConfig base = pipeline.build();
    if (!base.use_demo) throw ValidationError("robustness runs need demonstrations");

    struct Variant {
      std::string name;
      std::optional<RobustnessConfig> rc;
    };
    const std::vector<Variant> variants = {
        {"clean", std::nullopt},
        {"test-perturbation",
         RobustnessConfig{RobustnessMode::kPerturb, fraction, RobustnessPhase::kTest, seed}},
        {"train-test-perturbation",
         RobustnessConfig{RobustnessMode::kPerturb, fraction, RobustnessPhase::kBoth, seed}},
        {"test-drop",
         RobustnessConfig{RobustnessMode::kDrop, fraction, RobustnessPhase::kTest, seed}},
        {"train-test-drop",
         RobustnessConfig{RobustnessMode::kDrop, fraction, RobustnessPhase::kBoth, seed}},
    };

    // Training for test-only variants is the clean run.
    std::unique_ptr<TrainedRun> clean;
    std::ostringstream table;
    table << "variant,trig_c_f1,arg_c_f1,training_inputs_digest\n";
    json rows = json::array();
    for (const auto& v : variants) {
      PipelineConfig pc = base;
      pc.robustness = v.rc;
      std::cerr << "== " << v.name << "\n";
      const Seq2SeqBackend* backend = nullptr;
      std::string digest;
      std::unique_ptr<TrainedRun> own;
      const bool trains_clean = !v.rc || !v.rc->applies_to_training();
      if (trains_clean) {
        if (!clean) {
          PipelineConfig clean_pc = base;
          clean = std::make_unique<TrainedRun>(
              train_run(train, clean_pc, pipeline.embedder(), tr, seed, "", true));
        }
        backend = clean->backend.get();
        digest = clean->result.train.inputs_digest;
      } else {
        own = std::make_unique<TrainedRun>(
            train_run(train, pc, pipeline.embedder(), tr, seed, "", true));
        backend = own->backend.get();
        digest = own->result.train.inputs_digest;
      }
      // The echo oracle answers for the evaluation sentences.
      std::unique_ptr<Seq2SeqBackend> echo;
      if (train.backend == "echo") {
        echo = std::make_unique<EchoBackend>(ev);
        backend = echo.get();
      }
      const ScoreReport r =
          evaluate(*backend, tr, ev, pc, pipeline.embedder(), train.max_target_length);
      const std::string dir = in_dir(out, v.name);
      fs::create_directories(dir);
      write_report(r, dir, &manifest);
      table << v.name << "," << fmt(r.trig_c.f1) << "," << fmt(r.arg_c.f1) << "," << digest << "\n";
      rows.push_back({{"variant", v.name},
                      {"trig_c_f1", r.trig_c.f1},
                      {"arg_c_f1", r.arg_c.f1},
                      {"training_inputs_digest", digest}});
    }
    const std::string csv = in_dir(out, "comparison.csv");
    std::ofstream(csv) << table.str();
    manifest.add_output(csv);
    json config = pipeline.to_json();
    config["fraction"] = fraction;
    config["training"] = train.build(seed).to_json();
    config["backend"] = train.backend;
    manifest.set_config(config);
    manifest.add_seed("master", seed);
    manifest.note("variants", rows);
    manifest.write(in_dir(out, "manifest.json"));

    std::cout << "| variant | Trig-C F1 | Arg-C F1 |\n|---|---|---|\n";
    for (const auto& r : rows)
      std::cout << "| " << r["variant"].get<std::string>() << " | "
                << fmt(r["trig_c_f1"].get<double>()) << " | " << fmt(r["arg_c_f1"].get<double>())
                << " |\n";
    return 0;
  }
};

struct SweepCmd {
  std::string schema, corpus, eval_corpus, out, mode = "kshot";
  std::size_t k = 5, seeds = 5;
  double ratio = 0.1;
  uint64_t seed = 0;
  PipelineOptions pipeline;
  TrainOptions train;

  void add(CLI::App* app, Overlay& o) {
    o.option(app, "--schema", schema, "Event schema JSON", true);
    o.option(app, "--corpus", corpus, "Training pool JSONL", true);
    o.option(app, "--eval-corpus", eval_corpus, "Evaluation corpus JSONL", true);
    o.option(app, "--mode", mode, "kshot, ratio or full");
    o.option(app, "--k", k, "Examples per event type (kshot)");
    o.option(app, "--ratio", ratio, "Fraction of sentences (ratio)");
    o.option(app, "--seeds", seeds, "Number of sampling seeds");
    o.option(app, "--seed", seed, "First seed");
    o.option(app, "--out", out, "Output directory", true);
    pipeline.add(app, o);
    train.add(app, o);
  }

  static std::pair<double, double> mean_std(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return {m, v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0};
  }

  int run() {
    ensure_dir(out);
    if (seeds == 0) throw ValidationError("--seeds must be positive");
    RunManifest manifest("sweep");
    for (const auto& p : {schema, corpus, eval_corpus}) manifest.add_input(p);
    const EventSchema s = load_schema(schema);
    const Corpus pool = load_jsonl(corpus, s);
    const Corpus ev = load_jsonl(eval_corpus, s);
    const PipelineConfig pc = pipeline.build();

    std::vector<double> trig, arg;
    std::ostringstream csv;
    csv << "seed,train_sentences,trig_c_f1,arg_c_f1\n";
    for (std::size_t i = 0; i < seeds; ++i) {
      const uint64_t si = seed + i;
      Corpus tr;
      if (mode == "kshot")
        tr = sample_k_shot(pool, k, si).corpus;
      else if (mode == "ratio")
        tr = sample_ratio(pool, ratio, si).corpus;
      else if (mode == "full")
        tr = pool;
      else
        throw ValidationError("--mode must be kshot, ratio or full");
      std::cerr << "== seed " << si << ": " << tr.size() << " training sentences\n";
      auto run = train_run(train, pc, pipeline.embedder(), tr, si, "", true);
      std::unique_ptr<Seq2SeqBackend> echo;
      const Seq2SeqBackend* backend = run.backend.get();
      if (train.backend == "echo") {
        echo = std::make_unique<EchoBackend>(ev);
        backend = echo.get();
      }
      const ScoreReport r =
          evaluate(*backend, tr, ev, pc, pipeline.embedder(), train.max_target_length);
      trig.push_back(r.trig_c.f1);
      arg.push_back(r.arg_c.f1);
      manifest.add_seed("run" + std::to_string(i), si);
      csv << si << "," << tr.size() << "," << fmt(r.trig_c.f1) << "," << fmt(r.arg_c.f1) << "\n";
    }
    const auto [tm, ts] = mean_std(trig);
    const auto [am, as] = mean_std(arg);
    std::ostringstream md;
    md << "| metric | mean | std |\n|---|---|---|\n"
       << "| Trig-C F1 | " << fmt(tm) << " | " << fmt(ts) << " |\n"
       << "| Arg-C F1 | " << fmt(am) << " | " << fmt(as) << " |\n";
    const std::string csv_path = in_dir(out, "sweep.csv"), md_path = in_dir(out, "sweep.md");
    std::ofstream(csv_path) << csv.str();
    std::ofstream(md_path) << md.str();
    manifest.add_output(csv_path);
    manifest.add_output(md_path);
    json config = pipeline.to_json();
    config["mode"] = mode;
    config["k"] = k;
    config["ratio"] = ratio;
    config["seeds"] = seeds;
    config["training"] = train.build(seed).to_json();
    config["backend"] = train.backend;
    manifest.set_config(config);
    manifest.write(in_dir(out, "manifest.json"));
    std::cout << md.str();
    return 0;
  }
};

struct DemosCmd {
  std::string schema, corpus, demo_corpus, out, perturb_mode;
  double fraction = 0.4;
  uint64_t seed = 0;
  PipelineOptions pipeline;

  void add(CLI::App* app, Overlay& o) {
    o.option(app, "--schema", schema, "Event schema JSON", true);
    o.option(app, "--corpus", corpus, "Query sentences JSONL", true);
    o.option(app, "--demo-corpus", demo_corpus, "Demonstration pool JSONL", true);
    o.option(app, "--robustness-mode", perturb_mode, "perturb or drop the listed demonstrations");
    o.option(app, "--fraction", fraction, "Fraction altered with --robustness-mode");
    o.option(app, "--seed", seed, "Master seed");
    o.option(app, "--out", out, "Output directory", true);
    pipeline.add(app, o);
  }
  int run() {
    ensure_dir(out);
    RunManifest manifest("demos");
    for (const auto& p : {schema, corpus, demo_corpus}) manifest.add_input(p);
    const EventSchema s = load_schema(schema);
    const Corpus c = load_jsonl(corpus, s);
    const Corpus pool = load_jsonl(demo_corpus, s);
    PipelineConfig pc = pipeline.build();
    // A throwaway oracle: only demonstration selection is exercised.
    EchoBackend echo(Corpus{s, {}});
    Extractor extractor(echo, s, pool, pc, {}, pipeline.embedder());
    std::vector<Demonstration> demos;
    for (const auto& ex : c.examples)
      for (const auto& t : s.event_types())
        demos.push_back(extractor.demo_for(ex.tokens, ex.id, t.name));
    if (!perturb_mode.empty())
      demos = apply_robustness(
          std::move(demos),
          RobustnessConfig{parse_mode(perturb_mode), fraction, RobustnessPhase::kTest, seed},
          s.special_tokens(), 0);
    const std::string path = in_dir(out, "demos.jsonl");
    {
      std::ofstream f(path);
      write_demonstrations_jsonl(demos, f);
    }
    json config = pipeline.to_json();
    config["robustness-mode"] = perturb_mode;
    config["fraction"] = fraction;
    manifest.set_config(config);
    manifest.add_seed("master", seed);
    manifest.add_output(path);
    manifest.write(in_dir(out, "manifest.json"));
    std::cout << "wrote " << demos.size() << " demonstrations to " << path << "\n";
    return 0;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Demonstration-enhanced schema-guided event extraction"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "JSON file of option values; command-line flags win");

  SynthCmd synth;
  SplitCmd split;
  TrainCmd train;
  PredictCmd predict;
  ScoreCmd score_cmd;
  RobustnessCmd robustness;
  SweepCmd sweep;
  DemosCmd demos;
  struct Entry {
    CLI::App* app;
    Overlay overlay;
    std::function<int()> run;
  };
  std::vector<Entry> entries;
  entries.reserve(8);
  auto add = [&](const char* name, const char* help, auto& cmd) {
    entries.push_back({app.add_subcommand(name, help), {}, [&cmd] { return cmd.run(); }});
    Entry& e = entries.back();
    e.app->fallthrough();
    cmd.add(e.app, e.overlay);
  };
  add("synth", "Generate a synthetic annotated corpus", synth);
  add("split", "Sample k-shot, ratio or cross-domain splits", split);
  add("train", "Train a backend on a corpus", train);
  add("predict", "Extract events from a corpus", predict);
  add("score", "Score predictions with Trig-C and Arg-C", score_cmd);
  add("robustness", "Clean vs perturbed/dropped demonstration runs", robustness);
  add("sweep", "Repeat sample-train-score over several seeds", sweep);
  add("demos", "Dump the demonstrations chosen for each sentence and type", demos);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    const json config = config_path.empty() ? json::object() : read_json_file(config_path);
    if (!config.is_object()) throw ValidationError("--config must hold a JSON object");
    if (config.contains("toy")) {
      if (!config["toy"].is_object()) throw ValidationError("config key 'toy' must be an object");
      for (auto* t : {&train.train, &robustness.train, &sweep.train}) t->toy = config["toy"];
    }
    for (auto& e : entries) {
      if (!e.app->parsed()) continue;
      e.overlay.apply(config);
      return e.run();
    }
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const LookupError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
