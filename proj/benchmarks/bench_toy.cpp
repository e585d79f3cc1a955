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

#include <benchmark/benchmark.h>

#include "demoee/generation.hpp"
#include "demoee/toy/toy_backend.hpp"

using namespace demoee;

namespace {

struct Fixture {
  EventSchema schema = load_schema(DEMOEE_DATA_DIR "/schemas/toy5.json");
  Corpus corpus = generate_synthetic(schema, 64, 4);
  std::vector<TrainingExample> batch;

  Fixture() {
    const DemoSelector selector(corpus, DemoStrategy::kRichRole);
    Rng rng = make_rng(4, "bench");
    for (const auto& ex : corpus.examples)
      for (auto& te : make_training_examples(ex, schema, demo_lookup(selector), {}, rng))
        if (batch.size() < 16) batch.push_back(std::move(te));
  }
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

}  // namespace

static void BM_ToyLoss(benchmark::State& state) {
  const auto& f = fixture();
  const toy::ToyBackend model(toy::Vocabulary::from_corpus(f.corpus), toy::ToyConfig{});
  for (auto _ : state) benchmark::DoNotOptimize(model.loss(f.batch));
  state.SetItemsProcessed(state.iterations() * f.batch.size());
}
BENCHMARK(BM_ToyLoss)->Unit(benchmark::kMillisecond);

static void BM_ToyTrainStep(benchmark::State& state) {
  const auto& f = fixture();
  toy::ToyBackend model(toy::Vocabulary::from_corpus(f.corpus), toy::ToyConfig{});
  for (auto _ : state) benchmark::DoNotOptimize(model.train_step(f.batch, 1e-3));
  state.SetItemsProcessed(state.iterations() * f.batch.size());
}
BENCHMARK(BM_ToyTrainStep)->Unit(benchmark::kMillisecond);

static void BM_ToyGenerate(benchmark::State& state) {
  const auto& f = fixture();
  const toy::ToyBackend model(toy::Vocabulary::from_corpus(f.corpus), toy::ToyConfig{});
  const auto& input = f.batch.front().input;
  for (auto _ : state) benchmark::DoNotOptimize(model.generate(input, 40));
}
BENCHMARK(BM_ToyGenerate)->Unit(benchmark::kMillisecond);
