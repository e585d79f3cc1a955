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

#include "demoee/corpus.hpp"
#include "demoee/record_codec.hpp"

using namespace demoee;

namespace {

const EventSchema& schema() {
  static const EventSchema s = load_schema(DEMOEE_DATA_DIR "/schemas/toy5.json");
  return s;
}

const Corpus& corpus() {
  static const Corpus c = generate_synthetic(schema(), 256, 1);
  return c;
}

}  // namespace

static void BM_Linearize(benchmark::State& state) {
  const auto& c = corpus();
  for (auto _ : state)
    for (const auto& ex : c.examples)
      for (const auto& t : schema().event_types())
        benchmark::DoNotOptimize(linearize(t.name, ex.records_of(t.name), schema()));
  state.SetItemsProcessed(state.iterations() * c.size() * schema().size());
}
BENCHMARK(BM_Linearize);

static void BM_ParseAndResolve(benchmark::State& state) {
  const auto& c = corpus();
  std::vector<std::tuple<std::string, std::string, const AnnotatedExample*>> texts;
  for (const auto& ex : c.examples)
    for (const auto& t : schema().event_types())
      texts.emplace_back(linearize(t.name, ex.records_of(t.name), schema()).text, t.name, &ex);
  for (auto _ : state)
    for (const auto& [text, type, ex] : texts)
      benchmark::DoNotOptimize(
          resolve_offsets(parse_records(text, type, schema()), ex->tokens, type));
  state.SetItemsProcessed(state.iterations() * texts.size());
}
BENCHMARK(BM_ParseAndResolve);
