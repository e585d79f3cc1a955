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
#include "demoee/evaluation.hpp"

using namespace demoee;

static void BM_Score(benchmark::State& state) {
  const auto s = load_schema(DEMOEE_DATA_DIR "/schemas/ace05.json");
  const auto gold = generate_synthetic(s, static_cast<std::size_t>(state.range(0)), 2);
  const auto other = generate_synthetic(s, gold.size(), 3);
  // Half the sentences predicted perfectly, half with another sentence's records.
  Predictions pred;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const auto& ex = gold.examples[i];
    if (i % 2 == 0) {
      pred[ex.id] = ex.records;
      continue;
    }
    std::vector<EventRecord> noisy;
    for (auto r : other.examples[i].records)
      if (r.trigger.end <= ex.tokens.size()) noisy.push_back(std::move(r));
    pred[ex.id] = noisy;
  }
  for (auto _ : state) benchmark::DoNotOptimize(score(gold, pred));
  state.SetItemsProcessed(state.iterations() * gold.size());
}
BENCHMARK(BM_Score)->Arg(100)->Arg(1000)->Arg(10000);
