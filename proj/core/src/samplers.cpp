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

#include <algorithm>
#include <cmath>
#include <set>

#include "demoee/corpus.hpp"
#include "demoee/errors.hpp"
#include "demoee/util.hpp"

namespace demoee {

namespace {

Corpus subset(const Corpus& corpus, std::vector<std::size_t> indices) {
  std::sort(indices.begin(), indices.end());
  indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
  Corpus out{corpus.schema, {}};
  out.examples.reserve(indices.size());
  for (auto i : indices) out.examples.push_back(corpus.examples[i]);
  return out;
}

}  // namespace

// Types are visited from rarest to most frequent. A sentence already picked
// for an earlier type counts toward the quota of every type it carries, so
// only the shortfall is sampled from the not-yet-selected bearing sentences.
SampleResult sample_k_shot(const Corpus& corpus, std::size_t k, uint64_t seed) {
  if (k == 0) throw ContractError("k-shot sampling needs k >= 1");
  Rng rng = make_rng(seed, "sampler/kshot");
  const auto& types = corpus.schema.event_types();

  std::vector<std::vector<std::size_t>> support(types.size());
  for (std::size_t t = 0; t < types.size(); ++t) support[t] = corpus.bearing(types[t].name);

  std::vector<std::size_t> order(types.size());
  for (std::size_t t = 0; t < order.size(); ++t) order[t] = t;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return support[a].size() < support[b].size();
  });

  SampleResult result;
  std::set<std::size_t> chosen;
  for (std::size_t t : order) {
    const auto& pool = support[t];
    if (pool.empty()) {
      result.warnings.push_back("event type '" + types[t].name + "' has no examples");
      continue;
    }
    std::size_t have = 0;
    std::vector<std::size_t> fresh;
    for (auto i : pool) {
      if (chosen.count(i))
        ++have;
      else
        fresh.push_back(i);
    }
    if (have >= k) continue;
    for (auto pick : sample_without_replacement(rng, fresh.size(), k - have))
      chosen.insert(fresh[pick]);
  }
  result.corpus = subset(corpus, {chosen.begin(), chosen.end()});
  return result;
}

SampleResult sample_ratio(const Corpus& corpus, double ratio, uint64_t seed,
                          RatioPopulation population) {
  if (!(ratio > 0.0) || ratio > 1.0) throw ContractError("ratio must be in (0, 1]");
  Rng rng = make_rng(seed, "sampler/ratio");
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < corpus.examples.size(); ++i)
    if (population == RatioPopulation::kFullSet || !corpus.examples[i].records.empty())
      pool.push_back(i);
  const auto n =
      static_cast<std::size_t>(std::ceil(ratio * static_cast<double>(pool.size()) - 1e-9));
  std::vector<std::size_t> picked;
  for (auto j : sample_without_replacement(rng, pool.size(), n)) picked.push_back(pool[j]);

  SampleResult result;
  result.corpus = subset(corpus, std::move(picked));
  for (const auto& t : corpus.schema.event_types())
    if (result.corpus.bearing(t.name).empty())
      result.warnings.push_back("event type '" + t.name + "' has no examples in the sample");
  return result;
}

std::vector<std::pair<std::string, std::size_t>> event_type_frequencies(const Corpus& corpus) {
  std::vector<std::pair<std::string, std::size_t>> freq;
  for (const auto& t : corpus.schema.event_types()) freq.emplace_back(t.name, 0);
  for (const auto& ex : corpus.examples)
    for (const auto& r : ex.records) {
      auto i = corpus.schema.index_of(r.event_type);
      if (i) ++freq[*i].second;
    }
  return freq;
}

namespace {

void split_side(const Corpus& side, double train_frac, Rng& rng, Corpus& train, Corpus& eval) {
  std::vector<std::size_t> idx(side.examples.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  shuffle(idx, rng);
  const std::size_t n_train = fraction_count(train_frac, idx.size());
  train = subset(side, {idx.begin(), idx.begin() + static_cast<long>(n_train)});
  eval = subset(side, {idx.begin() + static_cast<long>(n_train), idx.end()});
}

}  // namespace

DomainSplit build_domain_split(const Corpus& corpus, std::size_t top_n, double train_frac,
                               uint64_t seed) {
  if (top_n == 0 || top_n >= corpus.schema.size())
    throw ContractError("top_n must be in [1, number of event types)");
  if (!(train_frac > 0.0 && train_frac < 1.0)) throw ContractError("train_frac must be in (0, 1)");

  auto freq = event_type_frequencies(corpus);
  // stable_sort keeps schema order among equal frequencies.
  std::vector<std::size_t> order(freq.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return freq[a].second > freq[b].second; });

  std::vector<std::string> src_names, tgt_names;
  for (std::size_t r = 0; r < order.size(); ++r)
    (r < top_n ? src_names : tgt_names).push_back(freq[order[r]].first);

  DomainSplit split;
  split.src_schema = corpus.schema.restricted_to(src_names);
  split.tgt_schema = corpus.schema.restricted_to(tgt_names);

  Rng src_rng = make_rng(seed, "sampler/domain/src");
  Rng tgt_rng = make_rng(seed, "sampler/domain/tgt");
  split_side(filter_to_schema(corpus, split.src_schema, true), train_frac, src_rng, split.src_train,
             split.src_eval);
  split_side(filter_to_schema(corpus, split.tgt_schema, true), train_frac, tgt_rng, split.tgt_train,
             split.tgt_eval);
  return split;
}

}  // namespace demoee
