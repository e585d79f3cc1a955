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

#ifndef DEMOEE_DEMO_BUILDER_HPP_
#define DEMOEE_DEMO_BUILDER_HPP_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "demoee/corpus.hpp"
#include "demoee/embedder.hpp"
#include "demoee/schema.hpp"

namespace demoee {

// A solved example for one event type: the sentence (context) followed by the
// linearized records of that type (annotation).
struct Demonstration {
  std::string event_type;
  std::vector<std::string> context_tokens;
  std::string annotation_text;
  std::string source_id;

  bool empty() const { return context_tokens.empty() && annotation_text.empty(); }
  // context + " " + annotation; "" for the empty demonstration.
  std::string text() const;

  bool operator==(const Demonstration&) const = default;
};

Demonstration empty_demonstration(const std::string& event_type);

enum class DemoStrategy { kRichRole, kRichContext, kSimilar };

std::string to_string(DemoStrategy strategy);
// Accepts "rich-role", "rich_role", "role", and the analogous spellings.
DemoStrategy parse_strategy(const std::string& name);

// Most distinct filled roles; ties by longer sentence, then corpus order.
const AnnotatedExample* select_rich_role(const Corpus& corpus, const std::string& event_type);
// Longest sentence; ties by more filled roles, then corpus order.
const AnnotatedExample* select_rich_context(const Corpus& corpus, const std::string& event_type);
// Highest cosine similarity to the query; ties by corpus order. A candidate
// whose id equals `query_id` is never returned.
const AnnotatedExample* retrieve_similar(const Corpus& corpus, const std::string& event_type,
                                         const std::vector<std::string>& query_tokens,
                                         const Embedder& embedder,
                                         const std::string& query_id = "");

// Throws ContractError when the example has no record of `event_type`.
Demonstration build_demonstration(const AnnotatedExample& example, const std::string& event_type,
                                  const EventSchema& schema);

// Replaces every trigger and argument string of round(fraction * N) demos by a
// random 1-3 token span of the demo's own context.
std::vector<Demonstration> perturb_demonstrations(std::vector<Demonstration> demos, double fraction,
                                                  uint64_t seed, const SpecialTokens& special = {});
// Replaces round(fraction * N) demos by the empty demonstration.
std::vector<Demonstration> drop_demonstrations(std::vector<Demonstration> demos, double fraction,
                                               uint64_t seed);

// Picks demonstrations from a pool corpus. Rich-role and rich-context choices
// are computed once per type; similar retrieval runs per query against
// embeddings cached at construction. Types without a bearing example get the
// empty demonstration. Read-only after construction.
class DemoSelector {
 public:
  DemoSelector(const Corpus& pool, DemoStrategy strategy, const Embedder* embedder = nullptr);

  Demonstration demo_for(const std::string& event_type,
                         const std::vector<std::string>& query_tokens = {},
                         const std::string& query_id = "") const;

  DemoStrategy strategy() const { return strategy_; }
  const Corpus& pool() const { return pool_; }

 private:
  const Corpus& pool_;
  DemoStrategy strategy_;
  const Embedder* embedder_;
  std::map<std::string, Demonstration> fixed_;
  std::vector<std::vector<float>> pool_embeddings_;
};

// {"event_type":..., "source_id":..., "text":...} per line.
void write_demonstrations_jsonl(const std::vector<Demonstration>& demos, std::ostream& out);

}  // namespace demoee

#endif  // DEMOEE_DEMO_BUILDER_HPP_
