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

#include "demoee/demo_builder.hpp"

#include <algorithm>
#include <nlohmann/json.hpp>
#include <ostream>
#include <set>

#include "demoee/errors.hpp"
#include "demoee/record_codec.hpp"
#include "demoee/util.hpp"

namespace demoee {

std::string Demonstration::text() const {
  if (empty()) return "";
  std::string ctx = join_tokens(context_tokens);
  if (ctx.empty()) return annotation_text;
  if (annotation_text.empty()) return ctx;
  return ctx + " " + annotation_text;
}

Demonstration empty_demonstration(const std::string& event_type) {
  return Demonstration{event_type, {}, "", ""};
}

std::string to_string(DemoStrategy strategy) {
  switch (strategy) {
    case DemoStrategy::kRichRole:
      return "rich-role";
    case DemoStrategy::kRichContext:
      return "rich-context";
    case DemoStrategy::kSimilar:
      return "similar";
  }
  return "unknown";
}

DemoStrategy parse_strategy(const std::string& name) {
  std::string n = name;
  std::replace(n.begin(), n.end(), '_', '-');
  if (n == "rich-role" || n == "role") return DemoStrategy::kRichRole;
  if (n == "rich-context" || n == "context") return DemoStrategy::kRichContext;
  if (n == "similar") return DemoStrategy::kSimilar;
  throw ValidationError("unknown demonstration strategy '" + name + "'");
}

namespace {

// Lexicographic argmax over (primary, secondary) keys; first index wins ties.
template <typename Key>
const AnnotatedExample* argmax_bearing(const Corpus& corpus, const std::string& event_type,
                                       Key key) {
  const AnnotatedExample* best = nullptr;
  decltype(key(corpus.examples.front())) best_key{};
  for (const auto& ex : corpus.examples) {
    if (!ex.bears(event_type)) continue;
    auto k = key(ex);
    if (best == nullptr || k > best_key) {
      best = &ex;
      best_key = k;
    }
  }
  return best;
}

}  // namespace

const AnnotatedExample* select_rich_role(const Corpus& corpus, const std::string& event_type) {
  if (corpus.examples.empty()) return nullptr;
  return argmax_bearing(corpus, event_type, [&](const AnnotatedExample& ex) {
    return std::pair{ex.filled_role_count(event_type), ex.tokens.size()};
  });
}

const AnnotatedExample* select_rich_context(const Corpus& corpus, const std::string& event_type) {
  if (corpus.examples.empty()) return nullptr;
  return argmax_bearing(corpus, event_type, [&](const AnnotatedExample& ex) {
    return std::pair{ex.tokens.size(), ex.filled_role_count(event_type)};
  });
}

namespace {

const AnnotatedExample* best_by_cosine(const Corpus& corpus, const std::string& event_type,
                                       const std::vector<float>& query, const std::string& query_id,
                                       const std::vector<std::vector<float>>* cached,
                                       const Embedder& embedder) {
  const AnnotatedExample* best = nullptr;
  double best_sim = 0.0;
  for (std::size_t i = 0; i < corpus.examples.size(); ++i) {
    const auto& ex = corpus.examples[i];
    if (!ex.bears(event_type)) continue;
    if (!query_id.empty() && ex.id == query_id) continue;
    const double sim = cosine_similarity(query, cached ? (*cached)[i] : embedder.embed(ex.tokens));
    if (best == nullptr || sim > best_sim) {
      best = &ex;
      best_sim = sim;
    }
  }
  return best;
}

}  // namespace

const AnnotatedExample* retrieve_similar(const Corpus& corpus, const std::string& event_type,
                                         const std::vector<std::string>& query_tokens,
                                         const Embedder& embedder, const std::string& query_id) {
  return best_by_cosine(corpus, event_type, embedder.embed(query_tokens), query_id, nullptr,
                        embedder);
}

Demonstration build_demonstration(const AnnotatedExample& example, const std::string& event_type,
                                  const EventSchema& schema) {
  auto records = example.records_of(event_type);
  if (records.empty())
    throw ContractError("example '" + example.id + "' has no '" + event_type + "' record");
  return Demonstration{event_type, example.tokens, linearize(event_type, records, schema).text,
                       example.id};
}

namespace {

bool usable_token(const std::string& tok, const SpecialTokens& special) {
  if (tok.empty() || tok == "is" || tok == special.pad_word || tok == special.arg_joiner)
    return false;
  if (tok.find('.') != std::string::npos) return false;
  return true;
}

std::string random_span(const std::vector<std::string>& context, const std::string& avoid,
                        const SpecialTokens& special, Rng& rng) {
  const std::size_t n = context.size();
  if (n == 0) return avoid;
  for (int tries = 0; tries < 64; ++tries) {
    const std::size_t len = std::min<std::size_t>(1 + uniform_index(rng, 3), n);
    const std::size_t start = uniform_index(rng, n - len + 1);
    bool ok = true;
    for (std::size_t i = start; i < start + len; ++i) ok = ok && usable_token(context[i], special);
    if (!ok) continue;
    std::string span = join_tokens(context, start, start + len);
    if (span != avoid) return span;
  }
  for (const auto& tok : context)
    if (usable_token(tok, special) && tok != avoid) return tok;
  return avoid;
}

std::string perturb_annotation(const Demonstration& demo, const SpecialTokens& special, Rng& rng) {
  const std::string joiner = " " + special.arg_joiner + " ";
  auto clauses = split_on(demo.annotation_text, ". ");
  for (std::size_t c = 0; c < clauses.size(); ++c) {
    std::string cl = clauses[c];
    const bool last = c + 1 == clauses.size();
    bool trailing_dot = last && !cl.empty() && cl.back() == '.';
    if (trailing_dot) cl.pop_back();
    const auto is_pos = cl.find(" is ");
    if (is_pos != std::string::npos) {
      const std::string head = cl.substr(0, is_pos);
      const std::string value = cl.substr(is_pos + 4);
      if (value != special.pad_word) {
        std::string replaced;
        for (const auto& v : split_on(value, joiner)) {
          if (!replaced.empty()) replaced += joiner;
          replaced += random_span(demo.context_tokens, v, special, rng);
        }
        cl = head + " is " + replaced;
      }
    }
    if (trailing_dot) cl += '.';
    clauses[c] = cl;
  }
  std::string out;
  for (std::size_t c = 0; c < clauses.size(); ++c) {
    if (c > 0) out += ". ";
    out += clauses[c];
  }
  return out;
}

std::vector<std::size_t> pick_positions(std::size_t n, double fraction, Rng& rng) {
  if (fraction < 0.0 || fraction > 1.0) throw ContractError("fraction must be in [0, 1]");
  return sample_without_replacement(rng, n, fraction_count(fraction, n));
}

}  // namespace

std::vector<Demonstration> perturb_demonstrations(std::vector<Demonstration> demos, double fraction,
                                                  uint64_t seed, const SpecialTokens& special) {
  Rng rng = make_rng(seed, "robustness/perturb");
  auto picks = pick_positions(demos.size(), fraction, rng);
  std::sort(picks.begin(), picks.end());
  for (auto i : picks)
    if (!demos[i].empty()) demos[i].annotation_text = perturb_annotation(demos[i], special, rng);
  return demos;
}

std::vector<Demonstration> drop_demonstrations(std::vector<Demonstration> demos, double fraction,
                                               uint64_t seed) {
  Rng rng = make_rng(seed, "robustness/drop");
  for (auto i : pick_positions(demos.size(), fraction, rng))
    demos[i] = empty_demonstration(demos[i].event_type);
  return demos;
}

DemoSelector::DemoSelector(const Corpus& pool, DemoStrategy strategy, const Embedder* embedder)
    : pool_(pool), strategy_(strategy), embedder_(embedder) {
  if (strategy_ == DemoStrategy::kSimilar) {
    if (embedder_ == nullptr) throw ContractError("similar retrieval needs an embedder");
    pool_embeddings_.reserve(pool_.examples.size());
    for (const auto& ex : pool_.examples) pool_embeddings_.push_back(embedder_->embed(ex.tokens));
    return;
  }
  for (const auto& t : pool_.schema.event_types()) {
    const AnnotatedExample* ex = strategy_ == DemoStrategy::kRichRole
                                     ? select_rich_role(pool_, t.name)
                                     : select_rich_context(pool_, t.name);
    fixed_[t.name] =
        ex ? build_demonstration(*ex, t.name, pool_.schema) : empty_demonstration(t.name);
  }
}

Demonstration DemoSelector::demo_for(const std::string& event_type,
                                     const std::vector<std::string>& query_tokens,
                                     const std::string& query_id) const {
  if (strategy_ != DemoStrategy::kSimilar) {
    auto it = fixed_.find(event_type);
    return it == fixed_.end() ? empty_demonstration(event_type) : it->second;
  }
  const AnnotatedExample* ex = best_by_cosine(pool_, event_type, embedder_->embed(query_tokens),
                                              query_id, &pool_embeddings_, *embedder_);
  return ex ? build_demonstration(*ex, event_type, pool_.schema) : empty_demonstration(event_type);
}

void write_demonstrations_jsonl(const std::vector<Demonstration>& demos, std::ostream& out) {
  for (const auto& d : demos)
    out << nlohmann::json{{"event_type", d.event_type},
                          {"source_id", d.source_id},
                          {"text", d.text()}}
               .dump()
        << "\n";
}

}  // namespace demoee
