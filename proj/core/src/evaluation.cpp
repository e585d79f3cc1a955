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

#include "demoee/evaluation.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <tuple>

#include "demoee/errors.hpp"

namespace demoee {

PRF make_prf(std::size_t correct, std::size_t gold, std::size_t predicted) {
  PRF r;
  r.precision = predicted ? static_cast<double>(correct) / static_cast<double>(predicted) : 0.0;
  r.recall = gold ? static_cast<double>(correct) / static_cast<double>(gold) : 0.0;
  r.f1 = (r.precision + r.recall) > 0.0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
                                        : 0.0;
  return r;
}

ScoreCounts& ScoreCounts::operator+=(const ScoreCounts& o) {
  gold_trig += o.gold_trig;
  pred_trig += o.pred_trig;
  correct_trig += o.correct_trig;
  gold_arg += o.gold_arg;
  pred_arg += o.pred_arg;
  correct_arg += o.correct_arg;
  return *this;
}

namespace {

using TrigKey = std::tuple<std::string, std::size_t, std::size_t>;
using ArgKey = std::tuple<std::string, std::string, std::size_t, std::size_t>;

// Matches sorted mention lists one-to-one; returns matches per event type.
template <typename Key>
std::map<std::string, std::size_t> matched(std::vector<Key> gold, std::vector<Key> pred) {
  std::sort(gold.begin(), gold.end());
  std::sort(pred.begin(), pred.end());
  std::map<std::string, std::size_t> hits;
  std::size_t g = 0, p = 0;
  while (g < gold.size() && p < pred.size()) {
    if (gold[g] < pred[p]) {
      ++g;
    } else if (pred[p] < gold[g]) {
      ++p;
    } else {
      ++hits[std::get<0>(gold[g])];
      ++g;
      ++p;
    }
  }
  return hits;
}

void collect(const std::vector<EventRecord>& records, std::vector<TrigKey>& trigs,
             std::vector<ArgKey>& args) {
  for (const auto& r : records) {
    trigs.emplace_back(r.event_type, r.trigger.start, r.trigger.end);
    for (const auto& a : r.arguments)
      args.emplace_back(r.event_type, a.role, a.span.start, a.span.end);
  }
}

}  // namespace

ScoreReport score(const Corpus& gold, const Predictions& predictions) {
  std::set<std::string> ids;
  for (const auto& ex : gold.examples) ids.insert(ex.id);
  for (const auto& [id, _] : predictions)
    if (!ids.count(id)) throw ValidationError("prediction for unknown example id '" + id + "'");

  ScoreReport report;
  for (const auto& t : gold.schema.event_types()) report.per_type[t.name];

  static const std::vector<EventRecord> kNone;
  for (const auto& ex : gold.examples) {
    auto it = predictions.find(ex.id);
    const auto& pred = it == predictions.end() ? kNone : it->second;

    std::vector<TrigKey> gt, pt;
    std::vector<ArgKey> ga, pa;
    collect(ex.records, gt, ga);
    collect(pred, pt, pa);
    for (const auto& k : gt) ++report.per_type[std::get<0>(k)].gold_trig;
    for (const auto& k : pt) ++report.per_type[std::get<0>(k)].pred_trig;
    for (const auto& k : ga) ++report.per_type[std::get<0>(k)].gold_arg;
    for (const auto& k : pa) ++report.per_type[std::get<0>(k)].pred_arg;
    for (const auto& [type, n] : matched(gt, pt)) report.per_type[type].correct_trig += n;
    for (const auto& [type, n] : matched(ga, pa)) report.per_type[type].correct_arg += n;
  }
  for (const auto& [_, c] : report.per_type) report.counts += c;
  const auto& c = report.counts;
  report.trig_c = make_prf(c.correct_trig, c.gold_trig, c.pred_trig);
  report.arg_c = make_prf(c.correct_arg, c.gold_arg, c.pred_arg);
  return report;
}

namespace {

nlohmann::json prf_json(const PRF& p) {
  return {{"precision", p.precision}, {"recall", p.recall}, {"f1", p.f1}};
}

}  // namespace

nlohmann::json ScoreReport::to_json() const {
  return {{"trig_c", prf_json(trig_c)},
          {"arg_c", prf_json(arg_c)},
          {"counts",
           {{"gold_trig", counts.gold_trig},
            {"pred_trig", counts.pred_trig},
            {"correct_trig", counts.correct_trig},
            {"gold_arg", counts.gold_arg},
            {"pred_arg", counts.pred_arg},
            {"correct_arg", counts.correct_arg}}}};
}

std::string ScoreReport::per_type_csv() const {
  std::ostringstream out;
  out << "event_type,gold_trig,pred_trig,correct_trig,trig_f1,gold_arg,pred_arg,correct_arg,"
         "arg_f1\n";
  for (const auto& [type, c] : per_type) {
    out << type << "," << c.gold_trig << "," << c.pred_trig << "," << c.correct_trig << ","
        << make_prf(c.correct_trig, c.gold_trig, c.pred_trig).f1 << "," << c.gold_arg << ","
        << c.pred_arg << "," << c.correct_arg << ","
        << make_prf(c.correct_arg, c.gold_arg, c.pred_arg).f1 << "\n";
  }
  return out.str();
}

}  // namespace demoee
