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

#ifndef DEMOEE_EVALUATION_HPP_
#define DEMOEE_EVALUATION_HPP_

#include <cstddef>
#include <map>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "demoee/corpus.hpp"

namespace demoee {

struct PRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Precision and recall are 0 when their denominator is 0.
PRF make_prf(std::size_t correct, std::size_t gold, std::size_t predicted);

struct ScoreCounts {
  std::size_t gold_trig = 0, pred_trig = 0, correct_trig = 0;
  std::size_t gold_arg = 0, pred_arg = 0, correct_arg = 0;

  ScoreCounts& operator+=(const ScoreCounts& other);
  bool operator==(const ScoreCounts&) const = default;
};

struct ScoreReport {
  PRF trig_c;
  PRF arg_c;
  ScoreCounts counts;
  std::map<std::string, ScoreCounts> per_type;

  nlohmann::json to_json() const;
  // event_type,gold_trig,pred_trig,correct_trig,trig_f1,gold_arg,pred_arg,correct_arg,arg_f1
  std::string per_type_csv() const;
};

// Predicted records keyed by example id.
using Predictions = std::map<std::string, std::vector<EventRecord>>;

// Trig-C: (event type, trigger offsets) must match. Arg-C: (event type, role,
// argument offsets) must match. Each gold mention is credited at most once.
ScoreReport score(const Corpus& gold, const Predictions& predictions);

}  // namespace demoee

#endif  // DEMOEE_EVALUATION_HPP_
