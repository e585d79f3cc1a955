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

#ifndef DEMOEE_ADAPTER_BACKEND_HPP_
#define DEMOEE_ADAPTER_BACKEND_HPP_

#include <memory>
#include <mutex>
#include <string>

#include "demoee/generation.hpp"

namespace demoee {

// Token spellings the external model uses for the mask and separator.
struct TokenMapping {
  std::string mask_token = "<Mask>";
  std::string sep_token = "<SEP>";
};

// Drives an external sequence-to-sequence model through a child process that
// reads one JSON request per line on stdin and answers one JSON line on stdout:
//
//   {"op":"generate","input":TEXT,"max_length":N}        -> {"output":TEXT}
//   {"op":"train_step","batch":[{"input","target"}],"learning_rate":LR}
//                                                         -> {"loss":X}
//   {"op":"fingerprint"}                                  -> {"fingerprint":S}
//   {"op":"save","path":P} / {"op":"load","path":P}       -> {"ok":true}
//
// An {"error":MSG} answer raises Error. Requests are serialized.
class AdapterBackend : public Seq2SeqBackend {
 public:
  AdapterBackend(const std::string& executable, SpecialTokens special, TokenMapping mapping = {});
  ~AdapterBackend() override;

  std::string name() const override { return "adapter"; }
  double train_step(std::span<const TrainingExample> batch, double learning_rate) override;
  std::string generate(const ComposedInput& input, std::size_t max_length) const override;
  std::string parameters_fingerprint() const override;
  void save(const std::string& path) const override;
  void load(const std::string& path) override;

 private:
  nlohmann::json call(const nlohmann::json& request) const;
  std::string to_external(std::string text) const;
  std::string from_external(std::string text) const;

  std::string executable_;
  SpecialTokens special_;
  TokenMapping mapping_;
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  mutable std::string buffer_;
  mutable std::mutex mutex_;
};

}  // namespace demoee

#endif  // DEMOEE_ADAPTER_BACKEND_HPP_
