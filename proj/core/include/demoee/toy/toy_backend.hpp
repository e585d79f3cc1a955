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

#ifndef DEMOEE_TOY_TOY_BACKEND_HPP_
#define DEMOEE_TOY_TOY_BACKEND_HPP_

#include <cstdint>
#include <memory>
#include <nlohmann/json.hpp>
#include <span>
#include <string>
#include <vector>

#include "demoee/generation.hpp"
#include "demoee/toy/vocabulary.hpp"

namespace demoee::toy {

struct ToyConfig {
  std::size_t layers = 2;
  std::size_t heads = 4;
  std::size_t d_model = 128;
  std::size_t d_ff = 256;
  // Longest encoder input or decoder target, in tokens.
  std::size_t max_positions = 256;
  uint64_t seed = 0;
  // Applied to embeddings and residual branches during training only.
  double dropout = 0.1;
  // Probability of hiding a sentence token from the encoder embedding during
  // training (it stays copyable), so roles are read from the context.
  double word_dropout = 0.0;
  double beta1 = 0.9;
  double beta2 = 0.98;
  double epsilon = 1e-8;
  double clip_norm = 1.0;

  void validate() const;
  nlohmann::json to_json() const;
  static ToyConfig from_json(const nlohmann::json& obj);
};

// Training defaults for the toy backend. A randomly initialized model needs a
// far larger step size than fine-tuning a pretrained one, and converges on
// toy corpora in fewer passes.
TrainingConfig toy_training_defaults();

// Small pre-norm transformer encoder-decoder with a pointer-generator output:
// the next token is a gated mixture of a vocabulary softmax (tied to the input
// embedding) and a copy distribution over sentence and prompt positions, so
// out-of-vocabulary argument words can still be produced. Trained with Adam and
// global-norm clipping; every computation is single-threaded and deterministic.
class ToyBackend : public Seq2SeqBackend {
 public:
  ToyBackend(Vocabulary vocab, ToyConfig config);
  ~ToyBackend() override;
  ToyBackend(ToyBackend&&) noexcept;
  ToyBackend& operator=(ToyBackend&&) noexcept;

  static ToyBackend from_file(const std::string& path);

  std::string name() const override { return "toy"; }
  double train_step(std::span<const TrainingExample> batch, double learning_rate) override;
  std::string generate(const ComposedInput& input, std::size_t max_length) const override;
  std::string parameters_fingerprint() const override;
  void save(const std::string& path) const override;
  void load(const std::string& path) override;

  // Mean per-token negative log-likelihood of the targets (end token
  // included) under teacher forcing; no update.
  double loss(std::span<const TrainingExample> batch) const;
  // p(next | input, prefix) computed step by step on the decoding path.
  // `next` is a target-side token; "<eos>" ends the sequence.
  double next_token_probability(const ComposedInput& input, const std::vector<std::string>& prefix,
                                const std::string& next) const;

  const Vocabulary& vocabulary() const;
  const ToyConfig& config() const;
  std::size_t parameter_count() const;
  std::size_t optimizer_steps() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace demoee::toy

#endif  // DEMOEE_TOY_TOY_BACKEND_HPP_
