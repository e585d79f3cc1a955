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

#ifndef DEMOEE_TOY_AUTOGRAD_HPP_
#define DEMOEE_TOY_AUTOGRAD_HPP_

#include <Eigen/Core>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

namespace demoee::toy {

using Mat = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// A parameter as seen by one forward pass: its value, and where to add its
// gradient (nullptr when not recording).
struct ParamRef {
  const Mat* value = nullptr;
  Mat* grad = nullptr;
};

// Row ranges of the sequences stacked in a batch. Query sequence i occupies
// rows [q_begin[i], q_begin[i] + q_len[i]) and attends to key rows
// [k_begin[i], k_begin[i] + k_len[i]).
struct SeqLayout {
  std::vector<std::size_t> q_begin, q_len, k_begin, k_len;
  std::size_t size() const { return q_begin.size(); }
};

// Pointer-generator targets for a stacked decoder batch. Decoder row t of
// sequence i scores target[t]; ids >= vocab size are source words outside the
// vocabulary. For encoder row j, source_id[j] is its extended id and
// copyable[j] whether it may be copied.
struct CopyTargets {
  std::vector<int> target;
  std::vector<int> source_id;
  std::vector<uint8_t> copyable;
};

// Reverse-mode tape over row-major float matrices. Ops are recorded only when
// the tape was built with record = true; otherwise it is a plain forward
// evaluator.
class Tape {
 public:
  using Var = std::size_t;

  explicit Tape(bool record) : record_(record) {}

  bool recording() const { return record_; }
  const Mat& value(Var v) const { return nodes_[v].value; }
  std::size_t size() const { return nodes_.size(); }

  Var constant(Mat value);
  // Rows of `table` selected by `ids`.
  Var gather(ParamRef table, const std::vector<int>& ids);
  Var add(Var a, Var b);
  // x W + b, with W of shape (in, out) and b of shape (1, out).
  Var linear(Var x, ParamRef w, ParamRef b);
  Var layer_norm(Var x, ParamRef gain, ParamRef bias, float eps = 1e-5f);
  Var relu(Var x);
  // Inverted dropout with a caller-supplied keep mask (1 keeps, 0 drops).
  Var dropout(Var x, const Mat& keep, float rate);
  // Multi-head scaled dot-product attention over pre-projected q, k, v.
  Var attention(Var q, Var k, Var v, const SeqLayout& layout, std::size_t heads, bool causal);
  // h E^T for an embedding table E.
  Var tied_logits(Var h, ParamRef table);
  // Mean negative log-likelihood of a pointer-generator mixture. `hc` are the
  // decoder copy queries, `enc` the encoder states, `gate` the (rows, 1)
  // generation-gate logits. Returns a (1, 1) node.
  Var pointer_nll(Var logits, Var gate, Var hc, Var enc, const SeqLayout& layout,
                  const CopyTargets& targets);

  // Seeds d(root) = 1 and runs every recorded backward step in reverse.
  void backward(Var root);

 private:
  struct Node {
    Mat value;
    Mat grad;
    std::function<void()> back;
  };

  Var push(Mat value);
  Mat& grad_of(Var v);

  bool record_;
  std::vector<Node> nodes_;
};

}  // namespace demoee::toy

#endif  // DEMOEE_TOY_AUTOGRAD_HPP_
