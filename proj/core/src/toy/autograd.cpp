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

#include "demoee/toy/autograd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "demoee/errors.hpp"

namespace demoee::toy {

namespace {

void softmax_rows(Mat& s) {
  for (Eigen::Index r = 0; r < s.rows(); ++r) {
    auto row = s.row(r);
    const float mx = row.maxCoeff();
    row = (row.array() - mx).exp();
    row /= row.sum();
  }
}

}  // namespace

Tape::Var Tape::push(Mat value) {
  nodes_.push_back({std::move(value), Mat(), nullptr});
  return nodes_.size() - 1;
}

Mat& Tape::grad_of(Var v) {
  Node& n = nodes_[v];
  if (n.grad.size() == 0) n.grad = Mat::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

Tape::Var Tape::constant(Mat value) { return push(std::move(value)); }

Tape::Var Tape::gather(ParamRef table, const std::vector<int>& ids) {
  Mat out(static_cast<Eigen::Index>(ids.size()), table.value->cols());
  for (std::size_t i = 0; i < ids.size(); ++i) out.row(i) = table.value->row(ids[i]);
  Var o = push(std::move(out));
  if (record_ && table.grad) {
    nodes_[o].back = [this, o, table, ids] {
      const Mat& g = nodes_[o].grad;
      for (std::size_t i = 0; i < ids.size(); ++i) table.grad->row(ids[i]) += g.row(i);
    };
  }
  return o;
}

Tape::Var Tape::add(Var a, Var b) {
  Var o = push(nodes_[a].value + nodes_[b].value);
  if (record_) {
    nodes_[o].back = [this, o, a, b] {
      grad_of(a) += nodes_[o].grad;
      grad_of(b) += nodes_[o].grad;
    };
  }
  return o;
}

Tape::Var Tape::linear(Var x, ParamRef w, ParamRef b) {
  Mat out = nodes_[x].value * *w.value;
  out.rowwise() += b.value->row(0);
  Var o = push(std::move(out));
  if (record_) {
    nodes_[o].back = [this, o, x, w, b] {
      const Mat& g = nodes_[o].grad;
      if (w.grad) w.grad->noalias() += nodes_[x].value.transpose() * g;
      if (b.grad) *b.grad += g.colwise().sum();
      grad_of(x).noalias() += g * w.value->transpose();
    };
  }
  return o;
}

Tape::Var Tape::layer_norm(Var x, ParamRef gain, ParamRef bias, float eps) {
  const Mat& in = nodes_[x].value;
  const Eigen::Index n = in.rows(), d = in.cols();
  Mat xhat(n, d);
  Eigen::VectorXf inv_std(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const float mean = in.row(r).mean();
    const float var = (in.row(r).array() - mean).square().mean();
    inv_std(r) = 1.0f / std::sqrt(var + eps);
    xhat.row(r) = (in.row(r).array() - mean) * inv_std(r);
  }
  Mat out = xhat.array().rowwise() * gain.value->row(0).array();
  out.rowwise() += bias.value->row(0);
  Var o = push(std::move(out));
  if (record_) {
    auto saved = std::make_shared<std::pair<Mat, Eigen::VectorXf>>(std::move(xhat), inv_std);
    nodes_[o].back = [this, o, x, gain, bias, saved] {
      const Mat& g = nodes_[o].grad;
      const Mat& xh = saved->first;
      if (gain.grad) *gain.grad += (g.array() * xh.array()).colwise().sum().matrix();
      if (bias.grad) *bias.grad += g.colwise().sum();
      Mat dxh = g.array().rowwise() * gain.value->row(0).array();
      Mat& dx = grad_of(x);
      const float inv_d = 1.0f / static_cast<float>(xh.cols());
      for (Eigen::Index r = 0; r < xh.rows(); ++r) {
        const float m1 = dxh.row(r).sum() * inv_d;
        const float m2 = dxh.row(r).dot(xh.row(r)) * inv_d;
        dx.row(r).array() += saved->second(r) * (dxh.row(r).array() - m1 - xh.row(r).array() * m2);
      }
    };
  }
  return o;
}

Tape::Var Tape::relu(Var x) {
  Var o = push(nodes_[x].value.cwiseMax(0.0f));
  if (record_) {
    nodes_[o].back = [this, o, x] {
      grad_of(x).array() += (nodes_[x].value.array() > 0.0f).cast<float>() * nodes_[o].grad.array();
    };
  }
  return o;
}

Tape::Var Tape::dropout(Var x, const Mat& keep, float rate) {
  const float scale = 1.0f / (1.0f - rate);
  Mat mask = keep * scale;
  Var o = push(nodes_[x].value.cwiseProduct(mask));
  if (record_) {
    nodes_[o].back = [this, o, x, mask = std::move(mask)] {
      grad_of(x) += nodes_[o].grad.cwiseProduct(mask);
    };
  }
  return o;
}

Tape::Var Tape::attention(Var q, Var k, Var v, const SeqLayout& layout, std::size_t heads,
                          bool causal) {
  const Mat& Q = nodes_[q].value;
  const Mat& K = nodes_[k].value;
  const Mat& V = nodes_[v].value;
  const Eigen::Index d = Q.cols();
  if (d % static_cast<Eigen::Index>(heads) != 0) throw ContractError("heads must divide width");
  const Eigen::Index dh = d / static_cast<Eigen::Index>(heads);
  const float scale = 1.0f / std::sqrt(static_cast<float>(dh));

  Mat out = Mat::Zero(Q.rows(), d);
  auto probs = std::make_shared<std::vector<Mat>>();
  probs->reserve(layout.size() * heads);
  for (std::size_t i = 0; i < layout.size(); ++i) {
    const auto qb = static_cast<Eigen::Index>(layout.q_begin[i]);
    const auto nq = static_cast<Eigen::Index>(layout.q_len[i]);
    const auto kb = static_cast<Eigen::Index>(layout.k_begin[i]);
    const auto nk = static_cast<Eigen::Index>(layout.k_len[i]);
    for (std::size_t h = 0; h < heads; ++h) {
      const Eigen::Index c = static_cast<Eigen::Index>(h) * dh;
      Mat s = (Q.block(qb, c, nq, dh) * K.block(kb, c, nk, dh).transpose()) * scale;
      if (causal)
        for (Eigen::Index r = 0; r < nq; ++r)
          for (Eigen::Index j = r + 1; j < nk; ++j)
            s(r, j) = -std::numeric_limits<float>::infinity();
      softmax_rows(s);
      out.block(qb, c, nq, dh).noalias() = s * V.block(kb, c, nk, dh);
      if (record_) probs->push_back(std::move(s));
    }
  }
  Var o = push(std::move(out));
  if (record_) {
    nodes_[o].back = [this, o, q, k, v, layout, heads, dh, scale, probs] {
      const Mat& g = nodes_[o].grad;
      Mat& dQ = grad_of(q);
      Mat& dK = grad_of(k);
      Mat& dV = grad_of(v);
      const Mat& Q = nodes_[q].value;
      const Mat& K = nodes_[k].value;
      const Mat& V = nodes_[v].value;
      std::size_t p = 0;
      for (std::size_t i = 0; i < layout.size(); ++i) {
        const auto qb = static_cast<Eigen::Index>(layout.q_begin[i]);
        const auto nq = static_cast<Eigen::Index>(layout.q_len[i]);
        const auto kb = static_cast<Eigen::Index>(layout.k_begin[i]);
        const auto nk = static_cast<Eigen::Index>(layout.k_len[i]);
        for (std::size_t h = 0; h < heads; ++h, ++p) {
          const Eigen::Index c = static_cast<Eigen::Index>(h) * dh;
          const Mat& A = (*probs)[p];
          const auto dO = g.block(qb, c, nq, dh);
          dV.block(kb, c, nk, dh).noalias() += A.transpose() * dO;
          Mat dA = dO * V.block(kb, c, nk, dh).transpose();
          Eigen::VectorXf rs = (dA.array() * A.array()).rowwise().sum();
          Mat dS = A.array() * (dA.array().colwise() - rs.array());
          dQ.block(qb, c, nq, dh).noalias() += (dS * K.block(kb, c, nk, dh)) * scale;
          dK.block(kb, c, nk, dh).noalias() += (dS.transpose() * Q.block(qb, c, nq, dh)) * scale;
        }
      }
    };
  }
  return o;
}

Tape::Var Tape::tied_logits(Var h, ParamRef table) {
  Var o = push(nodes_[h].value * table.value->transpose());
  if (record_) {
    nodes_[o].back = [this, o, h, table] {
      const Mat& g = nodes_[o].grad;
      if (table.grad) table.grad->noalias() += g.transpose() * nodes_[h].value;
      grad_of(h).noalias() += g * *table.value;
    };
  }
  return o;
}

Tape::Var Tape::pointer_nll(Var logits, Var gate, Var hc, Var enc, const SeqLayout& layout,
                            const CopyTargets& targets) {
  const Mat& L = nodes_[logits].value;
  const Mat& G = nodes_[gate].value;
  const Mat& H = nodes_[hc].value;
  const Mat& E = nodes_[enc].value;
  const Eigen::Index vocab = L.cols();
  const Eigen::Index total = L.rows();
  const float scale = 1.0f / std::sqrt(static_cast<float>(H.cols()));
  const double inv_t = 1.0 / static_cast<double>(std::max<Eigen::Index>(total, 1));

  struct Saved {
    Mat pv;               // vocabulary distribution per decoder row
    std::vector<Mat> pc;  // copy distribution per sequence (rows: dec, cols: enc)
    Eigen::VectorXf g;    // gate probability per decoder row
    Eigen::VectorXd p;    // mixture probability of the target
    Eigen::VectorXf c;    // copy mass on the target
  };
  auto s = std::make_shared<Saved>();
  s->pv = L;
  softmax_rows(s->pv);
  s->g = (1.0f / (1.0f + (-G.col(0).array()).exp())).matrix();
  s->p.resize(total);
  s->c.resize(total);

  double loss = 0.0;
  for (std::size_t i = 0; i < layout.size(); ++i) {
    const auto qb = static_cast<Eigen::Index>(layout.q_begin[i]);
    const auto nq = static_cast<Eigen::Index>(layout.q_len[i]);
    const auto kb = static_cast<Eigen::Index>(layout.k_begin[i]);
    const auto nk = static_cast<Eigen::Index>(layout.k_len[i]);
    Mat sc = (H.block(qb, 0, nq, H.cols()) * E.block(kb, 0, nk, E.cols()).transpose()) * scale;
    for (Eigen::Index j = 0; j < nk; ++j)
      if (!targets.copyable[kb + j]) sc.col(j).setConstant(-std::numeric_limits<float>::infinity());
    bool any = false;
    for (Eigen::Index j = 0; j < nk && !any; ++j) any = targets.copyable[kb + j] != 0;
    if (any) {
      softmax_rows(sc);
    } else {
      sc.setZero();
    }
    for (Eigen::Index r = 0; r < nq; ++r) {
      const Eigen::Index t = qb + r;
      const int y = targets.target[t];
      float cmass = 0.0f;
      for (Eigen::Index j = 0; j < nk; ++j)
        if (targets.copyable[kb + j] && targets.source_id[kb + j] == y) cmass += sc(r, j);
      const float pvy = y < vocab ? s->pv(t, y) : 0.0f;
      const double p = std::max(
          1e-30, static_cast<double>(s->g(t)) * pvy + (1.0 - static_cast<double>(s->g(t))) * cmass);
      s->p(t) = p;
      s->c(t) = cmass;
      loss -= std::log(p) * inv_t;
    }
    s->pc.push_back(std::move(sc));
  }

  Mat out(1, 1);
  out(0, 0) = static_cast<float>(loss);
  Var o = push(std::move(out));
  if (record_) {
    nodes_[o].back = [this, o, logits, gate, hc, enc, layout, targets, s, vocab, scale, inv_t] {
      const float up = nodes_[o].grad(0, 0);
      Mat& dL = grad_of(logits);
      Mat& dG = grad_of(gate);
      Mat& dH = grad_of(hc);
      Mat& dE = grad_of(enc);
      const Mat& H = nodes_[hc].value;
      const Mat& E = nodes_[enc].value;
      for (std::size_t i = 0; i < layout.size(); ++i) {
        const auto qb = static_cast<Eigen::Index>(layout.q_begin[i]);
        const auto nq = static_cast<Eigen::Index>(layout.q_len[i]);
        const auto kb = static_cast<Eigen::Index>(layout.k_begin[i]);
        const auto nk = static_cast<Eigen::Index>(layout.k_len[i]);
        const Mat& pc = s->pc[i];
        Mat dS = Mat::Zero(nq, nk);
        for (Eigen::Index r = 0; r < nq; ++r) {
          const Eigen::Index t = qb + r;
          const int y = targets.target[t];
          const float g = s->g(t);
          const float dp = static_cast<float>(-inv_t / s->p(t)) * up;
          const float pvy = y < vocab ? s->pv(t, y) : 0.0f;
          if (y < vocab) {
            dL.row(t).noalias() -= (g * pvy * dp) * s->pv.row(t);
            dL(t, y) += g * pvy * dp;
          }
          const float cm = s->c(t);
          for (Eigen::Index j = 0; j < nk; ++j) {
            if (!targets.copyable[kb + j]) continue;
            const float in_m = targets.source_id[kb + j] == y ? 1.0f : 0.0f;
            dS(r, j) = (1.0f - g) * pc(r, j) * (in_m - cm) * dp;
          }
          dG(t, 0) += (pvy - cm) * g * (1.0f - g) * dp;
        }
        dH.block(qb, 0, nq, H.cols()).noalias() += (dS * E.block(kb, 0, nk, E.cols())) * scale;
        dE.block(kb, 0, nk, E.cols()).noalias() +=
            (dS.transpose() * H.block(qb, 0, nq, H.cols())) * scale;
      }
    };
  }
  return o;
}

void Tape::backward(Var root) {
  if (!record_) throw ContractError("backward on a non-recording tape");
  grad_of(root).setOnes();
  for (std::size_t i = root + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.back && n.grad.size() != 0) n.back();
  }
}

}  // namespace demoee::toy
