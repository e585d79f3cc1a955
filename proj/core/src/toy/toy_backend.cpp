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

#include "demoee/toy/toy_backend.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "demoee/errors.hpp"
#include "demoee/toy/autograd.hpp"
#include "demoee/util.hpp"

namespace demoee::toy {

void ToyConfig::validate() const {
  if (layers == 0 || heads == 0 || d_model == 0 || d_ff == 0)
    throw ValidationError("toy config: sizes must be positive");
  if (d_model % heads != 0) throw ValidationError("toy config: heads must divide d_model");
  if (max_positions < 8) throw ValidationError("toy config: max_positions must be at least 8");
  if (dropout < 0.0 || dropout >= 1.0)
    throw ValidationError("toy config: dropout must be in [0, 1)");
  if (word_dropout < 0.0 || word_dropout >= 1.0)
    throw ValidationError("toy config: word_dropout must be in [0, 1)");
  if (clip_norm <= 0.0) throw ValidationError("toy config: clip_norm must be positive");
}

nlohmann::json ToyConfig::to_json() const {
  return {{"layers", layers},
          {"heads", heads},
          {"d_model", d_model},
          {"d_ff", d_ff},
          {"max_positions", max_positions},
          {"seed", seed},
          {"dropout", dropout},
          {"word_dropout", word_dropout},
          {"beta1", beta1},
          {"beta2", beta2},
          {"epsilon", epsilon},
          {"clip_norm", clip_norm}};
}

ToyConfig ToyConfig::from_json(const nlohmann::json& obj) {
  ToyConfig c;
  try {
    c.layers = obj.value("layers", c.layers);
    c.heads = obj.value("heads", c.heads);
    c.d_model = obj.value("d_model", c.d_model);
    c.d_ff = obj.value("d_ff", c.d_ff);
    c.max_positions = obj.value("max_positions", c.max_positions);
    c.seed = obj.value("seed", c.seed);
    c.dropout = obj.value("dropout", c.dropout);
    c.word_dropout = obj.value("word_dropout", c.word_dropout);
    c.beta1 = obj.value("beta1", c.beta1);
    c.beta2 = obj.value("beta2", c.beta2);
    c.epsilon = obj.value("epsilon", c.epsilon);
    c.clip_norm = obj.value("clip_norm", c.clip_norm);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("toy config: ") + e.what());
  }
  c.validate();
  return c;
}

TrainingConfig toy_training_defaults() {
  TrainingConfig c;
  c.learning_rate = 1e-3;
  c.epochs = 30;
  return c;
}

namespace {

enum SegmentId : int { kDemoSeg = 0, kSentenceSeg = 1, kPromptSeg = 2, kSepSeg = 3 };

struct AttnIdx {
  int q, bq, k, bk, v, bv, o, bo;
};
struct EncLayer {
  int ln1g, ln1b, ln2g, ln2b, w1, b1, w2, b2;
  AttnIdx self;
};
struct DecLayer {
  int ln1g, ln1b, ln2g, ln2b, ln3g, ln3b, w1, b1, w2, b2;
  AttnIdx self, cross;
};

// One composed input, in model ids.
struct Encoded {
  std::vector<int> ids, segments, source_id;
  std::vector<uint8_t> copyable;
  // Extended ids vocab.size() + i name these words.
  std::vector<std::string> oov;

  int extended_id(const Vocabulary& vocab, const std::string& w) const {
    const int id = vocab.id(w);
    if (id != Vocabulary::kUnk || w == "<unk>") return id;
    auto it = std::find(oov.begin(), oov.end(), w);
    return it == oov.end() ? Vocabulary::kUnk : vocab.size() + static_cast<int>(it - oov.begin());
  }
};

struct Batch {
  std::vector<int> enc_ids, enc_pos, enc_seg;
  std::vector<int> dec_ids, dec_pos;
  SeqLayout enc_self, dec_self, cross;
  CopyTargets copy;
};

std::vector<int> iota_vec(std::size_t n) {
  std::vector<int> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<int>(i);
  return v;
}

}  // namespace

struct ToyBackend::Impl {
  Vocabulary vocab;
  ToyConfig config;
  std::vector<std::string> names;
  std::vector<Mat> values, m, v;
  std::size_t step = 0;

  int emb = 0, pos_enc = 0, pos_dec = 0, seg = 0;
  // Embeddings of the two preceding and the following token of an encoder
  // position: a local window that makes "from X" / "led by X" cues direct.
  int ctx_prev = 0, ctx_prev2 = 0, ctx_next = 0;
  std::vector<EncLayer> enc;
  std::vector<DecLayer> dec;
  int enc_lng = 0, enc_lnb = 0, dec_lng = 0, dec_lnb = 0;
  int wc = 0, bc = 0, wg = 0, bg = 0;

  Impl(Vocabulary vc, ToyConfig cfg) : vocab(std::move(vc)), config(cfg) {
    config.validate();
    build();
  }

  int add(const std::string& name, std::size_t rows, std::size_t cols) {
    names.push_back(name);
    values.push_back(Mat::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols)));
    return static_cast<int>(values.size() - 1);
  }

  AttnIdx add_attn(const std::string& p) {
    const std::size_t d = config.d_model;
    AttnIdx a{};
    a.q = add(p + ".wq", d, d);
    a.bq = add(p + ".bq", 1, d);
    a.k = add(p + ".wk", d, d);
    a.bk = add(p + ".bk", 1, d);
    a.v = add(p + ".wv", d, d);
    a.bv = add(p + ".bv", 1, d);
    a.o = add(p + ".wo", d, d);
    a.bo = add(p + ".bo", 1, d);
    return a;
  }

  void build() {
    const std::size_t d = config.d_model, ff = config.d_ff, P = config.max_positions;
    emb = add("embed", static_cast<std::size_t>(vocab.size()), d);
    pos_enc = add("pos_enc", P, d);
    pos_dec = add("pos_dec", P, d);
    seg = add("segment", 4, d);
    ctx_prev = add("ctx_prev", static_cast<std::size_t>(vocab.size()), d);
    ctx_prev2 = add("ctx_prev2", static_cast<std::size_t>(vocab.size()), d);
    ctx_next = add("ctx_next", static_cast<std::size_t>(vocab.size()), d);
    for (std::size_t l = 0; l < config.layers; ++l) {
      const std::string p = "enc" + std::to_string(l);
      EncLayer e{};
      e.ln1g = add(p + ".ln1.g", 1, d);
      e.ln1b = add(p + ".ln1.b", 1, d);
      e.self = add_attn(p + ".self");
      e.ln2g = add(p + ".ln2.g", 1, d);
      e.ln2b = add(p + ".ln2.b", 1, d);
      e.w1 = add(p + ".ff.w1", d, ff);
      e.b1 = add(p + ".ff.b1", 1, ff);
      e.w2 = add(p + ".ff.w2", ff, d);
      e.b2 = add(p + ".ff.b2", 1, d);
      enc.push_back(e);
    }
    enc_lng = add("enc.ln.g", 1, d);
    enc_lnb = add("enc.ln.b", 1, d);
    for (std::size_t l = 0; l < config.layers; ++l) {
      const std::string p = "dec" + std::to_string(l);
      DecLayer e{};
      e.ln1g = add(p + ".ln1.g", 1, d);
      e.ln1b = add(p + ".ln1.b", 1, d);
      e.self = add_attn(p + ".self");
      e.ln2g = add(p + ".ln2.g", 1, d);
      e.ln2b = add(p + ".ln2.b", 1, d);
      e.cross = add_attn(p + ".cross");
      e.ln3g = add(p + ".ln3.g", 1, d);
      e.ln3b = add(p + ".ln3.b", 1, d);
      e.w1 = add(p + ".ff.w1", d, ff);
      e.b1 = add(p + ".ff.b1", 1, ff);
      e.w2 = add(p + ".ff.w2", ff, d);
      e.b2 = add(p + ".ff.b2", 1, d);
      dec.push_back(e);
    }
    dec_lng = add("dec.ln.g", 1, d);
    dec_lnb = add("dec.ln.b", 1, d);
    wc = add("copy.w", d, d);
    bc = add("copy.b", 1, d);
    wg = add("gate.w", d, 1);
    bg = add("gate.b", 1, 1);
    initialize();
  }

  void initialize() {
    Rng rng = make_rng(config.seed, "init");
    // Box-Muller keeps initialization identical across standard libraries.
    auto normal = [](Rng& r) {
      const double u1 = 1.0 - uniform_real(r), u2 = uniform_real(r);
      return static_cast<float>(std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2));
    };
    for (std::size_t i = 0; i < values.size(); ++i) {
      Mat& w = values[i];
      const std::string& n = names[i];
      const bool is_gain = n.size() > 2 && n.compare(n.size() - 2, 2, ".g") == 0;
      const bool is_bias = n.find(".b") != std::string::npos && w.rows() == 1;
      if (is_gain) {
        w.setOnes();
      } else if (is_bias) {
        w.setZero();
      } else {
        const float stddev =
            (i == static_cast<std::size_t>(emb) || i == static_cast<std::size_t>(pos_enc) ||
             i == static_cast<std::size_t>(pos_dec) || i == static_cast<std::size_t>(seg) ||
             i == static_cast<std::size_t>(ctx_prev) || i == static_cast<std::size_t>(ctx_prev2) ||
             i == static_cast<std::size_t>(ctx_next))
                ? 0.02f
                : std::sqrt(2.0f / static_cast<float>(w.rows() + w.cols()));
        for (Eigen::Index k = 0; k < w.size(); ++k) w.data()[k] = stddev * normal(rng);
      }
    }
    m.clear();
    v.clear();
    for (const auto& w : values) {
      m.push_back(Mat::Zero(w.rows(), w.cols()));
      v.push_back(Mat::Zero(w.rows(), w.cols()));
    }
    step = 0;
  }

  ParamRef ref(int i, std::vector<Mat>* grads) const {
    return {&values[static_cast<std::size_t>(i)],
            grads ? &(*grads)[static_cast<std::size_t>(i)] : nullptr};
  }

  // ---- input encoding ----

  Encoded encode_input(const ComposedInput& in) const {
    const std::string& sep = "<SEP>";
    auto demo = tokenize(in.part(in.demo));
    auto sent = tokenize(in.part(in.sentence));
    auto prompt = tokenize(in.part(in.prompt));
    const std::size_t P = config.max_positions;
    if (prompt.size() + 2 > P) prompt.resize(P - 2);
    if (sent.size() + prompt.size() + 2 > P) sent.resize(P - 2 - prompt.size());
    const std::size_t budget = P - 2 - sent.size() - prompt.size();
    if (demo.size() > budget) demo.erase(demo.begin(), demo.end() - static_cast<long>(budget));

    Encoded e;
    auto push = [&](const std::string& w, int segment, bool copy) {
      const int id = vocab.id(w);
      e.ids.push_back(id);
      e.segments.push_back(segment);
      e.copyable.push_back(copy ? 1 : 0);
      int ext = id;
      if (copy && id == Vocabulary::kUnk && w != "<unk>") {
        auto it = std::find(e.oov.begin(), e.oov.end(), w);
        if (it == e.oov.end()) {
          e.oov.push_back(w);
          it = e.oov.end() - 1;
        }
        ext = vocab.size() + static_cast<int>(it - e.oov.begin());
      }
      e.source_id.push_back(copy ? ext : -1);
    };
    for (const auto& w : demo) push(w, kDemoSeg, false);
    push(sep, kSepSeg, false);
    for (const auto& w : sent) push(w, kSentenceSeg, true);
    push(sep, kSepSeg, false);
    for (const auto& w : prompt) push(w, kPromptSeg, true);
    return e;
  }

  std::vector<int> target_ids(const Encoded& e, const std::string& target) const {
    auto words = tokenize(target);
    const std::size_t cap = config.max_positions - 1;
    if (words.size() > cap) words.resize(cap);
    std::vector<int> ids;
    for (const auto& w : words) ids.push_back(e.extended_id(vocab, w));
    ids.push_back(Vocabulary::kEos);
    return ids;
  }

  int decoder_input(int ext) const { return ext >= vocab.size() ? Vocabulary::kUnk : ext; }

  Batch make_batch(std::span<const TrainingExample> examples) const {
    Batch b;
    for (const auto& ex : examples) {
      Encoded e = encode_input(ex.input);
      const std::vector<int> tgt = target_ids(e, ex.target);
      const std::size_t eb = b.enc_ids.size(), db = b.dec_ids.size();
      const std::size_t ne = e.ids.size(), nd = tgt.size();
      b.enc_ids.insert(b.enc_ids.end(), e.ids.begin(), e.ids.end());
      b.enc_seg.insert(b.enc_seg.end(), e.segments.begin(), e.segments.end());
      auto pos = iota_vec(ne);
      b.enc_pos.insert(b.enc_pos.end(), pos.begin(), pos.end());
      b.copy.source_id.insert(b.copy.source_id.end(), e.source_id.begin(), e.source_id.end());
      b.copy.copyable.insert(b.copy.copyable.end(), e.copyable.begin(), e.copyable.end());
      b.dec_ids.push_back(Vocabulary::kBos);
      for (std::size_t t = 0; t + 1 < nd; ++t) b.dec_ids.push_back(decoder_input(tgt[t]));
      pos = iota_vec(nd);
      b.dec_pos.insert(b.dec_pos.end(), pos.begin(), pos.end());
      b.copy.target.insert(b.copy.target.end(), tgt.begin(), tgt.end());
      b.enc_self.q_begin.push_back(eb);
      b.enc_self.q_len.push_back(ne);
      b.enc_self.k_begin.push_back(eb);
      b.enc_self.k_len.push_back(ne);
      b.dec_self.q_begin.push_back(db);
      b.dec_self.q_len.push_back(nd);
      b.dec_self.k_begin.push_back(db);
      b.dec_self.k_len.push_back(nd);
      b.cross.q_begin.push_back(db);
      b.cross.q_len.push_back(nd);
      b.cross.k_begin.push_back(eb);
      b.cross.k_len.push_back(ne);
    }
    return b;
  }

  // ---- forward ----

  Tape::Var attn_block(Tape& t, Tape::Var xq, Tape::Var xkv, const AttnIdx& a,
                       const SeqLayout& layout, bool causal, std::vector<Mat>* g) const {
    auto q = t.linear(xq, ref(a.q, g), ref(a.bq, g));
    auto k = t.linear(xkv, ref(a.k, g), ref(a.bk, g));
    auto v = t.linear(xkv, ref(a.v, g), ref(a.bv, g));
    auto c = t.attention(q, k, v, layout, config.heads, causal);
    return t.linear(c, ref(a.o, g), ref(a.bo, g));
  }

  Tape::Var ffn(Tape& t, Tape::Var x, int w1, int b1, int w2, int b2, std::vector<Mat>* g) const {
    return t.linear(t.relu(t.linear(x, ref(w1, g), ref(b1, g))), ref(w2, g), ref(b2, g));
  }

  Tape::Var drop(Tape& t, Tape::Var x, Rng* rng) const {
    if (rng == nullptr || config.dropout <= 0.0) return x;
    const Mat& v = t.value(x);
    Mat keep(v.rows(), v.cols());
    for (Eigen::Index k = 0; k < keep.size(); ++k)
      keep.data()[k] = uniform_real(*rng) < config.dropout ? 0.0f : 1.0f;
    return t.dropout(x, keep, static_cast<float>(config.dropout));
  }

  Tape::Var encoder(Tape& t, const std::vector<int>& ids, const std::vector<int>& pos,
                    const std::vector<int>& segs, const SeqLayout& layout, std::vector<Mat>* g,
                    Rng* rng = nullptr) const {
    auto x = t.add(t.add(t.gather(ref(emb, g), ids), t.gather(ref(pos_enc, g), pos)),
                   t.gather(ref(seg, g), segs));
    std::vector<int> prev(ids.size(), Vocabulary::kPad), prev2 = prev, next = prev;
    for (std::size_t i = 0; i < layout.size(); ++i) {
      const std::size_t b = layout.q_begin[i], n = layout.q_len[i];
      for (std::size_t j = 0; j < n; ++j) {
        if (j >= 1) prev[b + j] = ids[b + j - 1];
        if (j >= 2) prev2[b + j] = ids[b + j - 2];
        if (j + 1 < n) next[b + j] = ids[b + j + 1];
      }
    }
    x = t.add(x, t.add(t.add(t.gather(ref(ctx_prev, g), prev), t.gather(ref(ctx_prev2, g), prev2)),
                       t.gather(ref(ctx_next, g), next)));
    x = drop(t, x, rng);
    for (const auto& l : enc) {
      auto h = t.layer_norm(x, ref(l.ln1g, g), ref(l.ln1b, g));
      x = t.add(x, drop(t, attn_block(t, h, h, l.self, layout, false, g), rng));
      h = t.layer_norm(x, ref(l.ln2g, g), ref(l.ln2b, g));
      x = t.add(x, drop(t, ffn(t, h, l.w1, l.b1, l.w2, l.b2, g), rng));
    }
    return t.layer_norm(x, ref(enc_lng, g), ref(enc_lnb, g));
  }

  Tape::Var decoder(Tape& t, Tape::Var memory, const std::vector<int>& ids,
                    const std::vector<int>& pos, const SeqLayout& self_layout,
                    const SeqLayout& cross_layout, std::vector<Mat>* g, Rng* rng = nullptr) const {
    auto y = t.add(t.gather(ref(emb, g), ids), t.gather(ref(pos_dec, g), pos));
    y = drop(t, y, rng);
    for (const auto& l : dec) {
      auto h = t.layer_norm(y, ref(l.ln1g, g), ref(l.ln1b, g));
      y = t.add(y, drop(t, attn_block(t, h, h, l.self, self_layout, true, g), rng));
      h = t.layer_norm(y, ref(l.ln2g, g), ref(l.ln2b, g));
      y = t.add(y, drop(t, attn_block(t, h, memory, l.cross, cross_layout, false, g), rng));
      h = t.layer_norm(y, ref(l.ln3g, g), ref(l.ln3b, g));
      y = t.add(y, drop(t, ffn(t, h, l.w1, l.b1, l.w2, l.b2, g), rng));
    }
    return t.layer_norm(y, ref(dec_lng, g), ref(dec_lnb, g));
  }

  // Loss node of a full teacher-forced batch.
  Tape::Var batch_loss(Tape& t, const Batch& b, std::vector<Mat>* g, Rng* rng) const {
    std::vector<int> ids = b.enc_ids;
    if (rng != nullptr && config.word_dropout > 0.0)
      for (std::size_t i = 0; i < ids.size(); ++i)
        if (b.enc_seg[i] == kSentenceSeg && uniform_real(*rng) < config.word_dropout)
          ids[i] = Vocabulary::kUnk;
    auto memory = encoder(t, ids, b.enc_pos, b.enc_seg, b.enc_self, g, rng);
    auto h = decoder(t, memory, b.dec_ids, b.dec_pos, b.dec_self, b.cross, g, rng);
    auto logits = t.tied_logits(h, ref(emb, g));
    auto hc = t.linear(h, ref(wc, g), ref(bc, g));
    auto gate = t.linear(h, ref(wg, g), ref(bg, g));
    return t.pointer_nll(logits, gate, hc, memory, b.cross, b.copy);
  }

  // Extended-vocabulary distribution of the token after `prefix` (model ids,
  // starting with <bos>), given encoder states `memory` of `e`.
  std::vector<double> next_distribution(const Mat& memory, const Encoded& e,
                                        const std::vector<int>& prefix) const {
    Tape t(false);
    auto mem = t.constant(memory);
    const std::size_t n = prefix.size(), ne = e.ids.size();
    SeqLayout self{{0}, {n}, {0}, {n}}, cross{{0}, {n}, {0}, {ne}};
    auto h = decoder(t, mem, prefix, iota_vec(n), self, cross, nullptr);
    const Mat& H = t.value(h);
    const auto last = H.row(static_cast<Eigen::Index>(n) - 1);

    const int V = vocab.size();
    std::vector<double> dist(static_cast<std::size_t>(V) + e.oov.size(), 0.0);
    Eigen::VectorXd logits = (values[emb] * last.transpose()).cast<double>();
    const double mx = logits.maxCoeff();
    Eigen::VectorXd pv = (logits.array() - mx).exp();
    pv /= pv.sum();
    const double gate =
        1.0 /
        (1.0 + std::exp(-static_cast<double>(last.dot(values[wg].col(0)) + values[bg](0, 0))));
    for (int k = 0; k < V; ++k) dist[k] = gate * pv(k);

    Eigen::RowVectorXf hc = last * values[wc] + values[bc].row(0);
    const double scale = 1.0 / std::sqrt(static_cast<double>(config.d_model));
    std::vector<double> scores;
    std::vector<std::size_t> where;
    for (std::size_t j = 0; j < ne; ++j) {
      if (!e.copyable[j]) continue;
      scores.push_back(static_cast<double>(hc.dot(memory.row(static_cast<Eigen::Index>(j)))) *
                       scale);
      where.push_back(j);
    }
    if (!scores.empty()) {
      const double smx = *std::max_element(scores.begin(), scores.end());
      double z = 0.0;
      for (auto& s : scores) z += (s = std::exp(s - smx));
      for (std::size_t i = 0; i < scores.size(); ++i)
        dist[static_cast<std::size_t>(e.source_id[where[i]])] += (1.0 - gate) * scores[i] / z;
    }
    return dist;
  }

  Mat encode_memory(const Encoded& e) const {
    Tape t(false);
    const std::size_t n = e.ids.size();
    SeqLayout layout{{0}, {n}, {0}, {n}};
    auto mem = encoder(t, e.ids, iota_vec(n), e.segments, layout, nullptr);
    return t.value(mem);
  }

  void adam(const std::vector<Mat>& grads, double lr) {
    double sq = 0.0;
    for (const auto& g : grads) sq += static_cast<double>(g.squaredNorm());
    const double norm = std::sqrt(sq);
    const double clip = norm > config.clip_norm ? config.clip_norm / norm : 1.0;
    ++step;
    const double b1 = config.beta1, b2 = config.beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(step));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(step));
    const float step_size = static_cast<float>(lr / c1);
    const float eps = static_cast<float>(config.epsilon);
    for (std::size_t i = 0; i < values.size(); ++i) {
      const Mat g = grads[i] * static_cast<float>(clip);
      m[i] = static_cast<float>(b1) * m[i] + static_cast<float>(1.0 - b1) * g;
      v[i] = static_cast<float>(b2) * v[i] + static_cast<float>(1.0 - b2) * g.cwiseAbs2();
      values[i].array() -=
          step_size * m[i].array() / ((v[i].array() / static_cast<float>(c2)).sqrt() + eps);
    }
  }

  nlohmann::json header() const {
    nlohmann::json shapes = nlohmann::json::array();
    for (std::size_t i = 0; i < values.size(); ++i)
      shapes.push_back({names[i], values[i].rows(), values[i].cols()});
    return {{"format", "demoee-toy-1"},
            {"config", config.to_json()},
            {"vocabulary", vocab.to_json()},
            {"parameters", shapes},
            {"optimizer_step", step}};
  }
};

ToyBackend::ToyBackend(Vocabulary vocab, ToyConfig config)
    : impl_(std::make_unique<Impl>(std::move(vocab), config)) {}
ToyBackend::~ToyBackend() = default;
ToyBackend::ToyBackend(ToyBackend&&) noexcept = default;
ToyBackend& ToyBackend::operator=(ToyBackend&&) noexcept = default;

const Vocabulary& ToyBackend::vocabulary() const { return impl_->vocab; }
const ToyConfig& ToyBackend::config() const { return impl_->config; }
std::size_t ToyBackend::optimizer_steps() const { return impl_->step; }

std::size_t ToyBackend::parameter_count() const {
  std::size_t n = 0;
  for (const auto& w : impl_->values) n += static_cast<std::size_t>(w.size());
  return n;
}

double ToyBackend::train_step(std::span<const TrainingExample> batch, double learning_rate) {
  if (batch.empty()) return 0.0;
  const Batch b = impl_->make_batch(batch);
  std::vector<Mat> grads;
  grads.reserve(impl_->values.size());
  for (const auto& w : impl_->values) grads.push_back(Mat::Zero(w.rows(), w.cols()));
  // Dropout masks depend only on the seed and the optimizer step.
  Rng rng = make_rng(impl_->config.seed, "dropout/" + std::to_string(impl_->step));
  Tape t(true);
  auto loss = impl_->batch_loss(t, b, &grads, &rng);
  const double value = t.value(loss)(0, 0);
  // The caller aborts on a non-finite loss; leave the parameters untouched.
  if (!std::isfinite(value)) return value;
  t.backward(loss);
  impl_->adam(grads, learning_rate);
  return value;
}

double ToyBackend::loss(std::span<const TrainingExample> batch) const {
  if (batch.empty()) return 0.0;
  const Batch b = impl_->make_batch(batch);
  Tape t(false);
  return t.value(impl_->batch_loss(t, b, nullptr, nullptr))(0, 0);
}

std::string ToyBackend::generate(const ComposedInput& input, std::size_t max_length) const {
  const Impl& im = *impl_;
  const Encoded e = im.encode_input(input);
  const Mat memory = im.encode_memory(e);
  const std::size_t cap = std::min(max_length, im.config.max_positions - 1);
  std::vector<int> prefix{Vocabulary::kBos};
  std::vector<std::string> words;
  const int V = im.vocab.size();
  while (words.size() < cap) {
    const auto dist = im.next_distribution(memory, e, prefix);
    int best = -1;
    for (int k = 0; k < static_cast<int>(dist.size()); ++k) {
      if (k == Vocabulary::kPad || k == Vocabulary::kBos) continue;
      if (best < 0 || dist[k] > dist[best]) best = k;
    }
    if (best == Vocabulary::kEos) break;
    words.push_back(best < V ? im.vocab.word(best) : e.oov[static_cast<std::size_t>(best - V)]);
    prefix.push_back(im.decoder_input(best));
  }
  return detokenize(words);
}

double ToyBackend::next_token_probability(const ComposedInput& input,
                                          const std::vector<std::string>& prefix,
                                          const std::string& next) const {
  const Impl& im = *impl_;
  const Encoded e = im.encode_input(input);
  const Mat memory = im.encode_memory(e);
  std::vector<int> ids{Vocabulary::kBos};
  for (const auto& w : prefix) ids.push_back(im.decoder_input(e.extended_id(im.vocab, w)));
  const auto dist = im.next_distribution(memory, e, ids);
  return dist[static_cast<std::size_t>(e.extended_id(im.vocab, next))];
}

std::string ToyBackend::parameters_fingerprint() const {
  Sha256 h;
  h.update(impl_->config.to_json().dump());
  h.update(impl_->vocab.to_json().dump());
  for (const auto& w : impl_->values)
    h.update(std::string_view(reinterpret_cast<const char*>(w.data()),
                              static_cast<std::size_t>(w.size()) * sizeof(float)));
  return h.hex_digest();
}

namespace {
constexpr char kMagic[] = "DEMOEE-TOY\n";

void write_mats(std::ostream& out, const std::vector<Mat>& mats) {
  for (const auto& w : mats)
    out.write(reinterpret_cast<const char*>(w.data()),
              static_cast<std::streamsize>(w.size() * static_cast<Eigen::Index>(sizeof(float))));
}

void read_mats(std::istream& in, std::vector<Mat>& mats, const std::string& path) {
  for (auto& w : mats) {
    in.read(reinterpret_cast<char*>(w.data()),
            static_cast<std::streamsize>(w.size() * static_cast<Eigen::Index>(sizeof(float))));
    if (!in) throw ParseError(path + ": truncated toy model");
  }
}
}  // namespace

void ToyBackend::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  const std::string head = impl_->header().dump();
  out << kMagic << head.size() << "\n" << head;
  write_mats(out, impl_->values);
  write_mats(out, impl_->m);
  write_mats(out, impl_->v);
  if (!out) throw Error("failed writing " + path);
}

void ToyBackend::load(const std::string& path) { *this = from_file(path); }

ToyBackend ToyBackend::from_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path);
  std::string magic(sizeof(kMagic) - 1, '\0');
  in.read(magic.data(), static_cast<std::streamsize>(magic.size()));
  if (magic != kMagic) throw ParseError(path + ": not a toy model file");
  std::size_t len = 0;
  in >> len;
  in.get();
  std::string head(len, '\0');
  in.read(head.data(), static_cast<std::streamsize>(len));
  nlohmann::json h;
  try {
    h = nlohmann::json::parse(head);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  ToyBackend b(Vocabulary::from_json(h.at("vocabulary")), ToyConfig::from_json(h.at("config")));
  const auto& shapes = h.at("parameters");
  if (shapes.size() != b.impl_->values.size())
    throw ParseError(path + ": parameter count mismatch");
  for (std::size_t i = 0; i < shapes.size(); ++i)
    if (shapes[i][1].get<Eigen::Index>() != b.impl_->values[i].rows() ||
        shapes[i][2].get<Eigen::Index>() != b.impl_->values[i].cols())
      throw ParseError(path + ": shape mismatch for " + b.impl_->names[i]);
  read_mats(in, b.impl_->values, path);
  read_mats(in, b.impl_->m, path);
  read_mats(in, b.impl_->v, path);
  b.impl_->step = h.at("optimizer_step").get<std::size_t>();
  return b;
}

}  // namespace demoee::toy
