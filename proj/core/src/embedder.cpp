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

#include "demoee/embedder.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <mutex>
#include <nlohmann/json.hpp>

#include "demoee/errors.hpp"
#include "demoee/util.hpp"
#include "httplib.h"

namespace demoee {

HashedBagEmbedder::HashedBagEmbedder(std::size_t dimension) : dimension_(dimension) {
  if (dimension_ == 0) throw ContractError("embedding dimension must be positive");
}

std::vector<float> HashedBagEmbedder::embed(const std::vector<std::string>& tokens) const {
  std::vector<float> v(dimension_, 0.0f);
  for (const auto& tok : tokens) {
    std::string lower;
    lower.reserve(tok.size());
    for (char c : tok) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    const uint64_t h = fnv1a64(lower);
    v[h % dimension_] += (h >> 63) ? -1.0f : 1.0f;
  }
  return v;
}

std::vector<float> ScaledEmbedder::embed(const std::vector<std::string>& tokens) const {
  auto v = inner_.embed(tokens);
  for (auto& x : v) x *= scale_;
  return v;
}

double cosine_similarity(const std::vector<float>& a, const std::vector<float>& b) {
  if (a.size() != b.size()) throw ContractError("cosine_similarity: dimension mismatch");
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  if (na == 0.0 || nb == 0.0) return -1.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

struct HttpEmbedder::Impl {
  std::string scheme_host_port;
  std::string path;
  mutable std::mutex mu;
  mutable std::map<std::string, std::vector<float>> cache;
};

HttpEmbedder::HttpEmbedder(std::string endpoint, std::size_t dimension, std::size_t batch_size)
    : impl_(std::make_unique<Impl>()),
      dimension_(dimension),
      batch_size_(batch_size == 0 ? 1 : batch_size) {
  const auto scheme_end = endpoint.find("://");
  if (scheme_end == std::string::npos)
    throw ContractError("embedder endpoint must be a URL: " + endpoint);
  const auto path_start = endpoint.find('/', scheme_end + 3);
  impl_->scheme_host_port = endpoint.substr(0, path_start);
  impl_->path = path_start == std::string::npos ? "/" : endpoint.substr(path_start);
}

HttpEmbedder::~HttpEmbedder() = default;

std::vector<std::vector<float>> HttpEmbedder::embed_batch(
    const std::vector<std::vector<std::string>>& sentences) const {
  std::vector<std::string> keys;
  for (const auto& s : sentences) keys.push_back(join_tokens(s));

  std::vector<std::string> missing;
  {
    std::lock_guard<std::mutex> lock(impl_->mu);
    for (const auto& k : keys)
      if (!impl_->cache.count(k) && std::find(missing.begin(), missing.end(), k) == missing.end())
        missing.push_back(k);
  }

  httplib::Client client(impl_->scheme_host_port);
  for (std::size_t b = 0; b < missing.size(); b += batch_size_) {
    nlohmann::json body;
    body["inputs"] = nlohmann::json::array();
    const std::size_t end = std::min(missing.size(), b + batch_size_);
    for (std::size_t i = b; i < end; ++i) body["inputs"].push_back(missing[i]);
    auto res = client.Post(impl_->path, body.dump(), "application/json");
    if (!res) throw Error("embedder request failed: " + httplib::to_string(res.error()));
    if (res->status != 200) throw Error("embedder returned HTTP " + std::to_string(res->status));
    nlohmann::json reply;
    try {
      reply = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(std::string("embedder reply is not JSON: ") + e.what());
    }
    if (!reply.contains("embeddings") || !reply["embeddings"].is_array() ||
        reply["embeddings"].size() != end - b)
      throw ParseError("embedder reply lacks one embedding per input");
    std::lock_guard<std::mutex> lock(impl_->mu);
    for (std::size_t i = b; i < end; ++i) {
      auto v = reply["embeddings"][i - b].get<std::vector<float>>();
      if (v.size() != dimension_)
        throw ValidationError("embedder returned dimension " + std::to_string(v.size()) +
                              ", expected " + std::to_string(dimension_));
      impl_->cache[missing[i]] = std::move(v);
    }
  }

  std::vector<std::vector<float>> out;
  std::lock_guard<std::mutex> lock(impl_->mu);
  for (const auto& k : keys) out.push_back(impl_->cache.at(k));
  return out;
}

std::vector<float> HttpEmbedder::embed(const std::vector<std::string>& tokens) const {
  return embed_batch({tokens}).front();
}

}  // namespace demoee
