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

#ifndef DEMOEE_MANIFEST_HPP_
#define DEMOEE_MANIFEST_HPP_

#include <chrono>
#include <cstdint>
#include <map>
#include <nlohmann/json.hpp>
#include <string>

namespace demoee {

// Record of one command run: what went in, what came out.
class RunManifest {
 public:
  explicit RunManifest(std::string command);

  void set_config(nlohmann::json config) { config_ = std::move(config); }
  void add_seed(const std::string& name, uint64_t seed) { seeds_[name] = seed; }
  // Digests the file now.
  void add_input(const std::string& path);
  void add_output(const std::string& path);
  void note(const std::string& key, nlohmann::json value) { extra_[key] = std::move(value); }

  // Wall time is measured from construction.
  nlohmann::json to_json() const;
  void write(const std::string& path) const;

  const std::map<std::string, std::string>& inputs() const { return inputs_; }
  const std::map<std::string, std::string>& outputs() const { return outputs_; }

 private:
  std::string command_;
  nlohmann::json config_ = nlohmann::json::object();
  std::map<std::string, uint64_t> seeds_;
  std::map<std::string, std::string> inputs_;
  std::map<std::string, std::string> outputs_;
  nlohmann::json extra_ = nlohmann::json::object();
  std::chrono::steady_clock::time_point start_;
};

}  // namespace demoee

#endif  // DEMOEE_MANIFEST_HPP_
