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

#include "demoee/manifest.hpp"

#include <fstream>

#include "demoee/errors.hpp"
#include "demoee/util.hpp"

namespace demoee {

RunManifest::RunManifest(std::string command)
    : command_(std::move(command)), start_(std::chrono::steady_clock::now()) {}

void RunManifest::add_input(const std::string& path) { inputs_[path] = sha256_file(path); }

void RunManifest::add_output(const std::string& path) { outputs_[path] = sha256_file(path); }

nlohmann::json RunManifest::to_json() const {
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  nlohmann::json j = {{"command", command_}, {"config", config_},   {"seeds", seeds_},
                      {"inputs", inputs_},   {"outputs", outputs_}, {"wall_time_seconds", wall}};
  if (!extra_.empty()) j["notes"] = extra_;
  return j;
}

void RunManifest::write(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write manifest " + path);
  out << to_json().dump(2) << "\n";
}

}  // namespace demoee
