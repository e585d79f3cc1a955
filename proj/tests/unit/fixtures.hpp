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

#ifndef DEMOEE_TESTS_UNIT_FIXTURES_HPP_
#define DEMOEE_TESTS_UNIT_FIXTURES_HPP_

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "demoee/corpus.hpp"
#include "demoee/schema.hpp"
#include "demoee/util.hpp"

namespace demoee::testing {

inline std::string data_path(const std::string& rel) {
  return std::string(DEMOEE_DATA_DIR) + "/" + rel;
}

inline EventSchema toy_schema() { return load_schema(data_path("schemas/toy5.json")); }
inline EventSchema ace_schema() { return load_schema(data_path("schemas/ace05.json")); }

// "Kelly arrived in Seoul from Beijing to brief Yoon ." with a Transport and
// a Meet record.
inline AnnotatedExample kelly_example() {
  AnnotatedExample ex;
  ex.id = "kelly";
  ex.tokens = split_whitespace("Kelly arrived in Seoul from Beijing to brief Yoon .");
  const auto& t = ex.tokens;
  ex.records.push_back({"Transport",
                        make_span(t, 1, 2),
                        {{"Artifact", make_span(t, 0, 1)},
                         {"Origin", make_span(t, 5, 6)},
                         {"Destination", make_span(t, 3, 4)}}});
  ex.records.push_back({"Meet",
                        make_span(t, 7, 8),
                        {{"Entity", make_span(t, 0, 1)}, {"Entity", make_span(t, 8, 9)}}});
  return ex;
}

// Fresh scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("demoee_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  std::string file(const std::string& name) const { return (path_ / name).string(); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

}  // namespace demoee::testing

#endif  // DEMOEE_TESTS_UNIT_FIXTURES_HPP_
