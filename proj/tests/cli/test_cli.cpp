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

#include <doctest.h>
#include <httplib.h>
#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>
#include <string>
#include <thread>

#include "demoee/corpus.hpp"
#include "demoee/util.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace demoee;

namespace {

const std::string kCli = DEMOEE_CLI;
const std::string kToySchema = std::string(DEMOEE_DATA_DIR) + "/schemas/toy5.json";
const std::string kAceSchema = std::string(DEMOEE_DATA_DIR) + "/schemas/ace05.json";

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

class Workspace {
 public:
  Workspace() {
    root_ = fs::temp_directory_path() / ("demoee_cli_" + std::to_string(::getpid()));
    fs::remove_all(root_);
    fs::create_directories(root_);
  }
  ~Workspace() { fs::remove_all(root_); }
  std::string path(const std::string& rel) const { return (root_ / rel).string(); }

  Result run(const std::string& args) const {
    const std::string err_file = path("stderr.txt");
    const std::string cmd = kCli + " " + args + " 2>" + err_file;
    Result r;
    FILE* pipe = ::popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::array<char, 4096> buf{};
    while (std::fgets(buf.data(), static_cast<int>(buf.size()), pipe)) r.out += buf.data();
    const int status = ::pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.err = slurp(err_file);
    return r;
  }

  static std::string slurp(const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

 private:
  fs::path root_;
};

json read_json(const std::string& p) { return json::parse(Workspace::slurp(p)); }

std::string synth(const Workspace& w, const std::string& name, std::size_t n, uint64_t seed,
                  const std::string& schema = kToySchema) {
  const auto r = w.run("synth --schema " + schema + " --n " + std::to_string(n) + " --seed " +
                       std::to_string(seed) + " --out " + w.path(name));
  REQUIRE(r.code == 0);
  return w.path(name + "/corpus.jsonl");
}

}  // namespace

TEST_CASE("synth is deterministic and writes a manifest") {
  Workspace w;
  const auto a = synth(w, "a", 200, 7), b = synth(w, "b", 200, 7);
  CHECK(sha256_file(a) == sha256_file(b));
  const auto m = read_json(w.path("a/manifest.json"));
  CHECK(m["command"] == "synth");
  CHECK(m["seeds"].size() >= 1);
  CHECK(m["outputs"][a] == sha256_file(a));
  CHECK(m["inputs"].contains(kToySchema));
  CHECK(m.contains("wall_time_seconds"));

  const auto empty = synth(w, "empty", 0, 7);
  CHECK(fs::file_size(empty) == 0);
}

TEST_CASE("invalid inputs exit with code 2") {
  Workspace w;
  std::ofstream(w.path("bad.json")) << R"({"event_types":[{"name":"X","roles":["x is y"]}]})";
  auto r = w.run("synth --schema " + w.path("bad.json") + " --n 3 --out " + w.path("o"));
  CHECK(r.code == 2);
  CHECK(r.err.find("x is y") != std::string::npos);

  std::ofstream(w.path("broken.json")) << "{";
  CHECK(w.run("synth --schema " + w.path("broken.json") + " --n 3 --out " + w.path("o")).code == 2);
  CHECK(w.run("synth --n 3 --out " + w.path("o")).code == 2);
  CHECK(w.run("nonsense").code == 2);
  CHECK(w.run("split --schema " + kToySchema + " --corpus " + w.path("missing.jsonl") + " --out " +
              w.path("o"))
            .code == 2);
}

TEST_CASE("echo predict then score gives F1 1.0") {
  Workspace w;
  const auto corpus = synth(w, "syn", 60, 3);
  auto r = w.run("train --schema " + kToySchema + " --corpus " + corpus +
                 " --backend echo --epochs 1 --out " + w.path("model"));
  REQUIRE(r.code == 0);
  CHECK(r.out.find("negative sampling rate m = 11") != std::string::npos);
  for (const char* f :
       {"model.bin", "meta.json", "loss_curve.csv", "pipeline.json", "manifest.json"})
    CHECK(fs::exists(w.path(std::string("model/") + f)));

  r = w.run("predict --schema " + kToySchema + " --corpus " + corpus + " --model " +
            w.path("model") + " --out " + w.path("pred"));
  REQUIRE(r.code == 0);
  const auto pm = read_json(w.path("pred/manifest.json"));
  CHECK(pm["notes"]["parameters_unchanged"] == true);

  r = w.run("score --schema " + kToySchema + " --gold " + corpus + " --pred " +
            w.path("pred/predictions.jsonl") + " --out " + w.path("score"));
  REQUIRE(r.code == 0);
  const auto report = read_json(w.path("score/report.json"));
  CHECK(report["trig_c"]["f1"] == 1.0);
  CHECK(report["arg_c"]["f1"] == 1.0);
  CHECK(fs::exists(w.path("score/per_type.csv")));
}

TEST_CASE("score rejects predictions for unknown sentences") {
  Workspace w;
  const auto gold = synth(w, "g", 5, 1);
  std::ofstream(w.path("pred.jsonl")) << R"({"id":"ghost","tokens":["a"],"records":[]})" << "\n";
  CHECK(w.run("score --schema " + kToySchema + " --gold " + gold + " --pred " +
              w.path("pred.jsonl") + " --out " + w.path("s"))
            .code == 2);
}

TEST_CASE("config file values with flags winning") {
  Workspace w;
  std::ofstream(w.path("cfg.json")) << json{{"schema", kToySchema}, {"n", 7}, {"seed", 4}}.dump();
  auto r = w.run("--config " + w.path("cfg.json") + " synth --out " + w.path("a"));
  REQUIRE(r.code == 0);
  CHECK(read_json(w.path("a/manifest.json"))["config"]["n"] == 7);
  r = w.run("--config " + w.path("cfg.json") + " synth --n 3 --out " + w.path("b"));
  REQUIRE(r.code == 0);
  const auto m = read_json(w.path("b/manifest.json"));
  CHECK(m["config"]["n"] == 3);
  CHECK(m["seeds"]["master"] == 4);

  std::ofstream(w.path("bad_cfg.json")) << json{{"n", "many"}}.dump();
  CHECK(w.run("--config " + w.path("bad_cfg.json") + " synth --schema " + kToySchema + " --out " +
              w.path("c"))
            .code == 2);
}

TEST_CASE("k-shot split obeys the count law") {
  Workspace w;
  const auto corpus = synth(w, "syn", 300, 5, kAceSchema);
  const auto r = w.run("split --schema " + kAceSchema + " --corpus " + corpus +
                       " --mode kshot --k 5 --seed 2 --out " + w.path("k5"));
  REQUIRE(r.code == 0);
  const auto schema = load_schema(kAceSchema);
  const auto full = load_jsonl(corpus, schema), part = load_jsonl(w.path("k5/train.jsonl"), schema);
  for (const auto& t : schema.event_types()) {
    const std::size_t support = full.bearing(t.name).size();
    CHECK(part.bearing(t.name).size() >= std::min<std::size_t>(5, support));
  }
  const auto m = read_json(w.path("k5/manifest.json"));
  CHECK(m["notes"]["split_ids"]["train"].size() == part.size());
  CHECK(m["config"]["k"] == 5);
}

TEST_CASE("ratio 1.0 split is the identity; domain split schemas are disjoint") {
  Workspace w;
  const auto corpus = synth(w, "syn", 200, 6, kAceSchema);
  REQUIRE(w.run("split --schema " + kAceSchema + " --corpus " + corpus +
                " --mode ratio --ratio 1.0 --out " + w.path("r"))
              .code == 0);
  CHECK(Workspace::slurp(w.path("r/train.jsonl")) == Workspace::slurp(corpus));

  REQUIRE(w.run("split --schema " + kAceSchema + " --corpus " + corpus +
                " --mode domain --top-n 10 --out " + w.path("d"))
              .code == 0);
  const auto src = load_schema(w.path("d/src_schema.json"));
  const auto tgt = load_schema(w.path("d/tgt_schema.json"));
  CHECK(src.size() == 10);
  CHECK(tgt.size() == 23);
  for (const auto& t : src.event_types()) CHECK_FALSE(tgt.contains(t.name));
  for (const char* f : {"src_train", "src_eval", "tgt_train", "tgt_eval"})
    CHECK(fs::exists(w.path(std::string("d/") + f + ".jsonl")));
}

TEST_CASE("robustness writes a report per variant") {
  Workspace w;
  const auto train = synth(w, "tr", 40, 1), eval = synth(w, "ev", 20, 2);
  const auto r =
      w.run("robustness --schema " + kToySchema + " --corpus " + train + " --eval-corpus " + eval +
            " --backend echo --epochs 1 --out " + w.path("rob"));
  REQUIRE(r.code == 0);
  const auto m = read_json(w.path("rob/manifest.json"));
  CHECK(m["config"]["fraction"] == 0.4);
  std::map<std::string, std::string> digest;
  for (const auto& row : m["notes"]["variants"])
    digest[row["variant"].get<std::string>()] = row["training_inputs_digest"].get<std::string>();
  REQUIRE(digest.size() == 5);
  for (const char* v :
       {"clean", "test-perturbation", "train-test-perturbation", "test-drop", "train-test-drop"})
    CHECK(fs::exists(w.path(std::string("rob/") + v + "/report.json")));
  CHECK(digest["test-perturbation"] == digest["clean"]);
  CHECK(digest["test-drop"] == digest["clean"]);
  CHECK(digest["train-test-perturbation"] != digest["clean"]);
  CHECK(digest["train-test-drop"] != digest["clean"]);
  CHECK(fs::exists(w.path("rob/comparison.csv")));
  CHECK(r.out.find("| variant |") != std::string::npos);
}

TEST_CASE("sweep and demos") {
  Workspace w;
  const auto train = synth(w, "tr", 60, 1), eval = synth(w, "ev", 10, 2);
  auto r = w.run("sweep --schema " + kToySchema + " --corpus " + train + " --eval-corpus " + eval +
                 " --backend echo --epochs 1 --mode kshot --k 2 --seeds 3 --out " + w.path("sw"));
  REQUIRE(r.code == 0);
  const auto csv = Workspace::slurp(w.path("sw/sweep.csv"));
  std::size_t lines = 0;
  for (char c : csv) lines += c == '\n' ? 1 : 0;
  CHECK(lines >= 4);
  CHECK(fs::exists(w.path("sw/sweep.md")));

  r = w.run("demos --schema " + kToySchema + " --corpus " + eval + " --demo-corpus " + train +
            " --out " + w.path("dm"));
  REQUIRE(r.code == 0);
  std::ifstream in(w.path("dm/demos.jsonl"));
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) {
    const auto j = json::parse(line);
    CHECK(j.contains("event_type"));
    CHECK(j.contains("text"));
    ++n;
  }
  CHECK(n == 10 * 5);
}

TEST_CASE("adapter backend over a child process") {
  Workspace w;
  const auto corpus = synth(w, "syn", 25, 8);
  const std::string adapter = std::string(DEMOEE_TEST_DIR) + "/cli/memorize_adapter.py";
  auto r = w.run("train --schema " + kToySchema + " --corpus " + corpus +
                 " --backend adapter:" + adapter + " --epochs 1 --out " + w.path("m"));
  REQUIRE(r.code == 0);
  r = w.run("predict --schema " + kToySchema + " --corpus " + corpus + " --model " + w.path("m") +
            " --out " + w.path("p"));
  REQUIRE(r.code == 0);
  r = w.run("score --schema " + kToySchema + " --gold " + corpus + " --pred " +
            w.path("p/predictions.jsonl") + " --out " + w.path("s"));
  REQUIRE(r.code == 0);
  const auto report = read_json(w.path("s/report.json"));
  CHECK(report["trig_c"]["f1"] == 1.0);
  CHECK(report["arg_c"]["f1"] == 1.0);
}

TEST_CASE("toy backend trains and predicts from the command line") {
  Workspace w;
  const auto corpus = synth(w, "syn", 12, 9);
  std::ofstream(w.path("cfg.json"))
      << json{{"toy", {{"layers", 1}, {"heads", 2}, {"d_model", 32}, {"d_ff", 64}}}}.dump();
  auto r = w.run("--config " + w.path("cfg.json") + " train --schema " + kToySchema + " --corpus " +
                 corpus + " --epochs 2 --out " + w.path("m"));
  REQUIRE(r.code == 0);
  std::ifstream curve(w.path("m/loss_curve.csv"));
  std::size_t rows = 0;
  for (std::string line; std::getline(curve, line);) ++rows;
  CHECK(rows == 3);
  r = w.run("predict --schema " + kToySchema + " --corpus " + corpus + " --model " + w.path("m") +
            " --max-target-length 16 --out " + w.path("p"));
  REQUIRE(r.code == 0);
  CHECK(fs::exists(w.path("p/predictions.jsonl")));
  CHECK(read_json(w.path("p/manifest.json"))["notes"]["parameters_unchanged"] == true);
}

TEST_CASE("similar retrieval through an embedding service") {
  Workspace w;
  const auto pool = synth(w, "pool", 40, 1), queries = synth(w, "q", 6, 2);
  httplib::Server server;
  std::atomic<int> sentences{0};
  // Two-dimensional embedding: sentence length and a constant.
  server.Post("/embed", [&](const httplib::Request& req, httplib::Response& res) {
    json out{{"embeddings", json::array()}};
    const json body = json::parse(req.body);
    for (const auto& text : body["inputs"]) {
      ++sentences;
      out["embeddings"].push_back({static_cast<double>(text.get<std::string>().size()), 1.0});
    }
    res.set_content(out.dump(), "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread worker([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  const std::string url = "http://127.0.0.1:" + std::to_string(port) + "/embed";

  const auto r = w.run("demos --schema " + kToySchema + " --corpus " + queries + " --demo-corpus " +
                       pool + " --strategy similar --embedder-url " + url +
                       " --embedder-dim 2 --embedder-batch 8 --out " + w.path("dm"));
  INFO(r.err);
  CHECK(r.code == 0);
  CHECK(sentences >= 40);
  CHECK(read_json(w.path("dm/manifest.json"))["config"]["embedder"]["url"] == url);
  // Wrong dimension is a validation error.
  CHECK(w.run("demos --schema " + kToySchema + " --corpus " + queries + " --demo-corpus " + pool +
              " --strategy similar --embedder-url " + url + " --embedder-dim 3 --out " +
              w.path("bad"))
            .code == 2);
  server.stop();
  worker.join();
}
