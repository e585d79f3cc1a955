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

#include "demoee/adapter_backend.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <csignal>
#include <cstring>

#include "demoee/errors.hpp"

namespace demoee {

namespace {

std::string replace_all(std::string text, const std::string& from, const std::string& to) {
  if (from.empty() || from == to) return text;
  std::size_t pos = 0;
  while ((pos = text.find(from, pos)) != std::string::npos) {
    text.replace(pos, from.size(), to);
    pos += to.size();
  }
  return text;
}

}  // namespace

AdapterBackend::AdapterBackend(const std::string& executable, SpecialTokens special,
                               TokenMapping mapping)
    : executable_(executable), special_(std::move(special)), mapping_(std::move(mapping)) {
  int in_pipe[2], out_pipe[2];
  if (pipe(in_pipe) != 0 || pipe(out_pipe) != 0) throw Error("adapter: pipe() failed");
  std::signal(SIGPIPE, SIG_IGN);
  const pid_t pid = fork();
  if (pid < 0) throw Error("adapter: fork() failed");
  if (pid == 0) {
    dup2(in_pipe[0], STDIN_FILENO);
    dup2(out_pipe[1], STDOUT_FILENO);
    close(in_pipe[0]);
    close(in_pipe[1]);
    close(out_pipe[0]);
    close(out_pipe[1]);
    execl(executable.c_str(), executable.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  close(in_pipe[0]);
  close(out_pipe[1]);
  pid_ = pid;
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
}

AdapterBackend::~AdapterBackend() {
  if (to_child_ >= 0) close(to_child_);
  if (from_child_ >= 0) close(from_child_);
  if (pid_ > 0) {
    int status = 0;
    waitpid(pid_, &status, 0);
  }
}

nlohmann::json AdapterBackend::call(const nlohmann::json& request) const {
  std::lock_guard<std::mutex> lock(mutex_);
  const std::string line = request.dump() + "\n";
  std::size_t sent = 0;
  while (sent < line.size()) {
    const ssize_t n = write(to_child_, line.data() + sent, line.size() - sent);
    if (n <= 0) throw Error("adapter '" + executable_ + "': write failed");
    sent += static_cast<std::size_t>(n);
  }
  std::size_t nl;
  while ((nl = buffer_.find('\n')) == std::string::npos) {
    char chunk[4096];
    const ssize_t n = read(from_child_, chunk, sizeof chunk);
    if (n <= 0) throw Error("adapter '" + executable_ + "': process closed its output");
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
  const std::string reply = buffer_.substr(0, nl);
  buffer_.erase(0, nl + 1);
  nlohmann::json out;
  try {
    out = nlohmann::json::parse(reply);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error("adapter '" + executable_ + "': bad reply: " + e.what());
  }
  if (out.contains("error")) throw Error("adapter: " + out["error"].dump());
  return out;
}

std::string AdapterBackend::to_external(std::string text) const {
  text = replace_all(std::move(text), special_.mask_token, mapping_.mask_token);
  return replace_all(std::move(text), special_.sep_token, mapping_.sep_token);
}

std::string AdapterBackend::from_external(std::string text) const {
  return replace_all(std::move(text), mapping_.mask_token, special_.mask_token);
}

double AdapterBackend::train_step(std::span<const TrainingExample> batch, double learning_rate) {
  nlohmann::json items = nlohmann::json::array();
  for (const auto& ex : batch)
    items.push_back({{"input", to_external(ex.input.text)}, {"target", ex.target}});
  return call({{"op", "train_step"}, {"batch", items}, {"learning_rate", learning_rate}})
      .at("loss")
      .get<double>();
}

std::string AdapterBackend::generate(const ComposedInput& input, std::size_t max_length) const {
  return from_external(
      call({{"op", "generate"}, {"input", to_external(input.text)}, {"max_length", max_length}})
          .at("output")
          .get<std::string>());
}

std::string AdapterBackend::parameters_fingerprint() const {
  return call({{"op", "fingerprint"}}).at("fingerprint").get<std::string>();
}

void AdapterBackend::save(const std::string& path) const { call({{"op", "save"}, {"path", path}}); }

void AdapterBackend::load(const std::string& path) { call({{"op", "load"}, {"path", path}}); }

}  // namespace demoee
