// Copyright 2026 The serpaudit Authors.
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

// Sentiment provider backed by a child process.
//
// Line protocol, one exchange per text:
//   request:  the text on a single line, with '\' '\n' '\r' '\t' written as
//             the two-character escapes \\ \n \r \t
//   response: one line holding a decimal polarity in [-1, 1]
// The child is started once and kept alive; exchanges are serialized.

#pragma once

#include <csignal>
#include <cstdio>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include <fcntl.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include "serpaudit/sentiment.hpp"

namespace serpaudit {

inline std::string escape_protocol_line(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

inline std::string unescape_protocol_line(std::string_view line) {
  std::string out;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] != '\\' || i + 1 == line.size()) {
      out.push_back(line[i]);
      continue;
    }
    switch (line[++i]) {
      case 'n': out.push_back('\n'); break;
      case 'r': out.push_back('\r'); break;
      case 't': out.push_back('\t'); break;
      default: out.push_back(line[i]);
    }
  }
  return out;
}

class ProcessProvider final : public SentimentProvider {
 public:
  // `command` is run through /bin/sh -c.
  explicit ProcessProvider(std::string command) : command_(std::move(command)) {
    std::signal(SIGPIPE, SIG_IGN);
    int to_child[2];
    int from_child[2];
    if (pipe(to_child) != 0) throw Error("pipe() failed");
    if (pipe(from_child) != 0) {
      close(to_child[0]);
      close(to_child[1]);
      throw Error("pipe() failed");
    }
    pid_ = fork();
    if (pid_ < 0) throw Error("fork() failed");
    if (pid_ == 0) {
      dup2(to_child[0], STDIN_FILENO);
      dup2(from_child[1], STDOUT_FILENO);
      close(to_child[0]);
      close(to_child[1]);
      close(from_child[0]);
      close(from_child[1]);
      execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
      _exit(127);
    }
    close(to_child[0]);
    close(from_child[1]);
    in_ = fdopen(to_child[1], "w");
    out_ = fdopen(from_child[0], "r");
    if (!in_ || !out_) throw Error("fdopen() failed");
  }

  ProcessProvider(const ProcessProvider&) = delete;
  ProcessProvider& operator=(const ProcessProvider&) = delete;

  ~ProcessProvider() override {
    if (in_) std::fclose(in_);
    if (out_) std::fclose(out_);
    if (pid_ > 0) {
      int status = 0;
      waitpid(pid_, &status, 0);
    }
  }

  Polarity score(std::string_view text) const override {
    std::lock_guard lock(mu_);
    const std::string request = escape_protocol_line(text) + "\n";
    if (std::fwrite(request.data(), 1, request.size(), in_) != request.size() ||
        std::fflush(in_) != 0)
      throw ScoringError("provider process '" + command_ + "' closed its input");
    std::string reply;
    for (int c; (c = std::fgetc(out_)) != EOF && c != '\n';)
      reply.push_back(static_cast<char>(c));
    if (reply.empty() && std::feof(out_))
      throw ScoringError("provider process '" + command_ + "' exited");
    double value = 0;
    try {
      std::size_t used = 0;
      value = std::stod(reply, &used);
      if (!detail::trim(std::string_view(reply).substr(used)).empty())
        throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ScoringError("provider returned non-numeric reply '" + reply + "'");
    }
    if (!(value >= -1.0 && value <= 1.0))
      throw ScoringError("provider returned polarity outside [-1, 1]: " + reply);
    return Polarity(value);
  }

  std::string name() const override { return "process:" + command_; }

 private:
  std::string command_;
  pid_t pid_ = -1;
  std::FILE* in_ = nullptr;
  std::FILE* out_ = nullptr;
  mutable std::mutex mu_;
};

}  // namespace serpaudit
