// src/decoder_protocol.cpp

// Copyright 2026  The cswitch Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include <cerrno>
#include <chrono>
#include <csignal>
#include <cstring>
#include <fstream>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

#include <fmt/format.h>

#include "cswitch/error.hpp"
#include "cswitch/semisup.hpp"

namespace cswitch {

ModelHandle NullTrainer::train(const TrainRequest& request) {
  ModelHandle h;
  h.role = request.role;
  h.pass = request.pass;
  h.state = {{"role", request.role},
             {"pass", request.pass},
             {"trainset", request.trainset ? request.trainset->size() : 0}};
  h.state_path = request.out_dir / fmt::format("model.{}.pass{}.json", request.role, request.pass);
  std::ofstream out(h.state_path);
  if (!out) throw DataError("cannot write '" + h.state_path.string() + "'");
  out << h.state.dump(2) << '\n';
  return h;
}

namespace {

class Child {
 public:
  Child(const std::string& command, const std::string& model_path) {
    int in_pipe[2], out_pipe[2];
    if (pipe(in_pipe) != 0 || pipe(out_pipe) != 0)
      throw DecoderProtocolError(std::string("pipe: ") + std::strerror(errno));
    pid_ = fork();
    if (pid_ < 0) throw DecoderProtocolError(std::string("fork: ") + std::strerror(errno));
    if (pid_ == 0) {
      setpgid(0, 0);
      dup2(in_pipe[0], STDIN_FILENO);
      dup2(out_pipe[1], STDOUT_FILENO);
      close(in_pipe[0]);
      close(in_pipe[1]);
      close(out_pipe[0]);
      close(out_pipe[1]);
      setenv("CSWITCH_MODEL", model_path.c_str(), 1);
      execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
      _exit(127);
    }
    setpgid(pid_, pid_);
    close(in_pipe[0]);
    close(out_pipe[1]);
    to_child_ = in_pipe[1];
    from_child_ = out_pipe[0];
    fcntl(to_child_, F_SETFD, FD_CLOEXEC);
    fcntl(from_child_, F_SETFD, FD_CLOEXEC);
  }

  Child(const Child&) = delete;
  Child& operator=(const Child&) = delete;

  ~Child() {
    close_input();
    if (from_child_ >= 0) close(from_child_);
    if (pid_ > 0) {
      int status = 0;
      if (waitpid(pid_, &status, WNOHANG) == 0) {
        kill(-pid_, SIGTERM);
        waitpid(pid_, &status, 0);
      }
    }
  }

  void send(const std::string& line) {
    std::size_t off = 0;
    while (off < line.size()) {
      const ssize_t n = ::write(to_child_, line.data() + off, line.size() - off);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw DecoderProtocolError(std::string("decoder input closed: ") + std::strerror(errno));
      }
      off += static_cast<std::size_t>(n);
    }
  }

  std::string receive(double timeout_s) {
    const auto deadline = std::chrono::steady_clock::now() + std::chrono::duration<double>(timeout_s);
    while (true) {
      const std::size_t nl = buffer_.find('\n');
      if (nl != std::string::npos) {
        std::string line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        return line;
      }
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
      if (left.count() <= 0) throw DecoderProtocolError(fmt::format("decoder timed out after {} s", timeout_s));
      pollfd pfd{from_child_, POLLIN, 0};
      const int rc = poll(&pfd, 1, static_cast<int>(left.count()));
      if (rc < 0) {
        if (errno == EINTR) continue;
        throw DecoderProtocolError(std::string("poll: ") + std::strerror(errno));
      }
      if (rc == 0) continue;
      char chunk[4096];
      const ssize_t n = ::read(from_child_, chunk, sizeof chunk);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw DecoderProtocolError(std::string("read: ") + std::strerror(errno));
      }
      if (n == 0) throw DecoderProtocolError("decoder closed its output early");
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

  void close_input() {
    if (to_child_ >= 0) close(to_child_);
    to_child_ = -1;
  }

  int wait() {
    int status = 0;
    waitpid(pid_, &status, 0);
    pid_ = -1;
    return WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
  }

 private:
  pid_t pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
};

struct IgnoreSigpipe {
  struct sigaction old {};
  IgnoreSigpipe() {
    struct sigaction sa {};
    sa.sa_handler = SIG_IGN;
    sigaction(SIGPIPE, &sa, &old);
  }
  ~IgnoreSigpipe() { sigaction(SIGPIPE, &old, nullptr); }
};

std::string substitute_model(std::string command, const std::string& path) {
  const std::string key = "{model}";
  for (std::size_t at = command.find(key); at != std::string::npos; at = command.find(key, at + path.size()))
    command.replace(at, key.size(), path);
  return command;
}

}  // namespace

ExternalDecoder::ExternalDecoder(std::string command, double timeout_s, const LangRegistry& langs)
    : command_(std::move(command)), timeout_s_(timeout_s), langs_(langs) {
  if (command_.empty()) throw UsageError("external decoder needs a command");
  if (!(timeout_s_ > 0.0)) throw UsageError("decoder timeout must be positive");
}

std::vector<DecodeResult> ExternalDecoder::decode(const ModelHandle& model,
                                                  std::span<const Utterance* const> utterances,
                                                  std::span<const LanguagePair> pairs) {
  IgnoreSigpipe guard;
  const std::string path = model.state_path.string();
  Child child(substitute_model(command_, path), path);
  std::vector<DecodeResult> out;
  out.reserve(utterances.size() * pairs.size());
  for (const Utterance* u : utterances) {
    for (const LanguagePair& p : pairs) {
      child.send(u->id + '\t' + p.id + '\n');
      const std::string line = child.receive(timeout_s_);
      DecodeResult r = parse_decode_line(line, langs_, fmt::format("response to {}\t{}", u->id, p.id));
      if (r.utt_id != u->id || r.pair != p.id)
        throw DecoderProtocolError(fmt::format("response for {}\t{} answers request {}\t{}", r.utt_id, r.pair, u->id, p.id));
      out.push_back(std::move(r));
    }
  }
  child.close_input();
  if (const int rc = child.wait(); rc != 0)
    throw DecoderProtocolError(fmt::format("decoder exited with status {}", rc));
  return out;
}

}  // namespace cswitch
