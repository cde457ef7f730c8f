// Copyright 2026 The cbo-bench Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cbo/external_ppd.hpp"

#include <cerrno>
#include <csignal>
#include <cstring>
#include <fcntl.h>
#include <poll.h>
#include <sstream>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

#include "cbo/errors.hpp"
#include "cbo/rng.hpp"

namespace cbo {
namespace {

using Clock = std::chrono::steady_clock;

int remaining_ms(Clock::time_point deadline) {
  const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
  return left.count() <= 0 ? 0 : static_cast<int>(std::min<long long>(left.count(), 1 << 30));
}

nlohmann::json matrix_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    rows.push_back(std::vector<double>(m.row(i).data(), m.row(i).data() + m.cols()));
  return rows;
}

}  // namespace

ExternalPpdSurrogate::ExternalPpdSurrogate(std::string command, std::chrono::milliseconds timeout)
    : command_(std::move(command)), timeout_(timeout) {
  if (command_.empty()) throw std::invalid_argument("external predictor: empty command");
  if (timeout_.count() <= 0) throw std::invalid_argument("external predictor: timeout must be > 0");
}

ExternalPpdSurrogate::~ExternalPpdSurrogate() { stop(); }

std::uint64_t ExternalPpdSurrogate::state_fingerprint() const {
  return derive_seed(hash_string(command_), "timeout-ms", static_cast<std::uint64_t>(timeout_.count()));
}

std::string ExternalPpdSurrogate::describe() const { return "external predictor '" + command_ + "'"; }

void ExternalPpdSurrogate::start() const {
  int sv[2];
  if (::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, sv) != 0)
    throw InferenceError(describe() + ": socketpair failed: " + std::strerror(errno));
  const pid_t pid = ::fork();
  if (pid < 0) {
    ::close(sv[0]);
    ::close(sv[1]);
    throw InferenceError(describe() + ": fork failed: " + std::strerror(errno));
  }
  if (pid == 0) {
    // Child: only async-signal-safe calls until exec.
    ::dup2(sv[1], STDIN_FILENO);
    ::dup2(sv[1], STDOUT_FILENO);
    ::execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(sv[1]);
  pid_ = pid;
  fd_ = sv[0];
  last_status_ = -1;
  buffer_.clear();
}

void ExternalPpdSurrogate::stop() const noexcept {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
  if (pid_ > 0) {
    int status = 0;
    // Give a well-behaved child a moment to exit on EOF, then kill it.
    pid_t r = 0;
    for (int i = 0; i < 20 && (r = ::waitpid(pid_, &status, WNOHANG)) == 0; ++i) ::usleep(5000);
    if (r == 0) {
      ::kill(pid_, SIGKILL);
      r = ::waitpid(pid_, &status, 0);
    }
    if (r == pid_) last_status_ = status;
    pid_ = -1;
  }
  buffer_.clear();
}

std::string ExternalPpdSurrogate::exit_status() const {
  if (pid_ > 0) {
    int status = 0;
    if (::waitpid(pid_, &status, WNOHANG) == pid_) {
      last_status_ = status;
      pid_ = -1;
    }
  }
  if (last_status_ < 0) return "";
  std::ostringstream s;
  if (WIFEXITED(last_status_)) s << " (child exited with status " << WEXITSTATUS(last_status_) << ")";
  else if (WIFSIGNALED(last_status_)) s << " (child killed by signal " << WTERMSIG(last_status_) << ")";
  return s.str();
}

void ExternalPpdSurrogate::fail(const std::string& what) const {
  // Give an exiting child a moment so the diagnostic can include its status.
  if (pid_ > 0) {
    for (int i = 0; i < 20; ++i) {
      int status = 0;
      if (::waitpid(pid_, &status, WNOHANG) == pid_) {
        last_status_ = status;
        pid_ = -1;
        break;
      }
      ::usleep(5000);
    }
  }
  const std::string status = exit_status();
  stop();
  throw InferenceError(describe() + ": " + what + status);
}

std::vector<double> ExternalPpdSurrogate::infer(const Matrix& train_x, const Matrix& train_y,
                                                const Matrix& query_x,
                                                std::span<const double> edges) const {
  std::lock_guard lock(mutex_);
  if (fd_ < 0) start();
  const auto deadline = Clock::now() + timeout_;

  const nlohmann::json request = {{"train_x", matrix_json(train_x)},
                                  {"train_y", matrix_json(train_y)},
                                  {"query_x", matrix_json(query_x)},
                                  {"edges", std::vector<double>(edges.begin(), edges.end())},
                                  {"targets", train_y.cols()}};
  const std::string line = request.dump() + "\n";
  std::size_t sent = 0;
  while (sent < line.size()) {
    pollfd pfd{fd_, POLLOUT, 0};
    const int pr = ::poll(&pfd, 1, remaining_ms(deadline));
    if (pr == 0) fail("timed out after " + std::to_string(timeout_.count()) + " ms sending request");
    if (pr < 0) {
      if (errno == EINTR) continue;
      fail(std::string("poll failed: ") + std::strerror(errno));
    }
    const ssize_t w = ::send(fd_, line.data() + sent, line.size() - sent, MSG_NOSIGNAL);
    if (w < 0) {
      if (errno == EINTR || errno == EAGAIN) continue;
      fail(std::string("write to predictor failed: ") + std::strerror(errno));
    }
    sent += static_cast<std::size_t>(w);
  }

  std::size_t newline;
  char chunk[65536];
  while ((newline = buffer_.find('\n')) == std::string::npos) {
    pollfd pfd{fd_, POLLIN, 0};
    const int pr = ::poll(&pfd, 1, remaining_ms(deadline));
    if (pr == 0) fail("timed out after " + std::to_string(timeout_.count()) + " ms waiting for response");
    if (pr < 0) {
      if (errno == EINTR) continue;
      fail(std::string("poll failed: ") + std::strerror(errno));
    }
    const ssize_t r = ::recv(fd_, chunk, sizeof chunk, 0);
    if (r == 0) fail("predictor closed its output before responding");
    if (r < 0) {
      if (errno == EINTR || errno == EAGAIN) continue;
      fail(std::string("read from predictor failed: ") + std::strerror(errno));
    }
    buffer_.append(chunk, static_cast<std::size_t>(r));
  }
  const std::string response = buffer_.substr(0, newline);
  buffer_.erase(0, newline + 1);

  nlohmann::json parsed;
  try {
    parsed = nlohmann::json::parse(response);
  } catch (const nlohmann::json::exception& e) {
    fail(std::string("protocol violation: response is not JSON (") + e.what() + ")");
  }
  if (!parsed.is_object() || !parsed.contains("probs") || !parsed["probs"].is_array())
    fail("protocol violation: response lacks a \"probs\" array");
  const auto& probs = parsed["probs"];
  const std::size_t m = static_cast<std::size_t>(query_x.rows());
  const std::size_t k = static_cast<std::size_t>(train_y.cols());
  const std::size_t B = edges.size() - 1;
  if (probs.size() != m) fail("protocol violation: expected " + std::to_string(m) + " query rows, got " + std::to_string(probs.size()));
  std::vector<double> out;
  out.reserve(m * k * B);
  for (std::size_t q = 0; q < m; ++q) {
    const auto& per_q = probs[q];
    if (!per_q.is_array() || per_q.size() != k)
      fail("protocol violation: query " + std::to_string(q) + " does not have " + std::to_string(k) + " targets");
    for (std::size_t t = 0; t < k; ++t) {
      const auto& row = per_q[t];
      if (!row.is_array() || row.size() != B)
        fail("protocol violation: query " + std::to_string(q) + ", target " + std::to_string(t) +
             " does not have " + std::to_string(B) + " buckets");
      for (const auto& v : row) {
        if (!v.is_number()) fail("protocol violation: non-numeric probability");
        out.push_back(v.get<double>());
      }
    }
  }
  return out;
}

void ExternalPpdSurrogate::handshake(std::size_t d) const {
  Matrix x = Matrix::Constant(1, static_cast<Eigen::Index>(d), 0.5);
  Matrix y = Matrix::Zero(1, 1);
  const std::vector<double> edges = equal_width_edges(-3.0, 3.0, 10);
  predict(x, y, x, edges);
}

std::unique_ptr<PpdSurrogate> external_ppd_surrogate(const std::string& command,
                                                     std::chrono::milliseconds timeout) {
  return std::make_unique<ExternalPpdSurrogate>(command, timeout);
}

}  // namespace cbo
