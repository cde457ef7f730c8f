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

#pragma once

#include <chrono>
#include <mutex>
#include <string>
#include <sys/types.h>

#include "cbo/ppd.hpp"

namespace cbo {

/// Adapter for an out-of-process PPD predictor speaking newline-delimited
/// JSON over stdin/stdout:
///   request:  {"train_x": [[...]], "train_y": [[...]], "query_x": [[...]],
///              "edges": [...], "targets": k}
///   response: {"probs": [[[...]]]}   (query x targets x buckets)
/// The child is started lazily through /bin/sh -c and restarted after any
/// failure. Calls are serialized per instance.
class ExternalPpdSurrogate final : public PpdSurrogate {
 public:
  explicit ExternalPpdSurrogate(std::string command,
                                std::chrono::milliseconds timeout = std::chrono::seconds(60));
  ~ExternalPpdSurrogate() override;

  ExternalPpdSurrogate(const ExternalPpdSurrogate&) = delete;
  ExternalPpdSurrogate& operator=(const ExternalPpdSurrogate&) = delete;

  /// Sends a one-point probe request of dimension d; throws InferenceError
  /// with a diagnostic when the predictor does not answer correctly.
  void handshake(std::size_t d = 1) const;

  const std::string& command() const noexcept { return command_; }
  std::uint64_t state_fingerprint() const override;
  std::string describe() const override;

 protected:
  std::vector<double> infer(const Matrix& train_x, const Matrix& train_y, const Matrix& query_x,
                            std::span<const double> edges) const override;

 private:
  void start() const;
  void stop() const noexcept;
  [[noreturn]] void fail(const std::string& what) const;
  std::string exit_status() const;

  std::string command_;
  std::chrono::milliseconds timeout_;
  mutable std::mutex mutex_;
  mutable pid_t pid_ = -1;
  mutable int fd_ = -1;
  mutable int last_status_ = -1;
  mutable std::string buffer_;
};

std::unique_ptr<PpdSurrogate> external_ppd_surrogate(
    const std::string& command, std::chrono::milliseconds timeout = std::chrono::seconds(60));

}  // namespace cbo
