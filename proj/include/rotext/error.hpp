// Copyright (c) 2026 The rotext authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace rotext {

// Mirrors the status codes of the public C API (rotext.h).
enum class Status {
  Ok = 0,
  InvalidArgument = 1,
  Io = 2,
  Parse = 3,
  Infeasible = 4,
  Degenerate = 5,
  Overflow = 6,
};

const char* status_name(Status s);

class Error : public std::runtime_error {
 public:
  Error(Status status, const std::string& message)
      : std::runtime_error(message), status_(status) {}

  Status status() const { return status_; }

 private:
  Status status_;
};

[[noreturn]] inline void fail(Status status, const std::string& message) {
  throw Error(status, message);
}

}  // namespace rotext
