// Copyright (c) 2026, The sarc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace sarc {

/// Malformed input file, schema violation, or failed precondition on user data.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An operation was asked to do something its inputs cannot support
/// (e.g. balancing with too few negatives, single-class training data).
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double gradient_norm, int iterations)
      : std::runtime_error(what), gradient_norm_(gradient_norm), iterations_(iterations) {}

  double gradient_norm() const noexcept { return gradient_norm_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double gradient_norm_;
  int iterations_;
};

/// Network-level failure or a non-success HTTP status after all retries.
/// `status` is 0 when no HTTP response was ever received.
class TransportError : public std::runtime_error {
 public:
  TransportError(const std::string& what, int status)
      : std::runtime_error(what), status_(status) {}

  int status() const noexcept { return status_; }

 private:
  int status_;
};

/// The endpoint answered, but not with a chat-completions JSON document.
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sarc
