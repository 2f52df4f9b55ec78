// Copyright 2026 The moldchat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace moldchat {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller violated an operation's precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Input data failed a schema or range check.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Two knowledge files that must agree (rows, columns) do not.
class IngestError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Model output could not be parsed into the requested schema. Carries the
/// offending text so the caller can decide between retry and fallback.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::string offending_text)
      : Error(what), offending_text_(std::move(offending_text)) {}

  const std::string& offending_text() const noexcept { return offending_text_; }

 private:
  std::string offending_text_;
};

/// Network-level failure talking to a remote backend. Retryable.
class TransportError : public Error {
 public:
  TransportError(const std::string& what, int attempts)
      : Error(what + " (after " + std::to_string(attempts) + " attempt(s))"),
        attempts_(attempts) {}

  int attempts() const noexcept { return attempts_; }

 private:
  int attempts_;
};

/// Scripted backend had no rule for a request.
class FixtureMissError : public Error {
 public:
  explicit FixtureMissError(std::string stage)
      : Error("scripted fixture has no rule matching stage '" + stage + "'"),
        stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

/// A tool cannot run because its model or store was never loaded.
class ToolUnavailableError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure (NaN/Inf) inside training or sampling.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace moldchat
