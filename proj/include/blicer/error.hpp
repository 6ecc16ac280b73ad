// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace blicer {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input data: vector files, dictionaries, TSV dumps, checkpoints.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Inputs that parse but violate a precondition (unknown word, zero norm,
/// dimension mismatch, overlapping splits, ...).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration value; the message names the offending key.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Training diverged (non-finite loss) or was given nothing to train on.
class TrainingError : public Error {
 public:
  using Error::Error;
};

/// External scorer process violated the line protocol.
class ScorerProtocolError : public Error {
 public:
  enum class Kind { ProcessFailed, MalformedScore, OutOfRange, CountMismatch };

  ScorerProtocolError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

}  // namespace blicer
