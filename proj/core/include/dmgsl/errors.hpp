// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace dmgsl {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not conform to the operation's rule.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A value lies outside the domain of a function (log of a non-positive
/// number, an all-masked softmax row, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A caller broke an API precondition (non-scalar loss, alpha not summing
/// to one, ...).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file. The message carries the offending line number.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Well-formed input that violates the expected schema.
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// Input data that cannot be processed (fully-missing column, ...).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent configuration or hyperparameters.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure during training or evaluation (NaN loss, zero-norm
/// embedding row, ...).
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace dmgsl
