#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace thermpc {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or invalid user input: documents, CSV files, scenario files.
/// The CLI maps these to exit code 1.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Syntax error in a structured document, with a 1-based line/column.
class SyntaxError : public InputError {
 public:
  SyntaxError(const std::string& what, std::size_t line, std::size_t column)
      : InputError(what + " (line " + std::to_string(line) + ", column " +
                   std::to_string(column) + ")"),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// A field violates a named validation rule.
class ValidationError : public InputError {
 public:
  ValidationError(std::string field, std::string rule)
      : InputError(field + ": " + rule), field_(std::move(field)), rule_(std::move(rule)) {}

  const std::string& field() const noexcept { return field_; }
  const std::string& rule() const noexcept { return rule_; }

 private:
  std::string field_;
  std::string rule_;
};

/// A cross-reference (zone id, channel name, schedule id) does not resolve.
class UnresolvedReference : public InputError {
 public:
  UnresolvedReference(const std::string& field, std::string name)
      : InputError(field + ": unresolved reference '" + name + "'"), name_(std::move(name)) {}

  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

/// The thermal network splits into a component that never reaches a boundary.
class DisconnectedNetwork : public InputError {
 public:
  using InputError::InputError;
};

/// Not enough disturbance data to cover a requested window.
class CoverageError : public InputError {
 public:
  using InputError::InputError;
};

/// Vector or matrix sizes disagree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Runtime numerical failure (instability, non-finite values, solver breakdown).
/// The CLI maps these to exit code 2.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Forward-Euler step size exceeds the stability limit of some node.
class InstabilityError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Failure inside the closed loop, tagged with the control step at which it happened.
class StepError : public NumericalError {
 public:
  StepError(std::size_t step, const std::string& what)
      : NumericalError("step " + std::to_string(step) + ": " + what), step_(step) {}

  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

}  // namespace thermpc
