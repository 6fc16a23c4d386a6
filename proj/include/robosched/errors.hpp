#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace robosched {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed scenario document. `where` is a JSON pointer or "line N".
class ParseError : public Error {
 public:
  ParseError(std::string where, const std::string& what)
      : Error(where + ": " + what), where_(std::move(where)) {}
  const std::string& where() const { return where_; }

 private:
  std::string where_;
};

/// Scenario parsed but violates a type invariant (cycle, unknown location, ...).
class ValidationError : public Error {
 public:
  ValidationError(std::string where, const std::string& what)
      : Error(where + ": " + what), where_(std::move(where)) {}
  const std::string& where() const { return where_; }

 private:
  std::string where_;
};

/// A plan line that does not match the step grammar.
class SchemaError : public Error {
 public:
  SchemaError(std::size_t line, std::string reason)
      : Error("line " + std::to_string(line) + ": " + reason), line_(line), reason_(std::move(reason)) {}
  std::size_t line() const { return line_; }
  const std::string& reason() const { return reason_; }

 private:
  std::size_t line_;
  std::string reason_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class RealizationError : public Error {
 public:
  using Error::Error;
};

class UnassignableTask : public Error {
 public:
  explicit UnassignableTask(const std::string& task)
      : Error("no single robot covers the skills of task " + task), task_(task) {}
  const std::string& task() const { return task_; }

 private:
  std::string task_;
};

class EmptyInput : public Error {
 public:
  using Error::Error;
};

}  // namespace robosched
