#pragma once

#include <stdexcept>
#include <string>

namespace popmc {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Syntax or validation failure in a `.pop` / `.prop` source.
class ParseError : public Error {
 public:
  ParseError(const std::string& msg, int line, int column)
      : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + msg),
        line_(line),
        column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

// Model-level semantic errors (density dependence, unsupported rates, ...).
class ModelError : public Error {
 public:
  using Error::Error;
};

// Numerical failure; carries the time at which the integrator gave up.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& msg, double failure_time)
      : Error(msg + " (t=" + std::to_string(failure_time) + ")"), failure_time_(failure_time) {}
  double failure_time() const { return failure_time_; }

 private:
  double failure_time_;
};

}  // namespace popmc
