#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace transduct {

/// Broad failure class; the CLI maps it onto its exit code.
enum class ErrorKind {
  Config = 1,    ///< invalid options or contract violations by the caller
  Data = 2,      ///< malformed or inconsistent input files
  Numerical = 3  ///< degenerate numerics (zero row sums, singular systems)
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::Config, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(ErrorKind::Numerical, what) {}
};

class OutOfRange : public ConfigError {
 public:
  explicit OutOfRange(const std::string& what) : ConfigError(what) {}
};

class ShapeMismatch : public ConfigError {
 public:
  explicit ShapeMismatch(const std::string& what) : ConfigError(what) {}
};

class EmptyInput : public ConfigError {
 public:
  explicit EmptyInput(const std::string& what) : ConfigError(what) {}
};

class LengthMismatch : public ConfigError {
 public:
  explicit LengthMismatch(const std::string& what) : ConfigError(what) {}
};

class InsufficientSamples : public ConfigError {
 public:
  explicit InsufficientSamples(const std::string& what) : ConfigError(what) {}
};

class InvalidSpec : public ConfigError {
 public:
  explicit InvalidSpec(const std::string& what) : ConfigError(what) {}
};

class NonFinite : public DataError {
 public:
  explicit NonFinite(const std::string& what) : DataError(what) {}
};

/// A row of a matrix that must be normalized sums to zero (or less).
class ZeroRowSum : public NumericalError {
 public:
  explicit ZeroRowSum(std::size_t row)
      : NumericalError("row " + std::to_string(row) + " has non-positive sum"), row_(row) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

/// Linear system of the harmonic solution has no unique solution.
class SingularSystem : public NumericalError {
 public:
  explicit SingularSystem(const std::string& what) : NumericalError(what) {}
};

/// Input file errors carry file and line context.
class ParseError : public DataError {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& what)
      : DataError(file + ":" + std::to_string(line) + ": " + what) {}
};

class DuplicateId : public DataError {
 public:
  DuplicateId(const std::string& file, std::size_t line, const std::string& id)
      : DataError(file + ":" + std::to_string(line) + ": duplicate id '" + id + "'") {}
};

class UnknownId : public DataError {
 public:
  UnknownId(const std::string& file, std::size_t line, const std::string& id)
      : DataError(file + ":" + std::to_string(line) + ": unknown id '" + id + "'") {}
};

class DimensionMismatch : public DataError {
 public:
  DimensionMismatch(const std::string& file, std::size_t line, std::size_t expected, std::size_t got)
      : DataError(file + ":" + std::to_string(line) + ": expected " + std::to_string(expected) +
                  " fields, got " + std::to_string(got)) {}
};

}  // namespace transduct
