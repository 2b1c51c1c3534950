#pragma once

#include <stdexcept>
#include <string>

namespace sigid {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument or infeasible configuration.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Input shorter than the operation needs (recording < FFT size, N < 2, ...).
class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

class EmptyInputError : public Error {
 public:
  using Error::Error;
};

/// Zero-variance input: no level structure to estimate a floor from.
class DegenerateSpectrumError : public Error {
 public:
  using Error::Error;
};

/// A sensing method that exists only as registry metadata was selected.
class UnsupportedMethodError : public Error {
 public:
  UnsupportedMethodError(std::string method_name, const std::string& what)
      : Error(what), method_(std::move(method_name)) {}
  const std::string& method() const noexcept { return method_; }

 private:
  std::string method_;
};

/// Malformed IQ file, sidecar, or report.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Sidecar sample_count disagrees with the data file size.
class LengthMismatchError : public FormatError {
 public:
  using FormatError::FormatError;
};

/// Missing or unreadable file.
class FileError : public Error {
 public:
  using Error::Error;
};

/// Config file problem anchored to a source line (1-based, 0 when unknown).
class ConfigError : public Error {
 public:
  ConfigError(std::string file, int line, const std::string& message)
      : Error(file + ":" + std::to_string(line) + ": " + message),
        file_(std::move(file)),
        line_(line) {}
  const std::string& file() const noexcept { return file_; }
  int line() const noexcept { return line_; }

 private:
  std::string file_;
  int line_;
};

}  // namespace sigid
