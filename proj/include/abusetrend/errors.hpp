#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "abusetrend/date.hpp"

namespace abusetrend {

// Base for everything raised while reading input files.
class IngestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A malformed data row. line() is the 1-based physical line in the file.
class ParseError : public IngestError {
 public:
  ParseError(const std::string& path, std::size_t line, const std::string& what)
      : IngestError(path + ":" + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class SchemaError : public IngestError {
 public:
  using IngestError::IngestError;
};

// Days of the requested window that have no row in a counts file.
class GapError : public IngestError {
 public:
  GapError(const std::string& what, std::vector<Date> missing)
      : IngestError(what), missing_(std::move(missing)) {}
  const std::vector<Date>& missing() const { return missing_; }

 private:
  std::vector<Date> missing_;
};

class ValidationError : public IngestError {
 public:
  using IngestError::IngestError;
};

// Two series that must share a start date and length do not.
class AlignmentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace abusetrend
