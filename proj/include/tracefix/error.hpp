#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tracefix {

// Coarse error classes; each maps onto a CLI exit code.
enum class ErrorClass {
  Config = 1,   // usage or configuration problem
  Data = 2,     // malformed or inconsistent input data
  Numeric = 3,  // NaN/Inf during training or inference
};

class Error : public std::runtime_error {
public:
  Error(ErrorClass cls, const std::string& what) : std::runtime_error(what), cls_(cls) {}
  ErrorClass error_class() const noexcept { return cls_; }
  int exit_code() const noexcept { return static_cast<int>(cls_); }

private:
  ErrorClass cls_;
};

class ConfigError : public Error {
public:
  explicit ConfigError(const std::string& what) : Error(ErrorClass::Config, what) {}
};

class DataError : public Error {
public:
  explicit DataError(const std::string& what) : Error(ErrorClass::Data, what) {}
};

class EmptyLogError : public DataError {
public:
  explicit EmptyLogError(const std::string& what = "event log is empty") : DataError(what) {}
};

// Row-level CSV failure; line is 1-based and counts the header as line 1.
class RowError : public DataError {
public:
  RowError(std::size_t line, const std::string& what);
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

// XML/XES failure; byte_offset is 0-based into the input stream.
class XmlError : public DataError {
public:
  XmlError(std::size_t byte_offset, const std::string& what);
  std::size_t byte_offset() const noexcept { return offset_; }

private:
  std::size_t offset_;
};

class PreconditionError : public DataError {
public:
  explicit PreconditionError(const std::string& what) : DataError(what) {}
};

class InjectionError : public DataError {
public:
  explicit InjectionError(const std::string& what) : DataError(what) {}
};

class ShapeError : public DataError {
public:
  explicit ShapeError(const std::string& what) : DataError(what) {}
};

class IndexError : public DataError {
public:
  explicit IndexError(const std::string& what) : DataError(what) {}
};

class TapeError : public DataError {
public:
  explicit TapeError(const std::string& what) : DataError(what) {}
};

// Checkpoint / dataset file load failures.
class FormatError : public DataError {
public:
  explicit FormatError(const std::string& what) : DataError(what) {}
};

class VersionError : public FormatError {
public:
  explicit VersionError(const std::string& what) : FormatError(what) {}
};

class TruncatedError : public FormatError {
public:
  explicit TruncatedError(const std::string& what) : FormatError(what) {}
};

class ManifestShapeError : public FormatError {
public:
  explicit ManifestShapeError(const std::string& what) : FormatError(what) {}
};

class NumericError : public Error {
public:
  explicit NumericError(const std::string& what) : Error(ErrorClass::Numeric, what) {}
};

}  // namespace tracefix
