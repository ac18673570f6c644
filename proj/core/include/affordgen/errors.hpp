#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

namespace affordgen {

/// Invalid arguments or parameters supplied by a caller.
class UsageError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Inputs are well-formed but inconsistent (unknown ids, manifest/disk mismatch, ...).
class DataError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Filesystem failures.
class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A binary dataset file failed validation. Carries the file path and the
/// byte offset at which parsing stopped.
class FormatError : public DataError {
public:
  enum class Kind { Magic, Version, ElementType, Length, Shape };

  FormatError(Kind kind, std::string file, std::uint64_t offset, const std::string& detail)
      : DataError(file + " @" + std::to_string(offset) + ": " + kind_name(kind) + ": " + detail),
        kind_(kind),
        file_(std::move(file)),
        offset_(offset) {}

  Kind kind() const noexcept { return kind_; }
  const std::string& file() const noexcept { return file_; }
  std::uint64_t offset() const noexcept { return offset_; }

  static const char* kind_name(Kind kind) {
    switch (kind) {
      case Kind::Magic: return "magic mismatch";
      case Kind::Version: return "unsupported version";
      case Kind::ElementType: return "element type mismatch";
      case Kind::Length: return "length mismatch";
      case Kind::Shape: return "shape mismatch";
    }
    return "format error";
  }

private:
  Kind kind_;
  std::string file_;
  std::uint64_t offset_;
};

}  // namespace affordgen
