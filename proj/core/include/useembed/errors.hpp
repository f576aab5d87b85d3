#pragma once

#include <stdexcept>
#include <string>

namespace useembed {

// I/O level failures: missing files, short reads, unwritable paths.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed file contents: bad magic, unsupported version, checksum mismatch.
class FormatError : public std::runtime_error {
 public:
  explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};

// Violated type invariants and inconsistent inputs (dimension mismatches,
// unknown node ids, labels outside {0,1}, cycles, ...).
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Non-finite objective encountered during optimization.
class DivergenceError : public std::runtime_error {
 public:
  explicit DivergenceError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace useembed
