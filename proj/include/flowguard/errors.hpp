#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace flowguard {

// Base class for everything this library throws on purpose.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed caller-supplied data (dimension mismatch, bad buffer size, ...).
struct InvalidInput : Error {
  using Error::Error;
};

// Out-of-range tuning parameter (sigma <= 0, thresholds out of order, ...).
struct InvalidParameter : Error {
  using Error::Error;
};

// Not enough data to pose the problem (fewer than two flow vectors).
struct InsufficientData : Error {
  using Error::Error;
};

// The problem is posed but has no unique solution (rank-deficient system).
struct DegenerateGeometry : Error {
  using Error::Error;
};

// Synthetic camera has reached or passed an obstacle plane.
struct SceneExpired : Error {
  using Error::Error;
};

// Filesystem-level failure (open, write, missing directory).
struct IoError : Error {
  using Error::Error;
};

// Byte-level decode failure; carries the offset where decoding stopped.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t byte_offset)
      : Error(what + " (at byte " + std::to_string(byte_offset) + ")"),
        offset_(byte_offset) {}

  std::size_t byteOffset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

}  // namespace flowguard
