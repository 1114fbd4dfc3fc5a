#pragma once

#include <stdexcept>
#include <string>

namespace gst {

// Dimension mismatch between operands.
struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Illegal group pattern request (indivisible dims, non-refinement, ...).
struct StructureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Corrupt or truncated serialized data. `offset` is the first offending
// byte (or bit, when `bit_offset` >= 0) relative to the start of the blob.
struct CodecError : std::runtime_error {
  long long offset = -1;
  long long bit_offset = -1;
  CodecError(const std::string& msg, long long byte_off, long long bit_off = -1)
      : std::runtime_error(msg), offset(byte_off), bit_offset(bit_off) {}
};

// Invalid run configuration. `line` is 1-based when parsed from a file.
struct ConfigError : std::runtime_error {
  int line = 0;
  std::string key;
  ConfigError(const std::string& msg, int line_no = 0, std::string key_name = "")
      : std::runtime_error(msg), line(line_no), key(std::move(key_name)) {}
};

struct EvalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace gst
