#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "gst/error.hpp"

namespace gst {

// Little-endian byte stream builders; every multi-byte field in the .gstc
// and .gstb formats goes through these.
class ByteWriter {
 public:
  void u8(uint8_t v) { buf_.push_back(v); }
  void u16(uint16_t v) { raw(&v, 2); }
  void u32(uint32_t v) { raw(&v, 4); }
  void u64(uint64_t v) { raw(&v, 8); }
  void i32(int32_t v) { raw(&v, 4); }
  void f32(float v) { raw(&v, 4); }
  void f64(double v) { raw(&v, 8); }
  void str(const std::string& s) {
    u16(static_cast<uint16_t>(s.size()));
    raw(s.data(), s.size());
  }
  void bytes(const void* p, size_t n) { raw(p, n); }

  const std::vector<uint8_t>& data() const { return buf_; }
  std::vector<uint8_t> take() { return std::move(buf_); }
  size_t size() const { return buf_.size(); }

 private:
  void raw(const void* p, size_t n) {
    size_t at = buf_.size();
    buf_.resize(at + n);
    std::memcpy(buf_.data() + at, p, n);
  }
  std::vector<uint8_t> buf_;
};

// Offset-tracking reader; truncation raises CodecError at the current byte.
class ByteReader {
 public:
  ByteReader(const uint8_t* p, size_t n) : p_(p), size_(n) {}
  explicit ByteReader(const std::vector<uint8_t>& v) : p_(v.data()), size_(v.size()) {}

  uint8_t u8() { return *take(1); }
  uint16_t u16() { return read<uint16_t>(); }
  uint32_t u32() { return read<uint32_t>(); }
  uint64_t u64() { return read<uint64_t>(); }
  int32_t i32() { return read<int32_t>(); }
  float f32() { return read<float>(); }
  double f64() { return read<double>(); }
  std::string str() {
    uint16_t n = u16();
    const uint8_t* p = take(n);
    return std::string(reinterpret_cast<const char*>(p), n);
  }
  const uint8_t* take(size_t n) {
    need(n);
    const uint8_t* p = p_ + off_;
    off_ += n;
    return p;
  }
  void need(size_t n) const {
    if (off_ + n > size_)
      throw CodecError("truncated at byte " + std::to_string(size_) + " (need " +
                           std::to_string(off_ + n) + " bytes)",
                       static_cast<long long>(size_));
  }
  size_t offset() const { return off_; }
  size_t remaining() const { return size_ - off_; }

 private:
  template <typename T>
  T read() {
    T v;
    std::memcpy(&v, take(sizeof(T)), sizeof(T));
    return v;
  }
  const uint8_t* p_;
  size_t size_;
  size_t off_ = 0;
};

}  // namespace gst
