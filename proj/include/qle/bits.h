#pragma once

#include <cstdint>
#include <vector>

namespace qle {

// Bit-exact classical payload. Bits are appended LSB-first within each
// value; size() is what the runtime counters record.
class BitString {
 public:
  void push(std::uint64_t value, int width);
  void push_bit(int bit) { push(bit ? 1 : 0, 1); }
  // 7 data bits plus a continuation bit per group.
  void push_varint(std::uint64_t value);
  void append(const BitString& other);

  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }
  int bit(std::size_t i) const { return (bytes_[i >> 3] >> (i & 7)) & 1; }
  const std::vector<std::uint8_t>& bytes() const { return bytes_; }

  bool operator==(const BitString&) const = default;

 private:
  std::vector<std::uint8_t> bytes_;
  std::size_t size_ = 0;
};

// Throws DecodeError on reads past the end.
class BitReader {
 public:
  explicit BitReader(const BitString& bits) : bits_(&bits) {}

  std::uint64_t read(int width);
  int read_bit() { return static_cast<int>(read(1)); }
  std::uint64_t read_varint();
  BitString read_bits(std::size_t count);

  std::size_t remaining() const { return bits_->size() - pos_; }
  bool done() const { return pos_ == bits_->size(); }

 private:
  const BitString* bits_;
  std::size_t pos_ = 0;
};

// Smallest width that holds values 0..count-1 (at least 1).
int bit_width_for(std::uint64_t count);

}  // namespace qle
