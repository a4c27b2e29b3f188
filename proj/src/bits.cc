#include "qle/bits.h"

#include "qle/errors.h"

namespace qle {

void BitString::push(std::uint64_t value, int width) {
  for (int i = 0; i < width; ++i) {
    if ((size_ & 7) == 0) bytes_.push_back(0);
    if ((value >> i) & 1ULL) bytes_.back() |= static_cast<std::uint8_t>(1u << (size_ & 7));
    ++size_;
  }
}

void BitString::push_varint(std::uint64_t value) {
  do {
    std::uint64_t group = value & 0x7f;
    value >>= 7;
    push(group | (value ? 0x80 : 0), 8);
  } while (value);
}

void BitString::append(const BitString& other) {
  for (std::size_t i = 0; i < other.size(); ++i) push(other.bit(i), 1);
}

std::uint64_t BitReader::read(int width) {
  if (static_cast<std::size_t>(width) > remaining()) throw DecodeError("payload truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < width; ++i) v |= static_cast<std::uint64_t>(bits_->bit(pos_++)) << i;
  return v;
}

std::uint64_t BitReader::read_varint() {
  std::uint64_t v = 0;
  for (int shift = 0; shift < 64; shift += 7) {
    std::uint64_t group = read(8);
    v |= (group & 0x7f) << shift;
    if (!(group & 0x80)) return v;
  }
  throw DecodeError("varint too long");
}

BitString BitReader::read_bits(std::size_t count) {
  if (count > remaining()) throw DecodeError("payload truncated");
  BitString out;
  for (std::size_t i = 0; i < count; ++i) out.push_bit(bits_->bit(pos_++));
  return out;
}

int bit_width_for(std::uint64_t count) {
  int w = 1;
  while (w < 64 && (1ULL << w) < count) ++w;
  return w;
}

}  // namespace qle
