// Little-endian scalar readers/writers shared by the binary formats.
#ifndef SBEAM_DETAIL_WIRE_HPP
#define SBEAM_DETAIL_WIRE_HPP

#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "sbeam/errors.hpp"

namespace sbeam::wire {

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back((v >> (8 * i)) & 0xff);
}
inline void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back((v >> (8 * i)) & 0xff);
}
inline void put_f32(std::vector<std::uint8_t>& out, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  put_u32(out, bits);
}

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  std::size_t offset() const { return pos_; }
  std::size_t size() const { return bytes_.size(); }

  void need(std::size_t n, const char* what) const {
    if (pos_ + n > bytes_.size())
      throw FormatError(std::string("truncated payload while reading ") +
                            what + ": expected " + std::to_string(pos_ + n) +
                            " bytes, have " + std::to_string(bytes_.size()),
                        bytes_.size());
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64(const char* what) {
    need(8, what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
      v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return v;
  }
  float f32(const char* what) {
    const std::uint32_t bits = u32(what);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
  }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace sbeam::wire

#endif  // SBEAM_DETAIL_WIRE_HPP
