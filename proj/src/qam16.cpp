#include "sbeam/qam16.hpp"

#include <cmath>

#include "sbeam/errors.hpp"

namespace sbeam {

namespace {

const double kScale = 1.0 / std::sqrt(10.0);

// Gray pair (msb, lsb) -> amplitude level.
double gray_level(std::uint8_t msb, std::uint8_t lsb) {
  const int idx = (msb << 1) | lsb;
  static const double kLevels[4] = {-3.0, -1.0, 1.0, 3.0};
  // 00 -> -3, 01 -> -1, 11 -> +1, 10 -> +3
  static const int kOrder[4] = {0, 1, 3, 2};
  return kLevels[kOrder[idx]];
}

// Inverse: amplitude -> Gray pair, thresholds at -2, 0, +2.
void gray_bits(double level, std::uint8_t& msb, std::uint8_t& lsb) {
  if (level < -2.0) {
    msb = 0; lsb = 0;
  } else if (level < 0.0) {
    msb = 0; lsb = 1;
  } else if (level < 2.0) {
    msb = 1; lsb = 1;
  } else {
    msb = 1; lsb = 0;
  }
}

}  // namespace

std::vector<cplx> qam16_mod(const std::vector<std::uint8_t>& bits) {
  if (bits.size() % 4 != 0)
    throw InvalidInput("bit count must be a multiple of 4");
  std::vector<cplx> out;
  out.reserve(bits.size() / 4);
  for (std::size_t i = 0; i < bits.size(); i += 4) {
    const double re = gray_level(bits[i], bits[i + 1]);
    const double im = gray_level(bits[i + 2], bits[i + 3]);
    out.emplace_back(re * kScale, im * kScale);
  }
  return out;
}

std::vector<std::uint8_t> qam16_demod(const std::vector<cplx>& symbols) {
  std::vector<std::uint8_t> bits;
  bits.resize(symbols.size() * 4);
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    gray_bits(symbols[i].real() / kScale, bits[4 * i], bits[4 * i + 1]);
    gray_bits(symbols[i].imag() / kScale, bits[4 * i + 2], bits[4 * i + 3]);
  }
  return bits;
}

const std::vector<cplx>& qam16_constellation() {
  static const std::vector<cplx> points = [] {
    std::vector<cplx> p(16);
    for (std::uint8_t idx = 0; idx < 16; ++idx) {
      const std::vector<std::uint8_t> bits = {
          static_cast<std::uint8_t>((idx >> 3) & 1),
          static_cast<std::uint8_t>((idx >> 2) & 1),
          static_cast<std::uint8_t>((idx >> 1) & 1),
          static_cast<std::uint8_t>(idx & 1)};
      p[idx] = qam16_mod(bits)[0];
    }
    return p;
  }();
  return points;
}

}  // namespace sbeam
