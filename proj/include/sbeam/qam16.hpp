/**
 * @file qam16.hpp
 * @brief Gray-mapped 16-QAM at unit average power.
 *
 * Bits pack as [b0 b1 b2 b3] per symbol: (b0, b1) selects the I level and
 * (b2, b3) the Q level through the Gray table 00 -> -3, 01 -> -1, 11 -> +1,
 * 10 -> +3, all scaled by 1/sqrt(10). So 0000 maps to (-3 - 3j)/sqrt(10).
 */
#ifndef SBEAM_QAM16_HPP
#define SBEAM_QAM16_HPP

#include <cstdint>
#include <vector>

#include "sbeam/cmatrix.hpp"

namespace sbeam {

/// Bit count must be a multiple of 4.
std::vector<cplx> qam16_mod(const std::vector<std::uint8_t>& bits);

/// Minimum-distance hard decisions, independent per dimension.
std::vector<std::uint8_t> qam16_demod(const std::vector<cplx>& symbols);

/// The 16 constellation points in bit order (index = b0b1b2b3).
const std::vector<cplx>& qam16_constellation();

}  // namespace sbeam

#endif  // SBEAM_QAM16_HPP
