/**
 * @file convcode.hpp
 * @brief Rate-1/2 binary convolutional code, constraint length 7, generator
 *        polynomials 133/171 (octal), with hard-decision Viterbi decoding.
 */
#ifndef SBEAM_CONVCODE_HPP
#define SBEAM_CONVCODE_HPP

#include <cstdint>
#include <vector>

namespace sbeam {

/// Encode with 6 zero tail bits: output length = 2 * (input + 6).
std::vector<std::uint8_t> bcc_encode(const std::vector<std::uint8_t>& bits);

/// Hard-decision Viterbi over the terminated trellis. Input length must be
/// even and at least 12; returns the original payload (tail stripped).
std::vector<std::uint8_t> viterbi_decode(const std::vector<std::uint8_t>& coded);

}  // namespace sbeam

#endif  // SBEAM_CONVCODE_HPP
