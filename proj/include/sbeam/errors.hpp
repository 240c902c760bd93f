/**
 * @file errors.hpp
 * @brief Exception types shared across the library.
 */
#ifndef SBEAM_ERRORS_HPP
#define SBEAM_ERRORS_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

namespace sbeam {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Caller violated a precondition (bad dimensions, out-of-range value, ...).
class InvalidInput : public Error {
 public:
  explicit InvalidInput(const std::string& what) : Error(what) {}
};

/// A serialized payload failed validation. Carries the byte offset of the
/// first inconsistency.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t offset)
      : Error(what + " (at byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

/// A CSI sample was identically zero where a nonzero amplitude is required.
class ZeroSample : public Error {
 public:
  explicit ZeroSample(std::uint64_t seq)
      : Error("all-zero CSI sample, sequence number " + std::to_string(seq)),
        seq_(seq) {}
  std::uint64_t seq() const { return seq_; }

 private:
  std::uint64_t seq_;
};

/// Sequence-number alignment found no sample present in every stream.
class NoCommonSamples : public Error {
 public:
  NoCommonSamples() : Error("no sequence number is present in every stream") {}
};

/// Matrix handed to the Givens decomposition is not unitary within tolerance.
class NotUnitary : public Error {
 public:
  explicit NotUnitary(double residual)
      : Error("input columns are not orthonormal (residual " +
              std::to_string(residual) + ")") {}
};

/// Eq. 7-style target with zero L1 norm.
class DegenerateTarget : public Error {
 public:
  DegenerateTarget() : Error("target vector has zero L1 norm") {}
};

/// Effective channel Gram matrix is singular or too ill-conditioned to invert.
class SingularEffectiveChannel : public Error {
 public:
  explicit SingularEffectiveChannel(double cond)
      : Error("effective channel is ill-conditioned (cond ~ " +
              std::to_string(cond) + ")"),
        cond_(cond) {}
  double cond() const { return cond_; }

 private:
  double cond_;
};

}  // namespace sbeam

#endif  // SBEAM_ERRORS_HPP
