#include "sbeam/feedback80211.hpp"

#include <cmath>
#include <sstream>

#include "sbeam/errors.hpp"
#include "sbeam/svd.hpp"

namespace sbeam {

namespace {

constexpr double kUnitaryTol = 1e-6;
constexpr double kImagResidueTol = 1e-7;

double wrap_to_two_pi(double a) {
  if (a < 0.0) a += 2.0 * M_PI;
  if (a >= 2.0 * M_PI) a -= 2.0 * M_PI;
  return a;
}

// Take a value that should be real at this stage of the decomposition.
double take_real(const cplx& z) {
  if (std::abs(z.imag()) > kImagResidueTol * std::max(1.0, std::abs(z)))
    throw NotUnitary(std::abs(z.imag()));
  return z.real();
}

}  // namespace

CMatrix compute_bm(const CMatrix& h, std::size_t n_ss) {
  if (n_ss == 0 || n_ss > std::min(h.rows(), h.cols()))
    throw InvalidInput("n_ss must be in [1, min(N_r, N_t)]");
  const SvdResult r = svd(h);
  return r.vdag.adjoint().cols_block(0, n_ss);
}

std::size_t n_phi_angles(std::size_t n_tx, std::size_t n_ss) {
  const std::size_t t_max = std::min(n_ss, n_tx - 1);
  std::size_t count = 0;
  for (std::size_t t = 1; t <= t_max; ++t) count += n_tx - t;
  return count;
}

std::size_t n_givens_angles(std::size_t n_tx, std::size_t n_ss) {
  return 2 * n_phi_angles(n_tx, n_ss);
}

GivensDecomposition givens_decompose(const CMatrix& v) {
  const std::size_t n_tx = v.rows();
  const std::size_t n_ss = v.cols();
  if (n_tx == 0 || n_ss == 0 || n_ss > n_tx)
    throw InvalidInput("beam matrix must be N_t x N_ss with N_ss <= N_t");
  const double residual = v.orthonormality_residual();
  if (residual > kUnitaryTol) throw NotUnitary(residual);

  GivensDecomposition out;
  out.angles.n_tx = n_tx;
  out.angles.n_ss = n_ss;

  // Dtilde carries the last-row phases so Omega's last row starts real >= 0.
  out.d_tilde = CMatrix(n_ss, n_ss);
  for (std::size_t k = 0; k < n_ss; ++k) {
    const double a = std::arg(v.at(n_tx - 1, k));
    out.d_tilde.at(k, k) = std::polar(1.0, a);
  }
  CMatrix omega = v * out.d_tilde.adjoint();

  const std::size_t t_max = std::min(n_ss, n_tx - 1);
  for (std::size_t t = 1; t <= t_max; ++t) {
    // Column t phases for rows t..n_tx-1 (1-indexed), then strip them.
    for (std::size_t l = t; l <= n_tx - 1; ++l) {
      const double phi = wrap_to_two_pi(std::arg(omega.at(l - 1, t - 1)));
      out.angles.phi.push_back(phi);
      const cplx rot = std::polar(1.0, -phi);
      for (std::size_t c = 0; c < n_ss; ++c) omega.at(l - 1, c) *= rot;
    }
    // Planar rotations zero the subdiagonal of column t.
    for (std::size_t l = t + 1; l <= n_tx; ++l) {
      const double x = take_real(omega.at(t - 1, t - 1));
      const double y = take_real(omega.at(l - 1, t - 1));
      const double hyp = std::hypot(x, y);
      double psi = 0.0;
      if (hyp > 0.0) {
        const double ratio = std::clamp(x / hyp, 0.0, 1.0);
        psi = std::acos(ratio);
      }
      out.angles.psi.push_back(psi);
      const double c = std::cos(psi);
      const double s = std::sin(psi);
      for (std::size_t col = 0; col < n_ss; ++col) {
        const cplx top = omega.at(t - 1, col);
        const cplx bot = omega.at(l - 1, col);
        omega.at(t - 1, col) = c * top + s * bot;
        omega.at(l - 1, col) = -s * top + c * bot;
      }
    }
  }
  return out;
}

CMatrix givens_reconstruct(const GivensSlice& angles) {
  const std::size_t n_tx = angles.n_tx;
  const std::size_t n_ss = angles.n_ss;
  if (n_tx == 0 || n_ss == 0 || n_ss > n_tx)
    throw InvalidInput("bad Givens dimensions");
  const std::size_t expected = n_phi_angles(n_tx, n_ss);
  if (angles.phi.size() != expected || angles.psi.size() != expected)
    throw InvalidInput("angle count does not match dimensions");

  CMatrix m = CMatrix::identity(n_tx);
  std::size_t ip = 0, iq = 0;
  const std::size_t t_max = std::min(n_ss, n_tx - 1);
  for (std::size_t t = 1; t <= t_max; ++t) {
    // Right-multiply by D_t: scales columns t..n_tx-1 (1-indexed).
    for (std::size_t l = t; l <= n_tx - 1; ++l) {
      const cplx rot = std::polar(1.0, angles.phi[ip++]);
      for (std::size_t r = 0; r < n_tx; ++r) m.at(r, l - 1) *= rot;
    }
    // Right-multiply by G^T: mixes columns t and l.
    for (std::size_t l = t + 1; l <= n_tx; ++l) {
      const double c = std::cos(angles.psi[iq]);
      const double s = std::sin(angles.psi[iq]);
      ++iq;
      for (std::size_t r = 0; r < n_tx; ++r) {
        const cplx ct = m.at(r, t - 1);
        const cplx cl = m.at(r, l - 1);
        m.at(r, t - 1) = c * ct + s * cl;
        m.at(r, l - 1) = -s * ct + c * cl;
      }
    }
  }
  return m.cols_block(0, n_ss);
}

AngleCodes quantize_angles(const GivensSlice& angles, const QuantConfig& q) {
  q.validate();
  AngleCodes out;
  out.n_tx = angles.n_tx;
  out.n_ss = angles.n_ss;
  const double phi_levels = static_cast<double>(1u << q.b_phi);
  const double psi_levels = static_cast<double>(1u << q.b_psi());
  out.phi.reserve(angles.phi.size());
  out.psi.reserve(angles.psi.size());
  for (double a : angles.phi) {
    if (a < 0.0 || a >= 2.0 * M_PI) throw InvalidInput("phi out of [0, 2pi)");
    const double idx = std::floor(a * phi_levels / (2.0 * M_PI));
    out.phi.push_back(
        static_cast<std::uint32_t>(std::clamp(idx, 0.0, phi_levels - 1.0)));
  }
  for (double a : angles.psi) {
    if (a < 0.0 || a > M_PI / 2.0 + 1e-12)
      throw InvalidInput("psi out of [0, pi/2]");
    const double idx = std::floor(a * psi_levels / (M_PI / 2.0));
    out.psi.push_back(
        static_cast<std::uint32_t>(std::clamp(idx, 0.0, psi_levels - 1.0)));
  }
  return out;
}

GivensSlice dequantize_angles(const AngleCodes& codes, const QuantConfig& q) {
  q.validate();
  GivensSlice out;
  out.n_tx = codes.n_tx;
  out.n_ss = codes.n_ss;
  const double phi_levels = static_cast<double>(1u << q.b_phi);
  const double psi_levels = static_cast<double>(1u << q.b_psi());
  out.phi.reserve(codes.phi.size());
  out.psi.reserve(codes.psi.size());
  for (std::uint32_t c : codes.phi)
    out.phi.push_back(2.0 * M_PI * (c + 0.5) / phi_levels);
  for (std::uint32_t c : codes.psi)
    out.psi.push_back((M_PI / 2.0) * (c + 0.5) / psi_levels);
  return out;
}

std::string angle_codes_csv(const std::vector<AngleCodes>& per_subcarrier) {
  std::ostringstream os;
  os << "s,t,l,kind,q\n";
  for (std::size_t s = 0; s < per_subcarrier.size(); ++s) {
    const AngleCodes& codes = per_subcarrier[s];
    const std::size_t t_max = std::min(codes.n_ss, codes.n_tx - 1);
    std::size_t ip = 0, iq = 0;
    for (std::size_t t = 1; t <= t_max; ++t) {
      for (std::size_t l = t; l <= codes.n_tx - 1; ++l)
        os << s << ',' << t << ',' << l << ",phi," << codes.phi[ip++] << '\n';
      for (std::size_t l = t + 1; l <= codes.n_tx; ++l)
        os << s << ',' << t << ',' << l << ",psi," << codes.psi[iq++] << '\n';
    }
  }
  return os.str();
}

FeedbackAccounting accounting(
    const NetworkConfig& config, const QuantConfig& q,
    std::optional<std::uint32_t> bits_per_angle_override) {
  q.validate();
  FeedbackAccounting out;
  out.n_angles = n_givens_angles(config.n_tx, config.n_ss_per_sta);
  const std::uint64_t bits_per_angle = bits_per_angle_override
                                           ? *bits_per_angle_override
                                           : (q.b_phi + q.b_psi()) / 2;
  out.angle_payload_bits = out.n_angles *
                           static_cast<std::uint64_t>(config.n_subcarriers) *
                           bits_per_angle;
  out.bmr_bits = 8ull * config.n_tx + out.angle_payload_bits;
  const double raw_bits =
      16.0 * config.n_subcarriers * config.n_tx * config.n_rx_per_sta;
  out.cr = static_cast<double>(out.bmr_bits) / raw_bits;
  return out;
}

}  // namespace sbeam
