// Copyright 2026 The twinkey Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Gaussian description of one probe/conjugate twin-beam pair.
//
// All variances are in shot-noise units: the vacuum (shot-noise limit) has
// variance 1. The joint quadratures are
//
//   X_-  = (X_p - X_c) / sqrt(2)    variance v_minus  (squeezed)
//   X_+  = (X_p + X_c) / sqrt(2)    variance v_plus   (anti-squeezed)
//
// and for the phase quadratures the roles of sum and difference swap.

#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>

namespace twinkey {

/// Per-pair noise model. Defaults reproduce the shape used for every
/// channel in the reference configuration; only v_minus/v_plus vary.
struct ChannelModel {
  double v_minus = 1.0;
  double v_plus = 1.0;
  double squeeze_band_lo_hz = 5.0e3;
  double squeeze_band_hi_hz = 2.5e6;
  double technical_noise_db = 10.0;
  double technical_corner_hz = 15.0e3;

  void validate() const {
    if (!(v_minus > 0.0) || !(v_plus > 0.0)) {
      throw std::invalid_argument("ChannelModel: joint variances must be positive");
    }
    // Small slack so that exactly-pure states built from dB values survive
    // rounding in v_minus * v_plus.
    if (v_minus * v_plus < 1.0 - 1e-12) {
      throw std::invalid_argument("ChannelModel: v_minus * v_plus < 1 violates the uncertainty bound");
    }
    if (!(squeeze_band_lo_hz >= 0.0) || !(squeeze_band_lo_hz < squeeze_band_hi_hz)) {
      throw std::invalid_argument("ChannelModel: squeeze band must satisfy 0 <= lo < hi");
    }
    if (!(technical_corner_hz > 0.0) || !std::isfinite(technical_noise_db)) {
      throw std::invalid_argument("ChannelModel: technical noise corner must be positive");
    }
  }
};

/// 4x4 covariance over the ordered basis (X_p, Y_p, X_c, Y_c).
struct CovarianceMatrix {
  static constexpr int kXp = 0;
  static constexpr int kYp = 1;
  static constexpr int kXc = 2;
  static constexpr int kYc = 3;

  std::array<double, 16> m{};

  double operator()(int r, int c) const { return m[static_cast<std::size_t>(r * 4 + c)]; }
  double& operator()(int r, int c) { return m[static_cast<std::size_t>(r * 4 + c)]; }

  static CovarianceMatrix identity() {
    CovarianceMatrix out;
    for (int i = 0; i < 4; ++i) out(i, i) = 1.0;
    return out;
  }

  bool is_symmetric(double tol = 0.0) const {
    for (int r = 0; r < 4; ++r) {
      for (int c = r + 1; c < 4; ++c) {
        if (std::abs((*this)(r, c) - (*this)(c, r)) > tol) return false;
      }
    }
    return true;
  }
};

namespace detail {

inline double det2(double a, double b, double c, double d) { return a * d - b * c; }

inline double det4(const CovarianceMatrix& s) {
  // Laplace expansion along the first row; the matrix is tiny.
  auto minor3 = [&](int skip_col) {
    int cols[3];
    for (int c = 0, k = 0; c < 4; ++c) {
      if (c != skip_col) cols[k++] = c;
    }
    return s(1, cols[0]) * det2(s(2, cols[1]), s(2, cols[2]), s(3, cols[1]), s(3, cols[2])) -
           s(1, cols[1]) * det2(s(2, cols[0]), s(2, cols[2]), s(3, cols[0]), s(3, cols[2])) +
           s(1, cols[2]) * det2(s(2, cols[0]), s(2, cols[1]), s(3, cols[0]), s(3, cols[1]));
  };
  double d = 0.0;
  for (int c = 0; c < 4; ++c) {
    d += ((c % 2 == 0) ? 1.0 : -1.0) * s(0, c) * minor3(c);
  }
  return d;
}

}  // namespace detail

/// Smallest symplectic eigenvalue of a two-mode covariance matrix. Physical
/// states have a value >= 1 in shot-noise units.
inline double smallest_symplectic_eigenvalue(const CovarianceMatrix& s) {
  const double det_a = detail::det2(s(0, 0), s(0, 1), s(1, 0), s(1, 1));
  const double det_b = detail::det2(s(2, 2), s(2, 3), s(3, 2), s(3, 3));
  const double det_c = detail::det2(s(0, 2), s(0, 3), s(1, 2), s(1, 3));
  const double delta = det_a + det_b + 2.0 * det_c;
  const double det_s = detail::det4(s);
  const double disc = std::max(0.0, delta * delta - 4.0 * det_s);
  return std::sqrt(std::max(0.0, (delta - std::sqrt(disc)) / 2.0));
}

/// Symmetric two-mode Gaussian state from its joint-quadrature variances.
inline CovarianceMatrix covariance_from_joint_variances(double v_minus, double v_plus) {
  if (!(v_minus > 0.0) || !(v_plus > 0.0)) {
    throw std::invalid_argument("covariance_from_joint_variances: variances must be positive");
  }
  if (v_minus * v_plus < 1.0 - 1e-12) {
    throw std::invalid_argument("covariance_from_joint_variances: v_minus * v_plus < 1 is unphysical");
  }
  using C = CovarianceMatrix;
  C out;
  const double local = (v_plus + v_minus) / 2.0;
  const double cross = (v_plus - v_minus) / 2.0;
  out(C::kXp, C::kXp) = local;
  out(C::kYp, C::kYp) = local;
  out(C::kXc, C::kXc) = local;
  out(C::kYc, C::kYc) = local;
  out(C::kXp, C::kXc) = out(C::kXc, C::kXp) = cross;
  out(C::kYp, C::kYc) = out(C::kYc, C::kYp) = -cross;
  return out;
}

inline CovarianceMatrix covariance_from_model(const ChannelModel& model) {
  return covariance_from_joint_variances(model.v_minus, model.v_plus);
}

struct JointVariances {
  double v_minus;
  double v_plus;
};

/// Inverse of covariance_from_joint_variances, read off the X block.
inline JointVariances joint_variances(const CovarianceMatrix& cov) {
  using C = CovarianceMatrix;
  const double xp = cov(C::kXp, C::kXp);
  const double xc = cov(C::kXc, C::kXc);
  const double cross = cov(C::kXp, C::kXc);
  return {(xp + xc) / 2.0 - cross, (xp + xc) / 2.0 + cross};
}

/// Noise power relative to shot noise, in dB. Negative means squeezed.
inline double squeezing_db(double variance) {
  if (!(variance > 0.0)) throw std::invalid_argument("squeezing_db: variance must be positive");
  return 10.0 * std::log10(variance);
}

inline double variance_from_db(double db) { return std::pow(10.0, db / 10.0); }

inline double pearson_correlation(const CovarianceMatrix& cov) {
  using C = CovarianceMatrix;
  const double denom = std::sqrt(cov(C::kXp, C::kXp) * cov(C::kXc, C::kXc));
  if (!(denom > 0.0)) throw std::invalid_argument("pearson_correlation: degenerate covariance");
  return cov(C::kXp, C::kXc) / denom;
}

/// Probability that a zero-mean bivariate Gaussian pair with correlation
/// rho lands in the same quadrant (I or III, or II or IV): 1/2 + asin(rho)/pi.
inline double sign_agreement(double rho) {
  if (!(std::abs(rho) <= 1.0)) throw std::invalid_argument("sign_agreement: |rho| must be <= 1");
  return 0.5 + std::asin(rho) / std::numbers::pi;
}

inline double rho_for_agreement(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("rho_for_agreement: p must lie in [0, 1]");
  return std::sin(std::numbers::pi * (p - 0.5));
}

/// Probability that the XOR of independent noisy copies equals the XOR of
/// the originals, given each copy's per-bit agreement probability.
inline double xor_agreement(std::span<const double> per_channel) {
  if (per_channel.empty()) throw std::invalid_argument("xor_agreement: empty channel list");
  double bias = 1.0;
  for (double p : per_channel) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("xor_agreement: probabilities must lie in [0, 1]");
    bias *= 2.0 * p - 1.0;
  }
  if (per_channel.size() == 1) return per_channel.front();
  return (1.0 + bias) / 2.0;
}

struct WitnessResult {
  bool entangled;
  double margin;  // 2 - S; positive when inseparable
  double duan_sum;
};

/// Duan-type inseparability test on Var(X_-) + Var(Y_+); separable states
/// satisfy the sum >= 2 in shot-noise units.
inline WitnessResult entanglement_witness(const CovarianceMatrix& cov) {
  using C = CovarianceMatrix;
  const double var_x_minus =
      (cov(C::kXp, C::kXp) + cov(C::kXc, C::kXc) - 2.0 * cov(C::kXp, C::kXc)) / 2.0;
  const double var_y_plus =
      (cov(C::kYp, C::kYp) + cov(C::kYc, C::kYc) + 2.0 * cov(C::kYp, C::kYc)) / 2.0;
  const double sum = var_x_minus + var_y_plus;
  return {sum < 2.0, 2.0 - sum, sum};
}

/// Builds a channel whose squeezed quadrature sits at `squeezing` dB and whose
/// excess (anti-squeezed) noise is chosen so that sign binning of partner
/// quadratures agrees with probability `target_agreement`.
inline ChannelModel calibrate_channel(double squeezing, double target_agreement,
                                      ChannelModel shape = {}) {
  if (!(target_agreement > 0.5 && target_agreement < 1.0)) {
    throw std::invalid_argument("calibrate_channel: agreement target must lie in (0.5, 1)");
  }
  const double rho = rho_for_agreement(target_agreement);
  shape.v_minus = variance_from_db(squeezing);
  shape.v_plus = shape.v_minus * (1.0 + rho) / (1.0 - rho);
  if (shape.v_minus * shape.v_plus < 1.0) {
    throw std::invalid_argument("calibrate_channel: squeezing " + std::to_string(squeezing) +
                                " dB cannot reach agreement " + std::to_string(target_agreement) +
                                " with a physical state");
  }
  shape.validate();
  return shape;
}

}  // namespace twinkey
