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

// Thin RAII wrapper over FFTW's real-to-complex transforms.

#include <fftw3.h>

#include <algorithm>
#include <complex>
#include <cstddef>
#include <cstring>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>
#include <vector>

namespace twinkey {

namespace detail {

// FFTW planning touches global state; execution on distinct plans does not.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

}  // namespace detail

/// Smallest n' >= n whose only prime factors are 2, 3, 5 and 7.
inline std::size_t next_fast_size(std::size_t n) {
  if (n <= 1) return 1;
  for (std::size_t m = n;; ++m) {
    std::size_t r = m;
    for (std::size_t p : {2u, 3u, 5u, 7u}) {
      while (r % p == 0) r /= p;
    }
    if (r == 1) return m;
  }
}

/// Forward and inverse real DFT of a fixed length. The inverse is scaled by
/// 1/n so that inverse(forward(x)) == x. Plans use FFTW_ESTIMATE, which keeps
/// results reproducible from run to run.
class RealFft {
 public:
  explicit RealFft(std::size_t n) : n_(n) {
    if (n == 0) throw std::invalid_argument("RealFft: zero length");
    real_.reset(static_cast<double*>(fftw_malloc(sizeof(double) * n)));
    spec_.reset(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * bins())));
    if (!real_ || !spec_) throw std::bad_alloc();
    std::lock_guard lock(detail::fftw_planner_mutex());
    const int len = static_cast<int>(n);
    forward_ = fftw_plan_dft_r2c_1d(len, real_.get(), spec_.get(), FFTW_ESTIMATE);
    inverse_ = fftw_plan_dft_c2r_1d(len, spec_.get(), real_.get(), FFTW_ESTIMATE);
    if (!forward_ || !inverse_) throw std::runtime_error("RealFft: FFTW planning failed");
  }

  ~RealFft() {
    std::lock_guard lock(detail::fftw_planner_mutex());
    if (forward_) fftw_destroy_plan(forward_);
    if (inverse_) fftw_destroy_plan(inverse_);
  }

  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::size_t size() const { return n_; }
  std::size_t bins() const { return n_ / 2 + 1; }

  /// Zero-pads (or truncates) `x` to the transform length.
  std::vector<std::complex<double>> forward(std::span<const double> x) {
    const std::size_t k = std::min(x.size(), n_);
    std::memcpy(real_.get(), x.data(), k * sizeof(double));
    std::fill(real_.get() + k, real_.get() + n_, 0.0);
    fftw_execute(forward_);
    std::vector<std::complex<double>> out(bins());
    std::memcpy(static_cast<void*>(out.data()), spec_.get(), bins() * sizeof(fftw_complex));
    return out;
  }

  std::vector<double> inverse(std::span<const std::complex<double>> spectrum) {
    if (spectrum.size() != bins()) throw std::invalid_argument("RealFft::inverse: wrong bin count");
    std::memcpy(static_cast<void*>(spec_.get()), spectrum.data(), bins() * sizeof(fftw_complex));
    fftw_execute(inverse_);
    std::vector<double> out(real_.get(), real_.get() + n_);
    const double scale = 1.0 / static_cast<double>(n_);
    for (double& v : out) v *= scale;
    return out;
  }

 private:
  std::size_t n_;
  std::unique_ptr<double, detail::FftwFree> real_;
  std::unique_ptr<fftw_complex, detail::FftwFree> spec_;
  fftw_plan forward_ = nullptr;
  fftw_plan inverse_ = nullptr;
};

}  // namespace twinkey
