// Copyright 2026 The freqfield Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <cstddef>
#include <span>

namespace freqfield::detail {

// Real <-> half-complex transforms of a fixed length, backed by FFTW plans.
// Plans are cached per length and per thread; execution uses the new-array
// interface so callers can pass any buffers.
class RealFft {
 public:
  explicit RealFft(std::size_t n);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  [[nodiscard]] std::size_t size() const { return n_; }

  // out.size() == n/2 + 1. Unnormalized.
  void forward(std::span<const double> in, std::span<std::complex<double>> out) const;
  // out.size() == n. Unnormalized (caller divides by n). `in` is clobbered.
  void inverse(std::span<std::complex<double>> in, std::span<double> out) const;

 private:
  std::size_t n_;
  void* forward_plan_ = nullptr;
  void* inverse_plan_ = nullptr;
};

// Cached per-thread instance for length n.
const RealFft& real_fft(std::size_t n);

}  // namespace freqfield::detail
