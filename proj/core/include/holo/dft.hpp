#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace holo::cgh {

using Complex = std::complex<double>;

bool is_power_of_two(std::size_t n) noexcept;

/// Row-major H x W complex field; element (x, y) lives at y * width + x.
class ComplexField {
 public:
  ComplexField() = default;
  ComplexField(std::size_t width, std::size_t height);

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }

  Complex& operator()(std::size_t x, std::size_t y) noexcept {
    return data_[y * width_ + x];
  }
  const Complex& operator()(std::size_t x, std::size_t y) const noexcept {
    return data_[y * width_ + x];
  }

  std::span<Complex> values() noexcept { return data_; }
  std::span<const Complex> values() const noexcept { return data_; }

  /// Sum of squared magnitudes.
  double energy() const noexcept;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<Complex> data_;
};

/// In-place radix-2 FFT of one power-of-two length. Unnormalized.
class Fft1d {
 public:
  explicit Fft1d(std::size_t n);

  std::size_t size() const noexcept { return n_; }
  void forward(std::span<Complex> data) const;
  void inverse(std::span<Complex> data) const;

 private:
  void transform(std::span<Complex> data, bool inverse) const;

  std::size_t n_;
  std::vector<std::size_t> bitrev_;
  std::vector<Complex> twiddle_;  // exp(-2*pi*i*k/n), k < n/2
};

/// Unitary 2-D DFT: both directions carry 1/sqrt(W*H), so energy is
/// preserved exactly up to rounding. Results are bit-deterministic.
class Fft2d {
 public:
  Fft2d(std::size_t width, std::size_t height);

  std::size_t width() const noexcept { return rows_.size(); }
  std::size_t height() const noexcept { return cols_.size(); }

  void forward(ComplexField& field) const;
  void inverse(ComplexField& field) const;

 private:
  void transform(ComplexField& field, bool inverse) const;

  Fft1d rows_;
  Fft1d cols_;
};

}  // namespace holo::cgh
