#include "holo/dft.hpp"

#include <cmath>
#include <numbers>

#include "holo/error.hpp"

namespace holo::cgh {

bool is_power_of_two(std::size_t n) noexcept {
  return n != 0 && (n & (n - 1)) == 0;
}

ComplexField::ComplexField(std::size_t width, std::size_t height)
    : width_(width), height_(height), data_(width * height) {}

double ComplexField::energy() const noexcept {
  double e = 0.0;
  for (const auto& c : data_) e += std::norm(c);
  return e;
}

Fft1d::Fft1d(std::size_t n) : n_(n), bitrev_(n), twiddle_(n / 2) {
  if (!is_power_of_two(n)) {
    throw Error("cgh.non_power_of_two",
                "transform length " + std::to_string(n) + " is not a power of two");
  }
  std::size_t bits = 0;
  while ((std::size_t{1} << bits) < n) ++bits;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t r = 0;
    for (std::size_t b = 0; b < bits; ++b) {
      if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (bits - 1 - b);
    }
    bitrev_[i] = r;
  }
  for (std::size_t k = 0; k < n / 2; ++k) {
    const double angle =
        -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    twiddle_[k] = Complex(std::cos(angle), std::sin(angle));
  }
}

void Fft1d::forward(std::span<Complex> data) const { transform(data, false); }
void Fft1d::inverse(std::span<Complex> data) const { transform(data, true); }

void Fft1d::transform(std::span<Complex> data, bool inverse) const {
  if (data.size() != n_) {
    throw Error("cgh.dimension_mismatch", "FFT input length differs from plan");
  }
  for (std::size_t i = 0; i < n_; ++i) {
    const std::size_t j = bitrev_[i];
    if (i < j) std::swap(data[i], data[j]);
  }
  for (std::size_t len = 2; len <= n_; len <<= 1u) {
    const std::size_t half = len / 2;
    const std::size_t stride = n_ / len;
    for (std::size_t start = 0; start < n_; start += len) {
      for (std::size_t k = 0; k < half; ++k) {
        Complex w = twiddle_[k * stride];
        if (inverse) w = std::conj(w);
        const Complex u = data[start + k];
        const Complex v = data[start + k + half] * w;
        data[start + k] = u + v;
        data[start + k + half] = u - v;
      }
    }
  }
}

Fft2d::Fft2d(std::size_t width, std::size_t height)
    : rows_(width), cols_(height) {}

void Fft2d::forward(ComplexField& field) const { transform(field, false); }
void Fft2d::inverse(ComplexField& field) const { transform(field, true); }

void Fft2d::transform(ComplexField& field, bool inverse) const {
  const std::size_t w = rows_.size();
  const std::size_t h = cols_.size();
  if (field.width() != w || field.height() != h) {
    throw Error("cgh.dimension_mismatch", "field dimensions differ from plan");
  }
  auto values = field.values();
  for (std::size_t y = 0; y < h; ++y) {
    auto row = values.subspan(y * w, w);
    inverse ? rows_.inverse(row) : rows_.forward(row);
  }
  std::vector<Complex> column(h);
  for (std::size_t x = 0; x < w; ++x) {
    for (std::size_t y = 0; y < h; ++y) column[y] = values[y * w + x];
    inverse ? cols_.inverse(column) : cols_.forward(column);
    for (std::size_t y = 0; y < h; ++y) values[y * w + x] = column[y];
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(w * h));
  for (auto& c : values) c *= scale;
}

}  // namespace holo::cgh
