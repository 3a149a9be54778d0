#pragma once

// Straight-line Gerchberg-Saxton written against a separable matrix DFT.
// Shares nothing with the library's FFT path except the seeded generator
// that draws the initial phase.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <vector>

#include "holo/rng.hpp"

namespace oracle {

using cd = std::complex<double>;

// Unitary DFT along rows then columns by direct summation.
inline void naive_dft2(std::vector<cd>& a, std::size_t w, std::size_t h, bool inverse) {
  const double sign = inverse ? 1.0 : -1.0;
  std::vector<cd> tw_w(w), tw_h(h), tmp(std::max(w, h));
  for (std::size_t k = 0; k < w; ++k) {
    tw_w[k] = std::polar(1.0, sign * 2.0 * std::numbers::pi * double(k) / double(w));
  }
  for (std::size_t k = 0; k < h; ++k) {
    tw_h[k] = std::polar(1.0, sign * 2.0 * std::numbers::pi * double(k) / double(h));
  }
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t k = 0; k < w; ++k) {
      cd s = 0.0;
      for (std::size_t x = 0; x < w; ++x) s += a[y * w + x] * tw_w[(k * x) % w];
      tmp[k] = s;
    }
    for (std::size_t k = 0; k < w; ++k) a[y * w + k] = tmp[k];
  }
  for (std::size_t x = 0; x < w; ++x) {
    for (std::size_t k = 0; k < h; ++k) {
      cd s = 0.0;
      for (std::size_t y = 0; y < h; ++y) s += a[y * w + x] * tw_h[(k * y) % h];
      tmp[k] = s;
    }
    for (std::size_t k = 0; k < h; ++k) a[k * w + x] = tmp[k];
  }
  const double scale = 1.0 / std::sqrt(double(w * h));
  for (auto& v : a) v *= scale;
}

struct ReferenceGs {
  std::vector<double> phase;
  std::vector<double> errors;
  double final_nmse = 0.0;
};

inline double nmse(const std::vector<cd>& f, const std::vector<double>& t) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double d = std::abs(f[i]) - t[i];
    num += d * d;
    den += t[i] * t[i];
  }
  return num / den;
}

inline ReferenceGs reference_gs(const std::vector<double>& target, std::size_t w,
                                std::size_t h, std::size_t iterations, std::uint64_t seed) {
  const double two_pi = 2.0 * std::numbers::pi;
  double e = 0.0;
  for (double v : target) e += v * v;
  std::vector<double> t(target);
  for (double& v : t) v *= std::sqrt(double(w * h) / e);

  ReferenceGs out;
  holo::Pcg64 rng(seed);
  out.phase.resize(w * h);
  for (double& p : out.phase) p = two_pi * holo::uniform01(rng);

  std::vector<cd> f(w * h);
  for (std::size_t it = 0; it < iterations; ++it) {
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = std::polar(1.0, out.phase[i]);
    naive_dft2(f, w, h, false);
    out.errors.push_back(nmse(f, t));
    for (std::size_t i = 0; i < f.size(); ++i) {
      const double m = std::abs(f[i]);
      f[i] = m > 0.0 ? f[i] / m * t[i] : cd(t[i], 0.0);
    }
    naive_dft2(f, w, h, true);
    for (std::size_t i = 0; i < f.size(); ++i) {
      double a = std::atan2(f[i].imag(), f[i].real());
      if (a < 0.0) a += two_pi;
      if (a >= two_pi) a = 0.0;
      out.phase[i] = a;
    }
  }
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = std::polar(1.0, out.phase[i]);
  naive_dft2(f, w, h, false);
  out.final_nmse = nmse(f, t);
  return out;
}

}  // namespace oracle
