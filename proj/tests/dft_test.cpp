#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "holo/dft.hpp"
#include "holo/error.hpp"
#include "holo/rng.hpp"
#include "oracles/reference_gs.hpp"

using namespace holo::cgh;

namespace {

ComplexField random_field(std::size_t w, std::size_t h, std::uint64_t seed) {
  holo::Pcg64 rng(seed);
  ComplexField f(w, h);
  for (auto& v : f.values()) v = {holo::uniform01(rng) - 0.5, holo::uniform01(rng) - 0.5};
  return f;
}

}  // namespace

TEST(Fft1d, MatchesKnownSpectrum) {
  // Same vector as the classic 4-point example: -2, -1, 0, -2.
  std::vector<Complex> v{-2.0, -1.0, 0.0, -2.0};
  Fft1d(4).forward(v);
  EXPECT_NEAR(v[0].real(), -5.0, 1e-12);
  EXPECT_NEAR(v[1].real(), -2.0, 1e-12);
  EXPECT_NEAR(v[1].imag(), -1.0, 1e-12);
  EXPECT_NEAR(v[2].real(), 1.0, 1e-12);
  EXPECT_NEAR(v[3].imag(), 1.0, 1e-12);
}

TEST(Fft1d, RejectsNonPowerOfTwo) {
  EXPECT_THROW(Fft1d(12), holo::Error);
  EXPECT_THROW(Fft2d(8, 24), holo::Error);
}

TEST(Fft2d, MatchesDirectSummation) {
  for (auto [w, h] : {std::pair<std::size_t, std::size_t>{8, 8}, {16, 8}, {8, 32}}) {
    ComplexField f = random_field(w, h, 3);
    std::vector<Complex> ref(f.values().begin(), f.values().end());
    Fft2d(w, h).forward(f);
    oracle::naive_dft2(ref, w, h, false);
    for (std::size_t i = 0; i < ref.size(); ++i) {
      EXPECT_NEAR(std::abs(f.values()[i] - ref[i]), 0.0, 1e-12);
    }
  }
}

TEST(Fft2d, RoundTripWithin1e12) {
  for (std::size_t n : {8u, 64u, 256u}) {
    const ComplexField orig = random_field(n, n / 2 < 8 ? 8 : n / 2, n);
    ComplexField f = orig;
    const Fft2d plan(f.width(), f.height());
    plan.forward(f);
    plan.inverse(f);
    double worst = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      worst = std::max(worst, std::abs(f.values()[i] - orig.values()[i]));
    }
    EXPECT_LT(worst, 1e-12) << n;
  }
}

TEST(Fft2d, ParsevalHoldsForPhaseOnlyFields) {
  for (std::size_t n : {8u, 32u, 128u, 512u}) {
    holo::Pcg64 rng(n);
    ComplexField f(n, n);
    for (auto& v : f.values()) v = std::polar(1.0, 2.0 * std::numbers::pi * holo::uniform01(rng));
    Fft2d(n, n).forward(f);
    const double expected = static_cast<double>(n * n);
    EXPECT_LT(std::abs(f.energy() - expected) / expected, 1e-9) << n;
  }
}

TEST(Fft2d, Deterministic) {
  ComplexField a = random_field(64, 64, 11);
  ComplexField b = a;
  Fft2d(64, 64).forward(a);
  Fft2d(64, 64).forward(b);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a.values()[i], b.values()[i]);
  }
}
