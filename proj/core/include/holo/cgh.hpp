#pragma once

// Phase-only hologram synthesis: Gerchberg-Saxton retrieval, reconstruction,
// phase-ramp steering, angular multiplexing and crosstalk metrics.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "holo/dft.hpp"

namespace holo::cgh {

/// Non-negative H x W amplitudes; both sides powers of two, at least 8.
class AmplitudeImage {
 public:
  AmplitudeImage(std::size_t width, std::size_t height);
  AmplitudeImage(std::size_t width, std::size_t height,
                 std::vector<double> values);

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  double operator()(std::size_t x, std::size_t y) const noexcept {
    return values_[y * width_ + x];
  }
  /// Writes are checked: negative or non-finite values throw.
  void set(std::size_t x, std::size_t y, double v);
  const std::vector<double>& values() const noexcept { return values_; }

  double energy() const noexcept;

 private:
  std::size_t width_;
  std::size_t height_;
  std::vector<double> values_;
};

/// Phase-only hologram; every phase lies in [0, 2*pi). Wavelength and pixel
/// pitch are carried as metadata for export only.
struct PhaseMap {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> phase;
  double wavelength_nm = 532.0;
  double pixel_pitch_um = 8.0;

  double operator()(std::size_t x, std::size_t y) const noexcept {
    return phase[y * width + x];
  }

  static PhaseMap flat(std::size_t width, std::size_t height);
  /// Throws cgh.invalid_phase_map on bad dimensions or out-of-range phases.
  void validate() const;
};

/// Half-open pixel rectangle [x0, x1) x [y0, y1) in the reconstruction plane.
struct ViewingZone {
  std::size_t x0 = 0;
  std::size_t y0 = 0;
  std::size_t x1 = 0;
  std::size_t y1 = 0;
  std::uint32_t owner = 0;

  std::size_t width() const noexcept { return x1 - x0; }
  std::size_t height() const noexcept { return y1 - y0; }
  bool overlaps(const ViewingZone& other) const noexcept;
};

struct GsResult {
  PhaseMap phase_map;
  std::vector<double> error_history;  // NMSE measured at each iteration
  std::size_t iterations_run = 0;
  std::uint64_t seed = 0;
  double final_nmse = 0.0;  // NMSE of the returned phase map
};

/// Maps any angle onto [0, 2*pi).
double wrap_phase(double angle) noexcept;

/// exp(i * phase) for every pixel.
ComplexField phase_field(const PhaseMap& pm);

/// Phase of every pixel of a complex field, wrapped to [0, 2*pi).
PhaseMap field_phase(const ComplexField& field);

/// |F(exp(i*phase))| with the unitary 2-D DFT.
AmplitudeImage reconstruct(const PhaseMap& pm);

/// Sum (|A| - T)^2 / sum T^2 after scaling T to the energy of A's field.
double nmse(const AmplitudeImage& reconstruction, const AmplitudeImage& target);

/// Classic two-plane error-reduction loop starting from a seeded uniform
/// random phase. error_history[k] is the NMSE of the phase held at the start
/// of iteration k.
GsResult gerchberg_saxton(const AmplitudeImage& target, std::size_t iterations,
                          std::uint64_t seed);

/// Adds 2*pi*(kx*x/W + ky*y/H); the reconstruction rolls by (kx, ky).
/// Requires |kx| < W/2 and |ky| < H/2.
PhaseMap phase_ramp(const PhaseMap& pm, long kx, long ky);

/// out(x + kx, y + ky) = in(x, y) with wrap-around.
AmplitudeImage circular_roll(const AmplitudeImage& img, long kx, long ky);

/// One user's target. The target image is hologram sized, with its support
/// inside [0, zone.width()) x [0, zone.height()); multiplexing steers that
/// corner onto the zone origin.
struct ZoneTarget {
  AmplitudeImage target;
  ViewingZone zone;
};

/// Per-user GS phases are steered to their zones, their unit fields summed,
/// and the phase of the sum returned. User i runs GS with seed + i.
PhaseMap multiplex_views(const std::vector<ZoneTarget>& targets,
                         std::size_t iterations, std::uint64_t seed);

/// Sum of squared amplitudes inside the zone.
double zone_energy(const AmplitudeImage& recon, const ViewingZone& zone);

inline constexpr double kCrosstalkFloorDb = -300.0;

/// Entry (i, j): 10*log10 of the energy of user j's intended pattern found
/// in zone i (projection of the zone crop onto that pattern) over the energy
/// of user i's own pattern found there. The diagonal is 0 dB; a zero
/// projection reports kCrosstalkFloorDb. All zones must share one size.
std::vector<std::vector<double>> crosstalk_matrix(
    const AmplitudeImage& recon, const std::vector<ZoneTarget>& targets);

/// 256-level quantization: v = round(phase * 256 / (2*pi)) mod 256.
std::vector<std::uint8_t> quantize_phase(const PhaseMap& pm);

struct ScalingSample {
  std::size_t n_pixels = 0;
  double seconds = 0.0;
  std::size_t iterations = 0;
};

struct ScalingFit {
  double coefficient = 0.0;  // a in t = a * N * log2(N)
  double r_squared = 0.0;
};

struct ScalingReport {
  std::vector<ScalingSample> samples;
  ScalingFit fit;
};

/// Least squares through the origin on x = N*log2(N).
ScalingFit fit_nlogn(const std::vector<ScalingSample>& samples);

/// Grid used for a power-of-two pixel count: width = 2^ceil(log2(N)/2).
void grid_for_pixels(std::size_t n_pixels, std::size_t& width,
                     std::size_t& height);

/// Times GS on a fixed pseudo-random binary target per size (best of
/// `repeats`) and fits the N*log N model. Runs on the calling thread.
ScalingReport benchmark_scaling(const std::vector<std::size_t>& sizes,
                                std::size_t iterations, std::size_t repeats = 3,
                                std::uint64_t seed = 42);

/// Seeded random binary pattern (0/1 amplitudes) used by benchmarks and demos.
AmplitudeImage random_binary_target(std::size_t width, std::size_t height,
                                    std::uint64_t seed);

}  // namespace holo::cgh
