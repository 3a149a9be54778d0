#include "holo/cgh.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>

#include "holo/error.hpp"
#include "holo/rng.hpp"

namespace holo::cgh {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_dims(std::size_t w, std::size_t h) {
  if (!is_power_of_two(w) || !is_power_of_two(h) || w < 8 || h < 8) {
    throw Error("cgh.non_power_of_two",
                "dimensions " + std::to_string(w) + "x" + std::to_string(h) +
                    " must be powers of two >= 8");
  }
}

long signed_shift(std::size_t offset, std::size_t extent) {
  const auto o = static_cast<long>(offset);
  const auto e = static_cast<long>(extent);
  return o < e / 2 ? o : o - e;
}

}  // namespace

AmplitudeImage::AmplitudeImage(std::size_t width, std::size_t height)
    : width_(width), height_(height), values_(width * height, 0.0) {
  check_dims(width, height);
}

AmplitudeImage::AmplitudeImage(std::size_t width, std::size_t height,
                               std::vector<double> values)
    : width_(width), height_(height), values_(std::move(values)) {
  check_dims(width, height);
  if (values_.size() != width * height) {
    throw Error("cgh.dimension_mismatch", "amplitude buffer has wrong size");
  }
  for (double v : values_) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw Error("cgh.negative_amplitude", "amplitudes must be finite and >= 0");
    }
  }
}

void AmplitudeImage::set(std::size_t x, std::size_t y, double v) {
  if (!(v >= 0.0) || !std::isfinite(v)) {
    throw Error("cgh.negative_amplitude", "amplitudes must be finite and >= 0");
  }
  values_.at(y * width_ + x) = v;
}

double AmplitudeImage::energy() const noexcept {
  double e = 0.0;
  for (double v : values_) e += v * v;
  return e;
}

PhaseMap PhaseMap::flat(std::size_t width, std::size_t height) {
  check_dims(width, height);
  PhaseMap pm;
  pm.width = width;
  pm.height = height;
  pm.phase.assign(width * height, 0.0);
  return pm;
}

void PhaseMap::validate() const {
  check_dims(width, height);
  if (phase.size() != width * height) {
    throw Error("cgh.invalid_phase_map", "phase buffer has wrong size");
  }
  for (double p : phase) {
    if (!(p >= 0.0 && p < kTwoPi)) {
      throw Error("cgh.invalid_phase_map", "phase outside [0, 2*pi)");
    }
  }
}

bool ViewingZone::overlaps(const ViewingZone& o) const noexcept {
  return x0 < o.x1 && o.x0 < x1 && y0 < o.y1 && o.y0 < y1;
}

double wrap_phase(double angle) noexcept {
  double a = std::fmod(angle, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  // a + 2*pi can round up to exactly 2*pi for tiny negative inputs.
  if (a >= kTwoPi) a = 0.0;
  return a;
}

ComplexField phase_field(const PhaseMap& pm) {
  ComplexField f(pm.width, pm.height);
  auto v = f.values();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::polar(1.0, pm.phase[i]);
  return f;
}

PhaseMap field_phase(const ComplexField& field) {
  PhaseMap pm;
  pm.width = field.width();
  pm.height = field.height();
  pm.phase.resize(field.size());
  auto v = field.values();
  for (std::size_t i = 0; i < v.size(); ++i) pm.phase[i] = wrap_phase(std::arg(v[i]));
  return pm;
}

AmplitudeImage reconstruct(const PhaseMap& pm) {
  pm.validate();
  ComplexField f = phase_field(pm);
  Fft2d(pm.width, pm.height).forward(f);
  std::vector<double> amp(f.size());
  auto v = f.values();
  for (std::size_t i = 0; i < v.size(); ++i) amp[i] = std::abs(v[i]);
  return AmplitudeImage(pm.width, pm.height, std::move(amp));
}

namespace {

// Target rescaled so that sum T^2 equals the given field energy.
std::vector<double> normalized_target(const AmplitudeImage& target,
                                      double field_energy) {
  const double e = target.energy();
  if (!(e > 0.0)) throw Error("cgh.zero_energy", "target has zero energy");
  const double scale = std::sqrt(field_energy / e);
  std::vector<double> t(target.values());
  for (double& v : t) v *= scale;
  return t;
}

double nmse_against(std::span<const Complex> field,
                    const std::vector<double>& target) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < field.size(); ++i) {
    const double d = std::abs(field[i]) - target[i];
    num += d * d;
    den += target[i] * target[i];
  }
  return num / den;
}

}  // namespace

double nmse(const AmplitudeImage& reconstruction, const AmplitudeImage& target) {
  if (reconstruction.width() != target.width() ||
      reconstruction.height() != target.height()) {
    throw Error("cgh.dimension_mismatch", "reconstruction and target differ");
  }
  const auto t = normalized_target(target, reconstruction.energy());
  double num = 0.0;
  double den = 0.0;
  const auto& a = reconstruction.values();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - t[i];
    num += d * d;
    den += t[i] * t[i];
  }
  return num / den;
}

GsResult gerchberg_saxton(const AmplitudeImage& target, std::size_t iterations,
                          std::uint64_t seed) {
  if (iterations < 1) throw Error("cgh.invalid_iterations", "iterations must be >= 1");
  const std::size_t w = target.width();
  const std::size_t h = target.height();
  const std::size_t n = w * h;
  const auto amp = normalized_target(target, static_cast<double>(n));
  const Fft2d fft(w, h);

  GsResult result;
  result.seed = seed;
  result.phase_map = PhaseMap::flat(w, h);
  auto& phase = result.phase_map.phase;
  Pcg64 rng(seed);
  for (double& p : phase) p = kTwoPi * uniform01(rng);

  ComplexField field(w, h);
  auto v = field.values();
  result.error_history.reserve(iterations);
  for (std::size_t it = 0; it < iterations; ++it) {
    for (std::size_t i = 0; i < n; ++i) v[i] = std::polar(1.0, phase[i]);
    fft.forward(field);
    result.error_history.push_back(nmse_against(v, amp));
    for (std::size_t i = 0; i < n; ++i) {
      const double mag = std::abs(v[i]);
      v[i] = mag > 0.0 ? v[i] * (amp[i] / mag) : Complex(amp[i], 0.0);
    }
    fft.inverse(field);
    for (std::size_t i = 0; i < n; ++i) phase[i] = wrap_phase(std::arg(v[i]));
  }
  result.iterations_run = iterations;

  for (std::size_t i = 0; i < n; ++i) v[i] = std::polar(1.0, phase[i]);
  fft.forward(field);
  result.final_nmse = nmse_against(v, amp);
  return result;
}

PhaseMap phase_ramp(const PhaseMap& pm, long kx, long ky) {
  pm.validate();
  const auto w = static_cast<long>(pm.width);
  const auto h = static_cast<long>(pm.height);
  if (std::labs(kx) >= w / 2 || std::labs(ky) >= h / 2) {
    throw Error("cgh.steering_out_of_range",
                "|kx| must be < W/2 and |ky| < H/2 to avoid aliasing");
  }
  PhaseMap out = pm;
  for (long y = 0; y < h; ++y) {
    // Reduce the integer products first to keep the ramp argument small.
    const long ry = ((ky * y) % h + h) % h;
    for (long x = 0; x < w; ++x) {
      const long rx = ((kx * x) % w + w) % w;
      const double ramp = kTwoPi * (static_cast<double>(rx) / static_cast<double>(w) +
                                    static_cast<double>(ry) / static_cast<double>(h));
      auto& p = out.phase[static_cast<std::size_t>(y * w + x)];
      p = wrap_phase(p + ramp);
    }
  }
  return out;
}

AmplitudeImage circular_roll(const AmplitudeImage& img, long kx, long ky) {
  const auto w = static_cast<long>(img.width());
  const auto h = static_cast<long>(img.height());
  std::vector<double> out(img.values().size());
  for (long y = 0; y < h; ++y) {
    const long ty = ((y + ky) % h + h) % h;
    for (long x = 0; x < w; ++x) {
      const long tx = ((x + kx) % w + w) % w;
      out[static_cast<std::size_t>(ty * w + tx)] =
          img(static_cast<std::size_t>(x), static_cast<std::size_t>(y));
    }
  }
  return AmplitudeImage(img.width(), img.height(), std::move(out));
}

namespace {

void check_zone_set(const std::vector<ZoneTarget>& targets) {
  if (targets.empty()) throw Error("cgh.no_targets", "at least one target required");
  const std::size_t w = targets.front().target.width();
  const std::size_t h = targets.front().target.height();
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const auto& [img, z] = targets[i];
    if (img.width() != w || img.height() != h) {
      throw Error("cgh.dimension_mismatch", "all targets must share one size");
    }
    if (z.x1 <= z.x0 || z.y1 <= z.y0 || z.x1 > w || z.y1 > h) {
      throw Error("cgh.zone_out_of_bounds", "zone " + std::to_string(i) + " is invalid");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (z.overlaps(targets[j].zone)) {
        throw Error("cgh.overlapping_zones", "zones " + std::to_string(j) +
                                                 " and " + std::to_string(i) +
                                                 " overlap");
      }
    }
  }
}

}  // namespace

PhaseMap multiplex_views(const std::vector<ZoneTarget>& targets,
                         std::size_t iterations, std::uint64_t seed) {
  check_zone_set(targets);
  const std::size_t w = targets.front().target.width();
  const std::size_t h = targets.front().target.height();
  ComplexField sum(w, h);
  auto acc = sum.values();
  for (std::size_t u = 0; u < targets.size(); ++u) {
    const auto& [img, zone] = targets[u];
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        if (img(x, y) != 0.0 && (x >= zone.width() || y >= zone.height())) {
          throw Error("cgh.support_exceeds_zone",
                      "target " + std::to_string(u) +
                          " has support outside its zone dimensions");
        }
      }
    }
    const GsResult gs = gerchberg_saxton(img, iterations, seed + u);
    const PhaseMap steered = phase_ramp(gs.phase_map, signed_shift(zone.x0, w),
                                        signed_shift(zone.y0, h));
    for (std::size_t i = 0; i < acc.size(); ++i) {
      acc[i] += std::polar(1.0, steered.phase[i]);
    }
  }
  return field_phase(sum);
}

double zone_energy(const AmplitudeImage& recon, const ViewingZone& zone) {
  if (zone.x1 > recon.width() || zone.y1 > recon.height() || zone.x1 < zone.x0 ||
      zone.y1 < zone.y0) {
    throw Error("cgh.zone_out_of_bounds", "zone outside reconstruction");
  }
  double e = 0.0;
  for (std::size_t y = zone.y0; y < zone.y1; ++y) {
    for (std::size_t x = zone.x0; x < zone.x1; ++x) e += recon(x, y) * recon(x, y);
  }
  return e;
}

std::vector<std::vector<double>> crosstalk_matrix(
    const AmplitudeImage& recon, const std::vector<ZoneTarget>& targets) {
  if (targets.empty()) throw Error("cgh.no_zones", "zone list is empty");
  check_zone_set(targets);
  const std::size_t zw = targets.front().zone.width();
  const std::size_t zh = targets.front().zone.height();
  for (const auto& t : targets) {
    if (t.zone.width() != zw || t.zone.height() != zh) {
      throw Error("cgh.zone_size_mismatch", "crosstalk needs equally sized zones");
    }
  }
  if (targets.front().target.width() != recon.width() ||
      targets.front().target.height() != recon.height()) {
    throw Error("cgh.dimension_mismatch", "targets and reconstruction differ");
  }
  const std::size_t k = targets.size();
  // found[i][j]: energy of the projection of zone i's crop onto pattern j.
  std::vector<std::vector<double>> found(k, std::vector<double>(k, 0.0));
  for (std::size_t j = 0; j < k; ++j) {
    const auto& pattern = targets[j].target;
    double pp = 0.0;
    for (std::size_t y = 0; y < zh; ++y) {
      for (std::size_t x = 0; x < zw; ++x) pp += pattern(x, y) * pattern(x, y);
    }
    if (!(pp > 0.0)) throw Error("cgh.zero_energy", "pattern has no energy in its zone");
    for (std::size_t i = 0; i < k; ++i) {
      const auto& z = targets[i].zone;
      double dot = 0.0;
      for (std::size_t y = 0; y < zh; ++y) {
        for (std::size_t x = 0; x < zw; ++x) {
          dot += recon(z.x0 + x, z.y0 + y) * pattern(x, y);
        }
      }
      found[i][j] = dot * dot / pp;
    }
  }
  std::vector<std::vector<double>> db(k, std::vector<double>(k, 0.0));
  for (std::size_t i = 0; i < k; ++i) {
    if (!(found[i][i] > 0.0)) {
      throw Error("cgh.degenerate_zone",
                  "zone " + std::to_string(i) + " holds none of its own pattern");
    }
    for (std::size_t j = 0; j < k; ++j) {
      if (i == j) continue;
      db[i][j] = found[i][j] > 0.0 ? 10.0 * std::log10(found[i][j] / found[i][i])
                                   : kCrosstalkFloorDb;
      if (db[i][j] < kCrosstalkFloorDb) db[i][j] = kCrosstalkFloorDb;
    }
  }
  return db;
}

std::vector<std::uint8_t> quantize_phase(const PhaseMap& pm) {
  pm.validate();
  std::vector<std::uint8_t> out(pm.phase.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto level = static_cast<long>(std::lround(pm.phase[i] * 256.0 / kTwoPi));
    out[i] = static_cast<std::uint8_t>(level % 256);
  }
  return out;
}

ScalingFit fit_nlogn(const std::vector<ScalingSample>& samples) {
  if (samples.empty()) throw Error("cgh.empty_fit", "no samples to fit");
  double sxx = 0.0;
  double sxt = 0.0;
  double mean_t = 0.0;
  for (const auto& s : samples) {
    const double n = static_cast<double>(s.n_pixels);
    const double x = n * std::log2(n);
    sxx += x * x;
    sxt += x * s.seconds;
    mean_t += s.seconds;
  }
  mean_t /= static_cast<double>(samples.size());
  ScalingFit fit;
  fit.coefficient = sxt / sxx;
  double ss_res = 0.0;
  double ss_tot = 0.0;
  for (const auto& s : samples) {
    const double n = static_cast<double>(s.n_pixels);
    const double r = s.seconds - fit.coefficient * n * std::log2(n);
    ss_res += r * r;
    ss_tot += (s.seconds - mean_t) * (s.seconds - mean_t);
  }
  fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

void grid_for_pixels(std::size_t n_pixels, std::size_t& width,
                     std::size_t& height) {
  if (!is_power_of_two(n_pixels) || n_pixels < 64) {
    throw Error("cgh.invalid_size",
                "pixel count " + std::to_string(n_pixels) + " is not a power of two >= 64");
  }
  std::size_t bits = 0;
  while ((std::size_t{1} << bits) < n_pixels) ++bits;
  width = std::size_t{1} << ((bits + 1) / 2);
  height = n_pixels / width;
}

AmplitudeImage random_binary_target(std::size_t width, std::size_t height,
                                    std::uint64_t seed) {
  AmplitudeImage img(width, height);
  Pcg64 rng(seed, 1);
  bool any = false;
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      const bool on = (rng() >> 63u) != 0;
      any = any || on;
      img.set(x, y, on ? 1.0 : 0.0);
    }
  }
  if (!any) img.set(0, 0, 1.0);
  return img;
}

ScalingReport benchmark_scaling(const std::vector<std::size_t>& sizes,
                                std::size_t iterations, std::size_t repeats,
                                std::uint64_t seed) {
  if (iterations < 10) {
    throw Error("cgh.invalid_iterations", "benchmark needs >= 10 iterations");
  }
  if (repeats < 1) repeats = 1;
  ScalingReport report;
  for (std::size_t n : sizes) {
    if (n < 64 * 64 || n > 1024 * 1024) {
      throw Error("cgh.invalid_size", "benchmark sizes must lie in [64^2, 1024^2]");
    }
    std::size_t w = 0;
    std::size_t h = 0;
    grid_for_pixels(n, w, h);
    const AmplitudeImage target = random_binary_target(w, h, seed);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < repeats; ++r) {
      const auto t0 = std::chrono::steady_clock::now();
      const GsResult res = gerchberg_saxton(target, iterations, seed);
      const auto t1 = std::chrono::steady_clock::now();
      if (res.iterations_run != iterations) {
        throw Error("cgh.benchmark", "GS stopped early");
      }
      best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
    }
    report.samples.push_back({n, best, iterations});
  }
  report.fit = fit_nlogn(report.samples);
  return report;
}

}  // namespace holo::cgh
