#pragma once

// Binary PGM (P5) I/O for amplitude targets, reconstructions and 8-bit
// phase exports with their metadata sidecar.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "holo/cgh.hpp"

namespace holo::pgm {

struct GrayImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::uint16_t maxval = 255;  // <= 255 means 8-bit samples, else 16-bit
  std::vector<std::uint16_t> pixels;
};

GrayImage read(std::istream& is);
GrayImage read_file(const std::string& path);
void write(std::ostream& os, const GrayImage& img);
void write_file(const std::string& path, const GrayImage& img);

/// Pixel value / maxval as amplitude.
cgh::AmplitudeImage to_amplitude(const GrayImage& img);

/// Scales the amplitude so its peak maps to maxval.
GrayImage from_amplitude(const cgh::AmplitudeImage& amp, std::uint16_t maxval = 255);

/// 8-bit image where pixel v encodes phase 2*pi*v/256.
GrayImage from_phase(const cgh::PhaseMap& pm);

/// Writes `<stem>.pgm` and `<stem>.meta` (wavelength_nm, pixel_pitch_um,
/// seed as key = value lines).
void export_phase(const std::string& stem, const cgh::PhaseMap& pm,
                  std::uint64_t seed);

}  // namespace holo::pgm
