#include "holo/pgm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "holo/csv.hpp"
#include "holo/error.hpp"

namespace holo::pgm {

namespace {

// Reads one whitespace-delimited header token, skipping '#' comments.
std::string header_token(std::istream& is) {
  std::string tok;
  int c = 0;
  while ((c = is.get()) != EOF) {
    if (c == '#') {
      while ((c = is.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  if (tok.empty()) throw Error("pgm.truncated", "unexpected end of PGM header");
  return tok;
}

std::size_t header_number(std::istream& is) {
  const std::string tok = header_token(is);
  if (!std::all_of(tok.begin(), tok.end(), [](unsigned char ch) { return std::isdigit(ch); })) {
    throw Error("pgm.bad_header", "expected a number, got '" + tok + "'");
  }
  return std::stoul(tok);
}

}  // namespace

GrayImage read(std::istream& is) {
  if (header_token(is) != "P5") throw Error("pgm.bad_magic", "only binary P5 is supported");
  GrayImage img;
  img.width = header_number(is);
  img.height = header_number(is);
  const std::size_t maxval = header_number(is);
  if (maxval == 0 || maxval > 65535) throw Error("pgm.bad_header", "maxval out of range");
  img.maxval = static_cast<std::uint16_t>(maxval);
  const std::size_t n = img.width * img.height;
  img.pixels.resize(n);
  if (maxval < 256) {
    std::vector<unsigned char> buf(n);
    is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(is.gcount()) != n) throw Error("pgm.truncated", "pixel data truncated");
    std::copy(buf.begin(), buf.end(), img.pixels.begin());
  } else {
    std::vector<unsigned char> buf(2 * n);
    is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(2 * n));
    if (static_cast<std::size_t>(is.gcount()) != 2 * n) throw Error("pgm.truncated", "pixel data truncated");
    for (std::size_t i = 0; i < n; ++i) {
      img.pixels[i] = static_cast<std::uint16_t>((buf[2 * i] << 8u) | buf[2 * i + 1]);
    }
  }
  for (auto p : img.pixels) {
    if (p > img.maxval) throw Error("pgm.bad_pixel", "pixel exceeds maxval");
  }
  return img;
}

GrayImage read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("pgm.io", "cannot open " + path);
  return read(f);
}

void write(std::ostream& os, const GrayImage& img) {
  if (img.pixels.size() != img.width * img.height) {
    throw Error("pgm.bad_image", "pixel buffer does not match dimensions");
  }
  os << "P5\n" << img.width << ' ' << img.height << '\n' << img.maxval << '\n';
  if (img.maxval < 256) {
    for (auto p : img.pixels) os.put(static_cast<char>(p));
  } else {
    for (auto p : img.pixels) {
      os.put(static_cast<char>(p >> 8u));
      os.put(static_cast<char>(p & 0xffu));
    }
  }
}

void write_file(const std::string& path, const GrayImage& img) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("pgm.io", "cannot open " + path + " for writing");
  write(f, img);
  if (!f) throw Error("pgm.io", "write failed for " + path);
}

cgh::AmplitudeImage to_amplitude(const GrayImage& img) {
  std::vector<double> v(img.pixels.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = static_cast<double>(img.pixels[i]) / static_cast<double>(img.maxval);
  }
  return cgh::AmplitudeImage(img.width, img.height, std::move(v));
}

GrayImage from_amplitude(const cgh::AmplitudeImage& amp, std::uint16_t maxval) {
  GrayImage img{amp.width(), amp.height(), maxval, {}};
  const auto& v = amp.values();
  const double peak = v.empty() ? 0.0 : *std::max_element(v.begin(), v.end());
  img.pixels.resize(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double s = peak > 0.0 ? v[i] / peak : 0.0;
    img.pixels[i] = static_cast<std::uint16_t>(std::lround(s * maxval));
  }
  return img;
}

GrayImage from_phase(const cgh::PhaseMap& pm) {
  const auto q = cgh::quantize_phase(pm);
  GrayImage img{pm.width, pm.height, 255, {}};
  img.pixels.assign(q.begin(), q.end());
  return img;
}

void export_phase(const std::string& stem, const cgh::PhaseMap& pm,
                  std::uint64_t seed) {
  write_file(stem + ".pgm", from_phase(pm));
  std::ofstream meta(stem + ".meta", std::ios::binary);
  if (!meta) throw Error("pgm.io", "cannot open " + stem + ".meta for writing");
  meta << "wavelength_nm = " << csv::format_number(pm.wavelength_nm) << '\n'
       << "pixel_pitch_um = " << csv::format_number(pm.pixel_pitch_um) << '\n'
       << "seed = " << seed << '\n';
}

}  // namespace holo::pgm
