#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "stseg/common.hpp"

namespace stseg {

// Minimal binary netpbm I/O: P5 (grayscale) and P6 (RGB), 8- or 16-bit.
// 16-bit samples are big-endian per the format definition.

struct ImageU16 {
  int height = 0;
  int width = 0;
  int channels = 0;  // 1 or 3
  int maxval = 65535;
  std::vector<std::uint16_t> data;  // row-major, interleaved channels

  std::size_t index(int y, int x, int c = 0) const {
    return (static_cast<std::size_t>(y) * width + x) * channels + c;
  }
  std::uint16_t at(int y, int x, int c = 0) const { return data[index(y, x, c)]; }
  std::uint16_t& at(int y, int x, int c = 0) { return data[index(y, x, c)]; }
};

namespace detail {

inline int pnm_token(std::istream& in) {
  // Skips whitespace and '#' comments, then reads one unsigned integer.
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (std::isspace(c)) {
      c = in.get();
    } else {
      break;
    }
  }
  if (c == EOF || !std::isdigit(c)) throw InputError("malformed netpbm header");
  long v = 0;
  while (c != EOF && std::isdigit(c)) {
    v = v * 10 + (c - '0');
    if (v > 1000000000L) throw InputError("netpbm header value out of range");
    c = in.get();
  }
  return static_cast<int>(v);
}

}  // namespace detail

inline ImageU16 read_pnm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open image: " + path);
  char m0 = 0, m1 = 0;
  in.get(m0);
  in.get(m1);
  if (m0 != 'P' || (m1 != '5' && m1 != '6'))
    throw InputError("unsupported image format (want binary PGM/PPM): " + path);
  const int channels = (m1 == '6') ? 3 : 1;
  ImageU16 img;
  img.channels = channels;
  img.width = detail::pnm_token(in);
  img.height = detail::pnm_token(in);
  img.maxval = detail::pnm_token(in);
  if (img.width <= 0 || img.height <= 0 || img.maxval <= 0 || img.maxval > 65535)
    throw InputError("invalid netpbm dimensions in " + path);
  // The header ends with exactly one whitespace byte (already consumed by
  // pnm_token's terminating read).
  const std::size_t samples =
      static_cast<std::size_t>(img.width) * img.height * channels;
  img.data.resize(samples);
  if (img.maxval < 256) {
    std::vector<std::uint8_t> raw(samples);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(samples));
    if (!in) throw InputError("truncated image data in " + path);
    for (std::size_t i = 0; i < samples; ++i) img.data[i] = raw[i];
  } else {
    std::vector<std::uint8_t> raw(samples * 2);
    in.read(reinterpret_cast<char*>(raw.data()),
            static_cast<std::streamsize>(samples * 2));
    if (!in) throw InputError("truncated image data in " + path);
    for (std::size_t i = 0; i < samples; ++i)
      img.data[i] = static_cast<std::uint16_t>((raw[2 * i] << 8) | raw[2 * i + 1]);
  }
  return img;
}

inline void write_pnm(const std::string& path, const ImageU16& img) {
  if (img.channels != 1 && img.channels != 3)
    throw InputError("write_pnm: channels must be 1 or 3");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write image: " + path);
  out << (img.channels == 3 ? "P6" : "P5") << "\n"
      << img.width << " " << img.height << "\n"
      << img.maxval << "\n";
  const std::size_t samples =
      static_cast<std::size_t>(img.width) * img.height * img.channels;
  if (img.maxval < 256) {
    std::vector<std::uint8_t> raw(samples);
    for (std::size_t i = 0; i < samples; ++i)
      raw[i] = static_cast<std::uint8_t>(img.data[i]);
    out.write(reinterpret_cast<const char*>(raw.data()),
              static_cast<std::streamsize>(samples));
  } else {
    std::vector<std::uint8_t> raw(samples * 2);
    for (std::size_t i = 0; i < samples; ++i) {
      raw[2 * i] = static_cast<std::uint8_t>(img.data[i] >> 8);
      raw[2 * i + 1] = static_cast<std::uint8_t>(img.data[i] & 0xff);
    }
    out.write(reinterpret_cast<const char*>(raw.data()),
              static_cast<std::streamsize>(samples * 2));
  }
  if (!out) throw InputError("failed writing image: " + path);
}

}  // namespace stseg
