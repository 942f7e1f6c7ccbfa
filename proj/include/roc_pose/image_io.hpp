#pragma once

#include <array>
#include <bit>
#include <cctype>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "roc_pose/error.hpp"
#include "roc_pose/image.hpp"

// Netpbm-family readers and writers: PFM (float, 1 or 3 channels), binary
// PGM (P5) and binary PPM (P6). PFM is written little-endian with scale
// -1.0 and rows stored bottom-to-top as the format requires.
namespace roc_pose::io {

namespace detail {

inline std::string read_token(std::istream &in) {
  std::string tok;
  char c;
  while (in.get(c)) {
    if (c == '#') {
      std::string skip;
      std::getline(in, skip);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(c);
  }
  return tok;
}

inline int parse_dim(const std::string &tok, const std::filesystem::path &path) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(tok, &used);
    if (used != tok.size() || v < 0) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception &) {
    throw Error(ErrorKind::kFormat,
                path.string() + ": bad header field '" + tok + "'");
  }
}

inline std::ifstream open_in(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  return in;
}

inline std::ofstream open_out(const std::filesystem::path &path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  return out;
}

inline void read_exact(std::istream &in, char *dst, std::size_t n,
                       const std::filesystem::path &path) {
  in.read(dst, static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n)
    throw Error(ErrorKind::kFormat,
                path.string() + ": truncated pixel data (expected " +
                    std::to_string(n) + " bytes, got " +
                    std::to_string(in.gcount()) + ")");
}

inline std::uint32_t byteswap32(std::uint32_t x) {
  return (x >> 24) | ((x >> 8) & 0xff00u) | ((x << 8) & 0xff0000u) | (x << 24);
}

}  // namespace detail

// Float image with interleaved channels (1 or 3), row-major, top row first.
struct FloatImage {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<float> values;
};

inline void write_pfm(const std::filesystem::path &path, const FloatImage &img) {
  if (img.channels != 1 && img.channels != 3)
    throw Error(ErrorKind::kInvalidArgument, "PFM supports 1 or 3 channels");
  auto out = detail::open_out(path);
  out << (img.channels == 3 ? "PF" : "Pf") << '\n'
      << img.width << ' ' << img.height << '\n'
      << "-1.0\n";
  const std::size_t row = static_cast<std::size_t>(img.width) * img.channels;
  std::vector<char> bytes(row * sizeof(float));
  for (int v = img.height - 1; v >= 0; --v) {
    for (std::size_t i = 0; i < row; ++i) {
      std::uint32_t bits = std::bit_cast<std::uint32_t>(img.values[v * row + i]);
      if constexpr (std::endian::native == std::endian::big)
        bits = detail::byteswap32(bits);
      std::memcpy(bytes.data() + i * 4, &bits, 4);
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  }
  if (!out) throw Error(ErrorKind::kIo, "write failed: " + path.string());
}

inline FloatImage read_pfm(const std::filesystem::path &path) {
  auto in = detail::open_in(path);
  const std::string magic = detail::read_token(in);
  FloatImage img;
  if (magic == "PF") {
    img.channels = 3;
  } else if (magic == "Pf") {
    img.channels = 1;
  } else {
    throw Error(ErrorKind::kFormat, path.string() + ": not a PFM file");
  }
  img.width = detail::parse_dim(detail::read_token(in), path);
  img.height = detail::parse_dim(detail::read_token(in), path);
  const std::string scale_tok = detail::read_token(in);
  double scale = 0;
  try {
    scale = std::stod(scale_tok);
  } catch (const std::exception &) {
    throw Error(ErrorKind::kFormat, path.string() + ": bad PFM scale");
  }
  if (scale == 0)
    throw Error(ErrorKind::kFormat, path.string() + ": bad PFM scale");
  const bool little = scale < 0;
  const std::size_t row = static_cast<std::size_t>(img.width) * img.channels;
  img.values.resize(row * img.height);
  std::vector<char> bytes(row * sizeof(float));
  for (int v = img.height - 1; v >= 0; --v) {
    detail::read_exact(in, bytes.data(), bytes.size(), path);
    for (std::size_t i = 0; i < row; ++i) {
      std::uint32_t bits;
      std::memcpy(&bits, bytes.data() + i * 4, 4);
      if (little != (std::endian::native == std::endian::little))
        bits = detail::byteswap32(bits);
      img.values[v * row + i] = std::bit_cast<float>(bits);
    }
  }
  return img;
}

inline void write_pfm(const std::filesystem::path &path, const DepthImage &depth) {
  write_pfm(path, FloatImage{depth.width(), depth.height(), 1, depth.data()});
}

inline DepthImage read_depth_pfm(const std::filesystem::path &path) {
  FloatImage img = read_pfm(path);
  if (img.channels != 1)
    throw Error(ErrorKind::kFormat,
                path.string() + ": expected single-channel PFM depth");
  DepthImage depth(img.width, img.height);
  depth.data() = std::move(img.values);
  return depth;
}

// Masks are stored as 0/255 so they are viewable; any nonzero byte reads as 1.
inline void write_pgm(const std::filesystem::path &path, const MaskImage &mask) {
  auto out = detail::open_out(path);
  out << "P5\n" << mask.width() << ' ' << mask.height() << "\n255\n";
  std::vector<char> bytes(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i)
    bytes[i] = static_cast<char>(mask.data()[i] ? 255 : 0);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::kIo, "write failed: " + path.string());
}

inline MaskImage read_pgm_mask(const std::filesystem::path &path) {
  auto in = detail::open_in(path);
  if (detail::read_token(in) != "P5")
    throw Error(ErrorKind::kFormat, path.string() + ": not a binary PGM");
  const int w = detail::parse_dim(detail::read_token(in), path);
  const int h = detail::parse_dim(detail::read_token(in), path);
  const int maxval = detail::parse_dim(detail::read_token(in), path);
  if (maxval <= 0 || maxval > 255)
    throw Error(ErrorKind::kFormat, path.string() + ": unsupported maxval");
  MaskImage mask(w, h);
  std::vector<char> bytes(mask.size());
  detail::read_exact(in, bytes.data(), bytes.size(), path);
  for (std::size_t i = 0; i < bytes.size(); ++i)
    mask.data()[i] = bytes[i] != 0 ? 1 : 0;
  return mask;
}

inline void write_ppm(const std::filesystem::path &path, const RgbImage &rgb) {
  auto out = detail::open_out(path);
  out << "P6\n" << rgb.width() << ' ' << rgb.height() << "\n255\n";
  std::vector<char> bytes(rgb.size() * 3);
  for (std::size_t i = 0; i < rgb.size(); ++i) {
    bytes[3 * i] = static_cast<char>(rgb.data()[i].r);
    bytes[3 * i + 1] = static_cast<char>(rgb.data()[i].g);
    bytes[3 * i + 2] = static_cast<char>(rgb.data()[i].b);
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::kIo, "write failed: " + path.string());
}

inline RgbImage read_ppm(const std::filesystem::path &path) {
  auto in = detail::open_in(path);
  if (detail::read_token(in) != "P6")
    throw Error(ErrorKind::kFormat, path.string() + ": not a binary PPM");
  const int w = detail::parse_dim(detail::read_token(in), path);
  const int h = detail::parse_dim(detail::read_token(in), path);
  const int maxval = detail::parse_dim(detail::read_token(in), path);
  if (maxval != 255)
    throw Error(ErrorKind::kFormat, path.string() + ": unsupported maxval");
  RgbImage rgb(w, h);
  std::vector<char> bytes(rgb.size() * 3);
  detail::read_exact(in, bytes.data(), bytes.size(), path);
  for (std::size_t i = 0; i < rgb.size(); ++i)
    rgb.data()[i] = {static_cast<std::uint8_t>(bytes[3 * i]),
                     static_cast<std::uint8_t>(bytes[3 * i + 1]),
                     static_cast<std::uint8_t>(bytes[3 * i + 2])};
  return rgb;
}

}  // namespace roc_pose::io
