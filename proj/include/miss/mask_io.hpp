#pragma once

#include <png.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "miss/error.hpp"
#include "miss/geometry.hpp"

namespace miss {

enum class MaskFormat { pgm, png };

inline const char* extension(MaskFormat f) { return f == MaskFormat::png ? ".png" : ".pgm"; }

// 8-bit grayscale raster as read from disk, before thresholding.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;
};

inline MaskFormat detect_format(std::span<const std::uint8_t> bytes) {
  static constexpr std::uint8_t png_sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (bytes.size() >= 8 && std::equal(png_sig, png_sig + 8, bytes.begin())) return MaskFormat::png;
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '5') return MaskFormat::pgm;
  throw Error(ErrorKind::unsupported_format, "unsupported mask format (expected binary PGM or PNG)");
}

namespace detail {

inline GrayImage decode_pgm(std::span<const std::uint8_t> bytes) {
  std::size_t pos = 2;
  auto skip_ws = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_int = [&](const char* what) {
    skip_ws();
    long value = 0;
    const std::size_t start = pos;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      value = value * 10 + (bytes[pos] - '0');
      if (value > (1L << 30)) break;
      ++pos;
    }
    if (pos == start) throw Error(ErrorKind::unsupported_format, std::string("malformed PGM header: ") + what);
    return value;
  };
  const long w = read_int("width");
  const long h = read_int("height");
  const long maxval = read_int("maxval");
  if (pos >= bytes.size() || !std::isspace(bytes[pos]))
    throw Error(ErrorKind::unsupported_format, "malformed PGM header");
  ++pos;
  if (w <= 0 || h <= 0) throw Error(ErrorKind::invalid_argument, "zero-dimension image");
  if (maxval <= 0 || maxval > 255)
    throw Error(ErrorKind::unsupported_format, "only 8-bit PGM is supported (maxval " + std::to_string(maxval) + ")");
  const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  if (bytes.size() - pos < n) throw Error(ErrorKind::io, "truncated PGM pixel data");
  GrayImage img{static_cast<int>(w), static_cast<int>(h), {}};
  img.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                    bytes.begin() + static_cast<std::ptrdiff_t>(pos + n));
  return img;
}

inline GrayImage decode_png(std::span<const std::uint8_t> bytes) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    throw Error(ErrorKind::unsupported_format, std::string("cannot decode PNG: ") + image.message);
  }
  if (image.format != PNG_FORMAT_GRAY) {
    png_image_free(&image);
    throw Error(ErrorKind::unsupported_format, "only 8-bit single-channel PNG masks are supported");
  }
  if (image.width == 0 || image.height == 0) {
    png_image_free(&image);
    throw Error(ErrorKind::invalid_argument, "zero-dimension image");
  }
  GrayImage img{static_cast<int>(image.width), static_cast<int>(image.height), {}};
  img.pixels.resize(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, img.pixels.data(), 0, nullptr)) {
    throw Error(ErrorKind::unsupported_format, std::string("cannot decode PNG: ") + image.message);
  }
  return img;
}

inline std::vector<std::uint8_t> encode_png(const GrayImage& img) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width);
  image.height = static_cast<png_uint_32>(img.height);
  image.format = PNG_FORMAT_GRAY;
  png_alloc_size_t size = 0;
  if (!png_image_write_get_memory_size(image, size, 0, img.pixels.data(), 0, nullptr)) {
    throw Error(ErrorKind::io, std::string("cannot encode PNG: ") + image.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, img.pixels.data(), 0, nullptr)) {
    throw Error(ErrorKind::io, std::string("cannot encode PNG: ") + image.message);
  }
  out.resize(size);
  return out;
}

inline std::vector<std::uint8_t> encode_pgm(const GrayImage& img) {
  const std::string header =
      "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), img.pixels.begin(), img.pixels.end());
  return out;
}

}  // namespace detail

inline GrayImage decode_image(std::span<const std::uint8_t> bytes) {
  return detect_format(bytes) == MaskFormat::png ? detail::decode_png(bytes) : detail::decode_pgm(bytes);
}

// Foreground is every pixel with intensity strictly above `threshold`.
inline BinaryMask threshold_image(const GrayImage& img, int threshold = 0) {
  if (img.width <= 0 || img.height <= 0) throw Error(ErrorKind::invalid_argument, "zero-dimension image");
  std::vector<std::uint8_t> data(img.pixels.size());
  std::transform(img.pixels.begin(), img.pixels.end(), data.begin(),
                 [threshold](std::uint8_t v) { return static_cast<std::uint8_t>(v > threshold); });
  return BinaryMask(img.width, img.height, std::move(data));
}

inline BinaryMask decode_mask(std::span<const std::uint8_t> bytes, int threshold = 0) {
  return threshold_image(decode_image(bytes), threshold);
}

inline std::vector<std::uint8_t> encode_mask(const BinaryMask& mask, MaskFormat format) {
  GrayImage img{mask.width(), mask.height(), {}};
  img.pixels.resize(mask.size());
  auto src = mask.data();
  std::transform(src.begin(), src.end(), img.pixels.begin(),
                 [](std::uint8_t v) { return static_cast<std::uint8_t>(v ? 255 : 0); });
  return format == MaskFormat::png ? detail::encode_png(img) : detail::encode_pgm(img);
}

inline std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::io, "short write to " + path.string());
}

inline void write_text(const std::filesystem::path& path, std::string_view text) {
  write_file(path, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

inline MaskFormat format_of(const std::filesystem::path& path) {
  return detect_format(read_file(path));
}

inline BinaryMask load_mask(const std::filesystem::path& path, int threshold = 0) {
  return decode_mask(read_file(path), threshold);
}

inline void save_mask(const std::filesystem::path& path, const BinaryMask& mask, MaskFormat format) {
  write_file(path, encode_mask(mask, format));
}

// Shortest decimal form that round-trips to the same double.
inline std::string format_number(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

// One "x,y" pair per line.
inline std::string format_contour(const Contour& c) {
  std::string out;
  for (const auto& p : c.points) {
    out += format_number(p.x);
    out += ',';
    out += format_number(p.y);
    out += '\n';
  }
  return out;
}

inline Contour parse_contour(std::string_view text) {
  Contour c;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.remove_suffix(1);
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.front()))) line.remove_prefix(1);
    if (line.empty()) continue;
    const auto comma = line.find(',');
    Point p;
    bool ok = comma != std::string_view::npos;
    if (ok) {
      auto xs = line.substr(0, comma);
      auto ys = line.substr(comma + 1);
      while (!ys.empty() && ys.front() == ' ') ys.remove_prefix(1);
      auto rx = std::from_chars(xs.data(), xs.data() + xs.size(), p.x);
      auto ry = std::from_chars(ys.data(), ys.data() + ys.size(), p.y);
      ok = rx.ec == std::errc{} && ry.ec == std::errc{} && rx.ptr == xs.data() + xs.size() &&
           ry.ptr == ys.data() + ys.size() && p.finite();
    }
    if (!ok) {
      throw Error(ErrorKind::invalid_argument, "bad contour line " + std::to_string(line_no) + ": expected x,y");
    }
    c.points.push_back(p);
  }
  c.orientation = signed_area(c.points) >= 0 ? Orientation::positive : Orientation::negative;
  return c;
}

}  // namespace miss
