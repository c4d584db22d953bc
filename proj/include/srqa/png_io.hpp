#pragma once

#include "srqa/error.hpp"
#include "srqa/image.hpp"

#include <png.h>

#include <array>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <cstdio>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

namespace srqa {

struct PngHeader {
  int width = 0;
  int height = 0;
  int bit_depth = 0;
  int color_type = 0;
};

namespace detail {

inline std::uint32_t read_be32(const unsigned char* p) {
  return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) |
         std::uint32_t{p[3]};
}

inline void require_supported(const PngHeader& h, const std::filesystem::path& path) {
  const auto where = " in '" + path.string() + "'";
  if (h.bit_depth != 8)
    fail(ErrorKind::UnsupportedFormat,
         "only 8-bit PNG is supported, found bit depth " + std::to_string(h.bit_depth) + where);
  switch (h.color_type) {
    case 0:
    case 2: return;
    case 3: fail(ErrorKind::UnsupportedFormat, "palette PNG is not supported" + where);
    case 4:
    case 6: fail(ErrorKind::UnsupportedFormat, "PNG with alpha channel is not supported" + where);
    default:
      fail(ErrorKind::UnsupportedFormat,
           "unknown PNG color type " + std::to_string(h.color_type) + where);
  }
}

} // namespace detail

/// Reads only the IHDR chunk. Used to validate format and dimensions without
/// decoding pixel data.
inline PngHeader read_png_header(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    if (!std::filesystem::exists(path))
      fail(ErrorKind::FileNotFound, "file not found: '" + path.string() + "'");
    fail(ErrorKind::IoError, "cannot open '" + path.string() + "'");
  }
  std::array<unsigned char, 33> buf{};
  in.read(reinterpret_cast<char*>(buf.data()), buf.size());
  static constexpr unsigned char kSignature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (in.gcount() != static_cast<std::streamsize>(buf.size()) ||
      std::memcmp(buf.data(), kSignature, 8) != 0 || std::memcmp(buf.data() + 12, "IHDR", 4) != 0)
    fail(ErrorKind::UnsupportedFormat, "not a PNG file: '" + path.string() + "'");
  PngHeader h;
  h.width = static_cast<int>(detail::read_be32(buf.data() + 16));
  h.height = static_cast<int>(detail::read_be32(buf.data() + 20));
  h.bit_depth = buf[24];
  h.color_type = buf[25];
  if (h.width <= 0 || h.height <= 0)
    fail(ErrorKind::UnsupportedFormat, "invalid PNG dimensions in '" + path.string() + "'");
  return h;
}

namespace detail {

struct PngErrorSink {
  char message[256] = {};
};

inline void png_error_handler(png_structp png, png_const_charp msg) {
  auto* sink = static_cast<PngErrorSink*>(png_get_error_ptr(png));
  std::strncpy(sink->message, msg, sizeof(sink->message) - 1);
  png_longjmp(png, 1);
}

inline void png_warning_handler(png_structp, png_const_charp) {}

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};

} // namespace detail

/// Loads an 8-bit grayscale or RGB PNG with exact sample values. No gamma or
/// color transforms are applied.
inline RasterImage load_image(const std::filesystem::path& path) {
  const PngHeader header = read_png_header(path);
  detail::require_supported(header, path);

  std::unique_ptr<std::FILE, detail::FileCloser> file(std::fopen(path.c_str(), "rb"));
  if (!file) fail(ErrorKind::IoError, "cannot open '" + path.string() + "'");

  detail::PngErrorSink sink;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &sink,
                                           detail::png_error_handler, detail::png_warning_handler);
  if (!png) fail(ErrorKind::IoError, "libpng initialisation failed");
  png_infop info = png_create_info_struct(png);
  const int channels = header.color_type == 2 ? 3 : 1;
  std::vector<std::uint8_t> samples(static_cast<std::size_t>(header.width) * header.height *
                                    channels);
  std::vector<png_bytep> rows(static_cast<std::size_t>(header.height));
  for (int y = 0; y < header.height; ++y)
    rows[y] = samples.data() + static_cast<std::size_t>(y) * header.width * channels;

  // Nothing with a destructor may be created between here and the read calls.
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(ErrorKind::UnsupportedFormat,
         "cannot decode '" + path.string() + "': " + std::string(sink.message));
  }
  png_init_io(png, file.get());
  png_read_info(png, info);
  if (png_get_image_width(png, info) != static_cast<png_uint_32>(header.width) ||
      png_get_image_height(png, info) != static_cast<png_uint_32>(header.height))
    png_error(png, "header mismatch");
  png_set_interlace_handling(png);
  png_read_update_info(png, info);
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return RasterImage(header.width, header.height, channels, std::move(samples));
}

inline void save_image(const RasterImage& img, const std::filesystem::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width());
  image.height = static_cast<png_uint_32>(img.height());
  image.format = img.channels() == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&image, path.c_str(), 0, img.samples().data(), 0, nullptr)) {
    std::string message = image.message;
    png_image_free(&image);
    fail(ErrorKind::IoError, "cannot write '" + path.string() + "': " + message);
  }
}

} // namespace srqa
