#pragma once

#include <png.h>

#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "srwd/error.hpp"
#include "srwd/tensor.hpp"

namespace srwd {

/// Decoded PNG, values scaled to [0,1].
struct PngImage {
  ImageTensor pixels;
  int bit_depth = 8;
};

namespace detail {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

inline FilePtr open_file(const std::filesystem::path& p, const char* mode) {
  FilePtr f(std::fopen(p.string().c_str(), mode));
  require(f != nullptr, ErrorCode::IoError, "cannot open " + p.string());
  return f;
}

}  // namespace detail

/// Reads 1/2/4/8/16-bit gray, gray+alpha, RGB, RGBA or palette PNGs. Alpha is
/// dropped; gray images yield one channel, everything else three.
inline PngImage read_png(const std::filesystem::path& path) {
  auto fp = detail::open_file(path, "rb");
  png_byte sig[8];
  require(std::fread(sig, 1, 8, fp.get()) == 8 && png_sig_cmp(sig, 0, 8) == 0, ErrorCode::IoError,
          path.string() + " is not a PNG file");

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  require(png != nullptr, ErrorCode::IoError, "png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  std::vector<png_byte> buffer;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::IoError, "failed to decode " + path.string());
  }
  png_init_io(png, fp.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  const auto color = png_get_color_type(png, info);
  const int depth_in = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth_in < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);

  const std::size_t w = png_get_image_width(png, info);
  const std::size_t h = png_get_image_height(png, info);
  const std::size_t ch = png_get_channels(png, info);
  const int depth = png_get_bit_depth(png, info);
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  buffer.resize(rowbytes * h);
  rows.resize(h);
  for (std::size_t y = 0; y < h; ++y) rows[y] = buffer.data() + y * rowbytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  PngImage out;
  out.bit_depth = depth == 16 ? 16 : 8;
  out.pixels = ImageTensor(ch, h, w);
  const double maxv = depth == 16 ? 65535.0 : 255.0;
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x)
      for (std::size_t c = 0; c < ch; ++c) {
        const std::size_t i = x * ch + c;
        const unsigned v = depth == 16 ? (unsigned(rows[y][2 * i]) << 8) | rows[y][2 * i + 1]
                                       : rows[y][i];
        out.pixels(c, y, x) = double(v) / maxv;
      }
  return out;
}

/// Writes a 1- or 3-channel tensor, clipping to [0,1] and rounding to the
/// nearest code value.
inline void write_png(const std::filesystem::path& path, const ImageTensor& img, int bit_depth = 8) {
  require(img.channels() == 1 || img.channels() == 3, ErrorCode::BadShape,
          "PNG output needs 1 or 3 channels");
  require(bit_depth == 8 || bit_depth == 16, ErrorCode::BadFlag, "bit depth must be 8 or 16");
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());

  const std::size_t h = img.height(), w = img.width(), ch = img.channels();
  const std::size_t bps = bit_depth == 16 ? 2 : 1;
  const double maxv = bit_depth == 16 ? 65535.0 : 255.0;
  std::vector<png_byte> buffer(h * w * ch * bps);
  std::vector<png_bytep> rows(h);
  for (std::size_t y = 0; y < h; ++y) {
    rows[y] = buffer.data() + y * w * ch * bps;
    for (std::size_t x = 0; x < w; ++x)
      for (std::size_t c = 0; c < ch; ++c) {
        const double v = std::min(std::max(img(c, y, x), 0.0), 1.0);
        const auto code = static_cast<unsigned>(std::lround(v * maxv));
        const std::size_t i = x * ch + c;
        if (bps == 2) {
          rows[y][2 * i] = png_byte(code >> 8);
          rows[y][2 * i + 1] = png_byte(code & 0xff);
        } else {
          rows[y][i] = png_byte(code);
        }
      }
  }

  auto fp = detail::open_file(path, "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  require(png != nullptr, ErrorCode::IoError, "png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::IoError, "failed to encode " + path.string());
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, png_uint_32(w), png_uint_32(h), bit_depth,
               ch == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

/// Center crop to (h, w).
inline ImageTensor center_crop(const ImageTensor& img, std::size_t h, std::size_t w) {
  require(h <= img.height() && w <= img.width(), ErrorCode::ImageTooSmall,
          "crop larger than image");
  const std::size_t oy = (img.height() - h) / 2, ox = (img.width() - w) / 2;
  ImageTensor out(img.channels(), h, w);
  out.set_range(img.range());
  for (std::size_t c = 0; c < img.channels(); ++c)
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x) out(c, y, x) = img(c, oy + y, ox + x);
  return out;
}

/// Rounds values to the grid an 8- or 16-bit PNG would store.
inline ImageTensor quantize(const ImageTensor& img, int bit_depth) {
  const double maxv = bit_depth == 16 ? 65535.0 : 255.0;
  ImageTensor out = img;
  for (double& v : out.data()) v = double(std::lround(std::min(std::max(v, 0.0), 1.0) * maxv)) / maxv;
  return out;
}

}  // namespace srwd
