// Copyright 2026 The SRG Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <png.h>

#include <csetjmp>
#include <cstdio>
#include <memory>
#include <vector>

#include "srg/dataio.hpp"
#include "srg/error.hpp"

namespace srg {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.string().c_str(), mode));
  if (!f) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
  return f;
}

void write_gray_png(const std::filesystem::path& path, int width, int height, int bit_depth,
                    const std::vector<png_bytep>& rows) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  FilePtr f = open_file(path, "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorKind::Io, "libpng initialisation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorKind::Io, "failed writing '" + path.string() + "'");
  }
  png_init_io(png, f.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height),
               bit_depth, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, const_cast<png_bytepp>(rows.data()));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace

DepthImage load_depth(const std::filesystem::path& path) {
  FilePtr f = open_file(path, "rb");
  png_byte sig[8];
  if (std::fread(sig, 1, 8, f.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw Error(ErrorKind::Io, "'" + path.string() + "' is not a PNG file");
  }
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorKind::Io, "libpng initialisation failed");
  }
  DepthImage img;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorKind::Io, "corrupt PNG '" + path.string() + "'");
  }
  png_init_io(png, f.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (color != PNG_COLOR_TYPE_GRAY || depth != 16) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorKind::Io, "'" + path.string() + "' is not a 16-bit grayscale PNG");
  }
#if defined(__BYTE_ORDER__) && __BYTE_ORDER__ == __ORDER_LITTLE_ENDIAN__
  png_set_swap(png);
#endif
  png_read_update_info(png, info);
  img.width = static_cast<int>(png_get_image_width(png, info));
  img.height = static_cast<int>(png_get_image_height(png, info));
  img.values.assign(static_cast<std::size_t>(img.width) * img.height, 0);
  rows.resize(static_cast<std::size_t>(img.height));
  for (int v = 0; v < img.height; ++v) {
    rows[static_cast<std::size_t>(v)] =
        reinterpret_cast<png_bytep>(img.values.data() + static_cast<std::size_t>(v) * img.width);
  }
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

DepthImage load_depth(const std::filesystem::path& path, int width, int height) {
  DepthImage img = load_depth(path);
  if (img.width != width || img.height != height) {
    throw Error(ErrorKind::DimensionMismatch,
                "'" + path.string() + "' is " + std::to_string(img.width) + "x" +
                    std::to_string(img.height) + ", expected " + std::to_string(width) + "x" +
                    std::to_string(height));
  }
  return img;
}

void save_depth(const DepthImage& depth, const std::filesystem::path& path) {
  if (depth.values.size() != static_cast<std::size_t>(depth.width) * depth.height) {
    throw Error(ErrorKind::DimensionMismatch, "depth values do not match width*height");
  }
  // PNG stores 16-bit samples big-endian.
  std::vector<png_byte> bytes(depth.values.size() * 2);
  for (std::size_t i = 0; i < depth.values.size(); ++i) {
    bytes[2 * i] = static_cast<png_byte>(depth.values[i] >> 8);
    bytes[2 * i + 1] = static_cast<png_byte>(depth.values[i] & 0xff);
  }
  std::vector<png_bytep> rows(static_cast<std::size_t>(depth.height));
  for (int v = 0; v < depth.height; ++v) {
    rows[static_cast<std::size_t>(v)] = bytes.data() + static_cast<std::size_t>(v) * depth.width * 2;
  }
  write_gray_png(path, depth.width, depth.height, 16, rows);
}

void save_placeholder_image(int width, int height, std::uint8_t value,
                            const std::filesystem::path& path) {
  std::vector<png_byte> bytes(static_cast<std::size_t>(width) * height, value);
  std::vector<png_bytep> rows(static_cast<std::size_t>(height));
  for (int v = 0; v < height; ++v) rows[static_cast<std::size_t>(v)] = bytes.data() + static_cast<std::size_t>(v) * width;
  write_gray_png(path, width, height, 8, rows);
}

}  // namespace srg
