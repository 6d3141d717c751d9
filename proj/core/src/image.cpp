/* Copyright 2026 The SoVTP Toolkit Authors.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "sovtp/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>

#include "sovtp/errors.hpp"

namespace sovtp {

Image::Image(int width, int height, Rgb fill) : width_(width), height_(height) {
  if (width < 0 || height < 0) throw ContractViolation("image dimensions must be non-negative");
  data_.resize(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3);
  for (std::size_t i = 0; i < data_.size(); i += 3) {
    data_[i] = fill.r;
    data_[i + 1] = fill.g;
    data_[i + 2] = fill.b;
  }
}

Rgb Image::at(int x, int y) const {
  if (!contains(x, y)) throw ContractViolation("pixel (" + std::to_string(x) + ", " + std::to_string(y) + ") outside image");
  const std::size_t i = (static_cast<std::size_t>(y) * width_ + x) * 3;
  return {data_[i], data_[i + 1], data_[i + 2]};
}

void Image::set(int x, int y, Rgb c) {
  if (!contains(x, y)) throw ContractViolation("pixel (" + std::to_string(x) + ", " + std::to_string(y) + ") outside image");
  const std::size_t i = (static_cast<std::size_t>(y) * width_ + x) * 3;
  data_[i] = c.r;
  data_[i + 1] = c.g;
  data_[i + 2] = c.b;
}

namespace {

struct MemoryReader {
  std::span<const std::uint8_t> data;
  std::size_t offset = 0;
};

void read_from_memory(png_structp png, png_bytep out, png_size_t count) {
  auto* reader = static_cast<MemoryReader*>(png_get_io_ptr(png));
  if (reader->offset + count > reader->data.size()) png_error(png, "truncated PNG data");
  std::memcpy(out, reader->data.data() + reader->offset, count);
  reader->offset += count;
}

void write_to_vector(png_structp png, png_bytep in, png_size_t count) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), in, in + count);
}

void flush_noop(png_structp) {}

// libpng reports fatal errors through longjmp; the message is captured here
// and rethrown as an exception once control is back in C++ code.
struct PngFailure {
  char message[256] = {0};
};

void record_error(png_structp png, png_const_charp msg) {
  auto* failure = static_cast<PngFailure*>(png_get_error_ptr(png));
  std::snprintf(failure->message, sizeof(failure->message), "%s", msg);
  png_longjmp(png, 1);
}

void warn_noop(png_structp, png_const_charp) {}

struct ReadHandles {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~ReadHandles() { png_destroy_read_struct(&png, &info, nullptr); }
};

struct WriteHandles {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~WriteHandles() { png_destroy_write_struct(&png, &info); }
};

}  // namespace

Image decode_png(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
    throw DataError("PNG: bad signature");
  }
  PngFailure failure;
  ReadHandles h;
  MemoryReader reader{bytes, 0};
  Image image;
  std::vector<png_bytep> rows;

  h.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &failure, record_error, warn_noop);
  if (h.png == nullptr) throw DataError("PNG: cannot allocate reader");
  h.info = png_create_info_struct(h.png);
  if (h.info == nullptr) throw DataError("PNG: cannot allocate info");

  if (setjmp(png_jmpbuf(h.png))) {
    throw DataError(std::string("PNG: ") + failure.message);
  }
  png_set_read_fn(h.png, &reader, read_from_memory);
  png_read_info(h.png, h.info);

  const png_uint_32 width = png_get_image_width(h.png, h.info);
  const png_uint_32 height = png_get_image_height(h.png, h.info);
  const int color_type = png_get_color_type(h.png, h.info);
  const int bit_depth = png_get_bit_depth(h.png, h.info);

  if (bit_depth == 16) png_set_strip_16(h.png);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(h.png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(h.png);
  if (png_get_valid(h.png, h.info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(h.png);
  if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA) {
    png_set_gray_to_rgb(h.png);
  }
  png_set_strip_alpha(h.png);
  png_set_interlace_handling(h.png);
  png_read_update_info(h.png, h.info);

  if (png_get_rowbytes(h.png, h.info) != static_cast<png_size_t>(width) * 3) {
    throw DataError("PNG: unexpected row layout after conversion");
  }
  image = Image(static_cast<int>(width), static_cast<int>(height));
  rows.resize(height);
  for (png_uint_32 y = 0; y < height; ++y) {
    rows[y] = image.bytes().data() + static_cast<std::size_t>(y) * width * 3;
  }
  png_read_image(h.png, rows.data());
  png_read_end(h.png, nullptr);
  return image;
}

std::vector<std::uint8_t> encode_png(const Image& image) {
  if (image.empty()) throw ContractViolation("cannot encode an empty image");
  PngFailure failure;
  WriteHandles h;
  std::vector<std::uint8_t> out;

  h.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &failure, record_error, warn_noop);
  if (h.png == nullptr) throw DataError("PNG: cannot allocate writer");
  h.info = png_create_info_struct(h.png);
  if (h.info == nullptr) throw DataError("PNG: cannot allocate info");

  if (setjmp(png_jmpbuf(h.png))) {
    throw DataError(std::string("PNG: ") + failure.message);
  }
  png_set_write_fn(h.png, &out, write_to_vector, flush_noop);
  png_set_IHDR(h.png, h.info, static_cast<png_uint_32>(image.width()),
               static_cast<png_uint_32>(image.height()), 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_set_filter(h.png, PNG_FILTER_TYPE_BASE, PNG_FILTER_NONE);
  png_set_compression_level(h.png, 6);
  png_write_info(h.png, h.info);
  const auto* base = image.bytes().data();
  for (int y = 0; y < image.height(); ++y) {
    png_write_row(h.png,
                  const_cast<png_bytep>(base + static_cast<std::size_t>(y) * image.width() * 3));
  }
  png_write_end(h.png, nullptr);
  return out;
}

Image read_png(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open image " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  try {
    return decode_png(bytes);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

void write_png(const std::string& path, const Image& image) {
  const auto bytes = encode_png(image);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write image " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("failed writing image " + path);
}

Image resize(const Image& image, int width, int height) {
  if (width <= 0 || height <= 0) throw ContractViolation("resize target must be positive");
  if (image.empty()) throw ContractViolation("cannot resize an empty image");
  if (width == image.width() && height == image.height()) return image;

  Image out(width, height);
  const double sx = static_cast<double>(image.width()) / width;
  const double sy = static_cast<double>(image.height()) / height;
  for (int y = 0; y < height; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, image.height() - 1.0);
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, image.height() - 1);
    const double wy = fy - y0;
    for (int x = 0; x < width; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, image.width() - 1.0);
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, image.width() - 1);
      const double wx = fx - x0;
      const Rgb a = image.at(x0, y0), b = image.at(x1, y0);
      const Rgb c = image.at(x0, y1), d = image.at(x1, y1);
      auto mix = [&](std::uint8_t pa, std::uint8_t pb, std::uint8_t pc, std::uint8_t pd) {
        const double top = pa + (pb - pa) * wx;
        const double bottom = pc + (pd - pc) * wx;
        return static_cast<std::uint8_t>(std::lround(top + (bottom - top) * wy));
      };
      out.set(x, y, {mix(a.r, b.r, c.r, d.r), mix(a.g, b.g, c.g, d.g), mix(a.b, b.b, c.b, d.b)});
    }
  }
  return out;
}

Image contact_sheet(std::span<const Image> frames, Rgb background) {
  if (frames.empty()) throw ContractViolation("contact sheet needs at least one frame");
  const int w = frames.front().width();
  const int h = frames.front().height();
  for (const auto& f : frames) {
    if (f.width() != w || f.height() != h) {
      throw ContractViolation("contact sheet frames must share dimensions");
    }
  }
  const int n = static_cast<int>(frames.size());
  const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
  const int rows = (n + cols - 1) / cols;
  Image sheet(cols * w, rows * h, background);
  for (int i = 0; i < n; ++i) {
    const int ox = (i % cols) * w;
    const int oy = (i / cols) * h;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) sheet.set(ox + x, oy + y, frames[static_cast<std::size_t>(i)].at(x, y));
    }
  }
  return sheet;
}

}  // namespace sovtp
