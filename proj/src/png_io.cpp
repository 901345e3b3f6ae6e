#include "walkers/png_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <memory>
#include <vector>

#include "walkers/errors.hpp"

namespace walkers {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

struct PngImage {
  int width = 0;
  int height = 0;
  int channels = 0;                 // 1 = gray, 3 = rgb
  std::vector<unsigned char> data;  // row-major, interleaved
};

PngImage read_png(const std::string& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw FileMissingError("cannot open PNG for reading: " + path);

  unsigned char sig[8];
  if (std::fread(sig, 1, 8, fp.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw MalformedPngError("not a PNG file: " + path);
  }

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("libpng initialization failed");
  }
  PngImage out;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw MalformedPngError("malformed PNG: " + path);
  }
  png_init_io(png, fp.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  const int bit_depth = png_get_bit_depth(png, info);
  const int color_type = png_get_color_type(png, info);
  if (bit_depth != 8) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw UnsupportedPngError("unsupported PNG bit depth (only 8-bit): " + path);
  }
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  png_read_update_info(png, info);

  out.width = static_cast<int>(png_get_image_width(png, info));
  out.height = static_cast<int>(png_get_image_height(png, info));
  out.channels = static_cast<int>(png_get_channels(png, info));
  if (out.channels != 1 && out.channels != 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw UnsupportedPngError("unsupported PNG channel count: " + path);
  }

  out.data.resize(static_cast<size_t>(out.width) * out.height * out.channels);
  std::vector<png_bytep> rows(out.height);
  const size_t stride = static_cast<size_t>(out.width) * out.channels;
  for (int y = 0; y < out.height; ++y) rows[y] = out.data.data() + y * stride;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return out;
}

void write_png(const std::string& path, int width, int height, int channels,
               const unsigned char* data) {
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw IoError("cannot open PNG for writing: " + path);

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw IoError("libpng initialization failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("PNG write failed: " + path);
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, width, height, 8,
               channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<png_bytep> rows(height);
  const size_t stride = static_cast<size_t>(width) * channels;
  for (int y = 0; y < height; ++y) {
    rows[y] = const_cast<png_bytep>(data + y * stride);
  }
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

inline unsigned char to_byte(float v) {
  const float c = v < 0.0f ? 0.0f : (v > 1.0f ? 1.0f : v);
  return static_cast<unsigned char>(std::lround(c * 255.0f));
}

}  // namespace

Raster load_png_gray(const std::string& path) {
  PngImage img = read_png(path);
  Raster r(img.height, img.width);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      size_t i = (static_cast<size_t>(y) * img.width + x) * img.channels;
      float v;
      if (img.channels == 1) {
        v = img.data[i] / 255.0f;
      } else {
        // luminance-free reduction: plain channel mean
        v = (img.data[i] + img.data[i + 1] + img.data[i + 2]) / (3.0f * 255.0f);
      }
      r(y, x) = v;
    }
  }
  return r;
}

MultiChannelImage load_png_rgb(const std::string& path) {
  PngImage img = read_png(path);
  MultiChannelImage out;
  out.channels.assign(3, Raster(img.height, img.width));
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      size_t i = (static_cast<size_t>(y) * img.width + x) * img.channels;
      for (int c = 0; c < 3; ++c) {
        out.channels[c](y, x) = img.data[i + (img.channels == 3 ? c : 0)] / 255.0f;
      }
    }
  }
  return out;
}

void save_png_gray(const Raster& r, const std::string& path) {
  const int w = plane_width(r), h = plane_height(r);
  std::vector<unsigned char> buf(static_cast<size_t>(w) * h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) buf[static_cast<size_t>(y) * w + x] = to_byte(r(y, x));
  }
  write_png(path, w, h, 1, buf.data());
}

void save_png_rgb(const MultiChannelImage& img, const std::string& path) {
  if (img.channel_count() != 3) throw InvalidArgumentError("save_png_rgb: need 3 channels");
  const int w = img.width(), h = img.height();
  std::vector<unsigned char> buf(static_cast<size_t>(w) * h * 3);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < 3; ++c) {
        buf[(static_cast<size_t>(y) * w + x) * 3 + c] = to_byte(img.channels[c](y, x));
      }
    }
  }
  write_png(path, w, h, 3, buf.data());
}

void save_png_mask(const BinaryMask& m, const std::string& path) {
  const int w = plane_width(m), h = plane_height(m);
  std::vector<unsigned char> buf(static_cast<size_t>(w) * h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) buf[static_cast<size_t>(y) * w + x] = m(y, x) ? 255 : 0;
  }
  write_png(path, w, h, 1, buf.data());
}

BinaryMask load_png_mask(const std::string& path) {
  Raster r = load_png_gray(path);
  return (r >= 0.5f).cast<std::uint8_t>();
}

}  // namespace walkers
