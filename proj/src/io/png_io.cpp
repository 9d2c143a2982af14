#include "corrmap/io/png_io.hpp"

#include <png.h>

#include <cstdio>
#include <memory>

#include <fmt/format.h>

#include "corrmap/core/error.hpp"

namespace corrmap::io {
namespace {

struct FileCloser {
  void operator()(FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

}  // namespace

ImageU8 read_png(const std::string& path, int want_channels) {
  if (want_channels != 1 && want_channels != 3)
    throw InputError("read_png: want_channels must be 1 or 3");
  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f) throw InputError(fmt::format("cannot open PNG: {}", path));

  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw InputError("png_create_read_struct failed");
  }
  std::vector<png_bytep> rows;
  ImageU8 img;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw InputError(fmt::format("corrupt PNG: {}", path));
  }
  png_init_io(png, f.get());
  png_read_info(png, info);

  png_set_strip_16(png);
  png_set_strip_alpha(png);
  png_set_palette_to_rgb(png);
  png_set_expand_gray_1_2_4_to_8(png);
  if (want_channels == 3)
    png_set_gray_to_rgb(png);
  else
    png_set_rgb_to_gray(png, 1, -1.0, -1.0);
  png_read_update_info(png, info);

  const int h = (int)png_get_image_height(png, info);
  const int w = (int)png_get_image_width(png, info);
  img = ImageU8(h, w, want_channels);
  rows.resize(h);
  for (int y = 0; y < h; ++y)
    rows[y] = img.data.data() + (size_t)y * w * want_channels;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

void write_png(const std::string& path, const ImageU8& img) {
  if (img.c != 1 && img.c != 3)
    throw InputError("write_png: images must have 1 or 3 channels");
  FilePtr f(std::fopen(path.c_str(), "wb"));
  if (!f) throw InputError(fmt::format("cannot write PNG: {}", path));

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                            nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw InputError("png_create_write_struct failed");
  }
  std::vector<png_bytep> rows(img.h);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw InputError(fmt::format("PNG write failed: {}", path));
  }
  png_init_io(png, f.get());
  png_set_IHDR(png, info, img.w, img.h, 8,
               img.c == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < img.h; ++y)
    rows[y] = const_cast<png_bytep>(img.data.data() + (size_t)y * img.w * img.c);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

Mask read_mask_png(const std::string& path) {
  ImageU8 g = read_png(path, 1);
  Mask m(g.h, g.w, 1);
  for (size_t i = 0; i < g.data.size(); ++i) m.data[i] = g.data[i] > 127 ? 1 : 0;
  return m;
}

void write_mask_png(const std::string& path, const Mask& mask) {
  ImageU8 g(mask.h, mask.w, 1);
  for (size_t i = 0; i < mask.data.size(); ++i)
    g.data[i] = mask.data[i] ? 255 : 0;
  write_png(path, g);
}

}  // namespace corrmap::io
