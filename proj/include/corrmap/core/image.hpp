#pragma once

#include <cstdint>
#include <cstring>
#include <vector>

namespace corrmap {

// Dense H x W x C raster, row-major, interleaved channels.
template <typename T>
struct Image {
  int h = 0, w = 0, c = 0;
  std::vector<T> data;

  Image() = default;
  Image(int h_, int w_, int c_, T fill = T(0))
      : h(h_), w(w_), c(c_), data((size_t)h_ * w_ * c_, fill) {}

  T& at(int y, int x, int ch = 0) { return data[((size_t)y * w + x) * c + ch]; }
  const T& at(int y, int x, int ch = 0) const {
    return data[((size_t)y * w + x) * c + ch];
  }

  bool same_shape(const Image& o) const {
    return h == o.h && w == o.w && c == o.c;
  }
  bool operator==(const Image& o) const {
    return same_shape(o) && data == o.data;
  }
  size_t size() const { return data.size(); }
  bool empty() const { return data.empty(); }
};

using ImageU8 = Image<uint8_t>;
using ImageF = Image<float>;

// Foreground mask: single channel, 0 = background, 1 = foreground.
using Mask = Image<uint8_t>;

inline size_t mask_area(const Mask& m) {
  size_t n = 0;
  for (uint8_t v : m.data) n += v != 0;
  return n;
}

struct RGB8 {
  uint8_t r, g, b;
  bool operator==(const RGB8&) const = default;
};

inline RGB8 get_rgb(const ImageU8& im, int y, int x) {
  return {im.at(y, x, 0), im.at(y, x, 1), im.at(y, x, 2)};
}

inline void put_rgb(ImageU8& im, int y, int x, RGB8 v) {
  im.at(y, x, 0) = v.r;
  im.at(y, x, 1) = v.g;
  im.at(y, x, 2) = v.b;
}

}  // namespace corrmap
