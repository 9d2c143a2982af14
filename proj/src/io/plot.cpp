#include "corrmap/io/plot.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "corrmap/core/error.hpp"

namespace corrmap::io {
namespace {

// 3x5 glyphs for digits plus '.', '-', '%'. Rows top-down, 3 bits each.
const uint8_t* glyph(char c) {
  static const uint8_t digits[10][5] = {
      {7, 5, 5, 5, 7}, {2, 6, 2, 2, 7}, {7, 1, 7, 4, 7}, {7, 1, 7, 1, 7},
      {5, 5, 7, 1, 1}, {7, 4, 7, 1, 7}, {7, 4, 7, 5, 7}, {7, 1, 1, 1, 1},
      {7, 5, 7, 5, 7}, {7, 5, 7, 1, 7}};
  static const uint8_t dot[5] = {0, 0, 0, 0, 2};
  static const uint8_t minus[5] = {0, 0, 7, 0, 0};
  static const uint8_t pct[5] = {5, 1, 2, 4, 5};
  static const uint8_t blank[5] = {0, 0, 0, 0, 0};
  if (c >= '0' && c <= '9') return digits[c - '0'];
  if (c == '.') return dot;
  if (c == '-') return minus;
  if (c == '%') return pct;
  return blank;
}

void draw_text(ImageU8& im, int y, int x, const std::string& s, RGB8 c) {
  for (char ch : s) {
    const uint8_t* g = glyph(ch);
    for (int r = 0; r < 5; ++r)
      for (int b = 0; b < 3; ++b)
        if (g[r] & (4 >> b)) {
          const int yy = y + r, xx = x + b;
          if (yy >= 0 && yy < im.h && xx >= 0 && xx < im.w) put_rgb(im, yy, xx, c);
        }
    x += 4;
  }
}

void draw_line(ImageU8& im, int y0, int x0, int y1, int x1, RGB8 c) {
  const int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
  const int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  for (;;) {
    if (y0 >= 0 && y0 < im.h && x0 >= 0 && x0 < im.w) put_rgb(im, y0, x0, c);
    if (x0 == x1 && y0 == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

std::string fmt_tick(double v) {
  if (std::abs(v - std::round(v)) < 1e-9) return fmt::format("{}", (long long)std::llround(v));
  return fmt::format("{:.2f}", v);
}

}  // namespace

ImageU8 line_chart(const std::vector<double>& xs, const std::vector<double>& ys,
                   int width, int height) {
  if (xs.size() != ys.size() || xs.empty())
    throw InputError("line_chart: empty or mismatched series");
  ImageU8 im(height, width, 3);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) put_rgb(im, y, x, {250, 250, 250});

  const int ml = 42, mr = 12, mt = 12, mb = 26;  // margins
  const int x0 = ml, x1 = width - mr, y0 = height - mb, y1 = mt;
  double xmin = *std::min_element(xs.begin(), xs.end());
  double xmax = *std::max_element(xs.begin(), xs.end());
  double ymin = *std::min_element(ys.begin(), ys.end());
  double ymax = *std::max_element(ys.begin(), ys.end());
  if (xmax - xmin < 1e-12) xmax = xmin + 1;
  if (ymax - ymin < 1e-12) ymax = ymin + 1;
  const double ypad = 0.06 * (ymax - ymin);
  ymin -= ypad;
  ymax += ypad;

  auto px = [&](double x) {
    return x0 + (int)std::lround((x - xmin) / (xmax - xmin) * (x1 - x0));
  };
  auto py = [&](double y) {
    return y0 - (int)std::lround((y - ymin) / (ymax - ymin) * (y0 - y1));
  };

  const RGB8 axis{70, 70, 70}, grid{225, 225, 225}, line{40, 90, 200};
  for (int i = 0; i <= 4; ++i) {
    const double gy = ymin + (ymax - ymin) * i / 4.0;
    draw_line(im, py(gy), x0, py(gy), x1, grid);
    draw_text(im, py(gy) - 2, 4, fmt_tick(gy), axis);
  }
  for (size_t i = 0; i < xs.size(); ++i) {
    draw_line(im, y0, px(xs[i]), y0 + 3, px(xs[i]), axis);
    draw_text(im, y0 + 7, px(xs[i]) - 6, fmt_tick(xs[i]), axis);
  }
  draw_line(im, y0, x0, y0, x1, axis);
  draw_line(im, y0, x0, y1, x0, axis);

  for (size_t i = 0; i + 1 < xs.size(); ++i)
    draw_line(im, py(ys[i]), px(xs[i]), py(ys[i + 1]), px(xs[i + 1]), line);
  for (size_t i = 0; i < xs.size(); ++i) {
    const int cy = py(ys[i]), cx = px(xs[i]);
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx)
        if (cy + dy >= 0 && cy + dy < height && cx + dx >= 0 && cx + dx < width)
          put_rgb(im, cy + dy, cx + dx, line);
  }
  return im;
}

ImageU8 hstack(const std::vector<const ImageU8*>& panels, int pad) {
  if (panels.empty()) throw InputError("hstack: no panels");
  int h = 0, w = 0;
  for (const auto* p : panels) {
    h = std::max(h, p->h);
    w += p->w;
  }
  w += pad * ((int)panels.size() - 1);
  ImageU8 out(h, w, 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) put_rgb(out, y, x, {16, 16, 16});
  int ox = 0;
  for (const auto* p : panels) {
    for (int y = 0; y < p->h; ++y)
      for (int x = 0; x < p->w; ++x) {
        RGB8 c = p->c == 3 ? get_rgb(*p, y, x)
                           : RGB8{p->at(y, x), p->at(y, x), p->at(y, x)};
        put_rgb(out, y, ox + x, c);
      }
    ox += p->w + pad;
  }
  return out;
}

}  // namespace corrmap::io
