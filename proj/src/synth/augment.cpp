#include "corrmap/synth/augment.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "corrmap/core/error.hpp"
#include "corrmap/core/rng.hpp"
#include "corrmap/synth/shading.hpp"

namespace corrmap::synth {

using data::Sample;
using data::SparseAnnot;

namespace {

// Nearest-neighbor warp of every sample plane through out(y,x) = in(map(y,x)).
// `map` returns input pixel coords or (-1,-1) for "outside".
template <typename MapFn>
Sample warp(const Sample& s, MapFn map) {
  const int h = s.height(), w = s.width();
  Sample o;
  o.rgb = ImageU8(h, w, 3);
  o.mask = Mask(h, w, 1, 0);
  o.corr_gt = ImageU8(h, w, 3, 0);
  o.init = ImageU8(h, w, 3, 0);
  o.instance = ImageU8(h, w, 1, 0);
  o.meta = s.meta;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      auto [iy, ix] = map(y, x);
      if (iy < 0 || iy >= h || ix < 0 || ix >= w) {
        put_rgb(o.rgb, y, x, kBackgroundRgb);
        continue;
      }
      put_rgb(o.rgb, y, x, get_rgb(s.rgb, iy, ix));
      o.mask.at(y, x) = s.mask.at(iy, ix);
      put_rgb(o.corr_gt, y, x, get_rgb(s.corr_gt, iy, ix));
      put_rgb(o.init, y, x, get_rgb(s.init, iy, ix));
      o.instance.at(y, x) = s.instance.at(iy, ix);
    }
  return o;
}

void rgb_to_hsv(RGB8 c, float* h, float* s, float* v) {
  const float r = c.r / 255.0f, g = c.g / 255.0f, b = c.b / 255.0f;
  const float mx = std::max({r, g, b}), mn = std::min({r, g, b});
  const float d = mx - mn;
  *v = mx;
  *s = mx > 0 ? d / mx : 0;
  if (d <= 0) {
    *h = 0;
    return;
  }
  if (mx == r)
    *h = 60.0f * std::fmod((g - b) / d, 6.0f);
  else if (mx == g)
    *h = 60.0f * ((b - r) / d + 2.0f);
  else
    *h = 60.0f * ((r - g) / d + 4.0f);
  if (*h < 0) *h += 360.0f;
}

RGB8 hsv_to_rgb8(float h, float s, float v) {
  h = std::fmod(std::fmod(h, 360.0f) + 360.0f, 360.0f);
  const float c = v * s;
  const float x = c * (1 - std::abs(std::fmod(h / 60.0f, 2.0f) - 1));
  const float m = v - c;
  float r = 0, g = 0, b = 0;
  if (h < 60) r = c, g = x;
  else if (h < 120) r = x, g = c;
  else if (h < 180) g = c, b = x;
  else if (h < 240) g = x, b = c;
  else if (h < 300) r = x, b = c;
  else r = c, b = x;
  auto to8 = [m](float t) {
    return (uint8_t)std::clamp((int)std::lround((t + m) * 255.0f), 0, 255);
  };
  return {to8(r), to8(g), to8(b)};
}

Sample upper_crop(const Sample& s) {
  const int h = s.height(), w = s.width();
  int y0 = h, y1 = -1, x0 = w, x1 = -1;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (s.mask.at(y, x)) {
        y0 = std::min(y0, y);
        y1 = std::max(y1, y);
        x0 = std::min(x0, x);
        x1 = std::max(x1, x);
      }
  if (y1 < 0) throw InputError("upper_crop: empty mask");
  // Upper 55% of the silhouette, squared up and clamped.
  const int ch = std::max(4, (int)std::lround(0.55 * (y1 - y0 + 1)));
  int cy0 = y0, cy1 = std::min(h - 1, y0 + ch - 1);
  int side = std::max(cy1 - cy0 + 1, x1 - x0 + 1);
  side = std::min(side, std::min(h, w));
  int cx0 = std::clamp((x0 + x1) / 2 - side / 2, 0, w - side);
  cy0 = std::clamp(cy0, 0, h - side);

  const float sy = (float)side / h, sx = (float)side / w;
  Sample o = warp(s, [&](int y, int x) {
    const int iy = cy0 + (int)(y * sy);
    const int ix = cx0 + (int)(x * sx);
    return std::pair<int, int>(iy, ix);
  });
  if (mask_area(o.mask) == 0) throw InputError("upper_crop: crop left no mask");
  // Annotations: inverse of the crop map where representable.
  o.annots.clear();
  for (const auto& a : s.annots) {
    const int ny = (int)((a.y - cy0) / sy), nx = (int)((a.x - cx0) / sx);
    if (ny >= 0 && ny < s.height() && nx >= 0 && nx < s.width() &&
        o.mask.at(ny, nx))
      o.annots.push_back({nx, ny, a.vertex});
  }
  return o;
}

Sample rotate(const Sample& s, float angle) {
  const float cx = s.width() / 2.0f, cy = s.height() / 2.0f;
  const float ca = std::cos(angle), sa = std::sin(angle);
  Sample o = warp(s, [&](int y, int x) {
    // inverse rotation of the output pixel center
    const float dx = x + 0.5f - cx, dy = y + 0.5f - cy;
    const float ix = ca * dx + sa * dy + cx;
    const float iy = -sa * dx + ca * dy + cy;
    return std::pair<int, int>((int)std::floor(iy), (int)std::floor(ix));
  });
  if (mask_area(o.mask) == 0) throw InputError("rotate: rotation left no mask");
  o.annots.clear();
  for (const auto& a : s.annots) {
    const float dx = a.x + 0.5f - cx, dy = a.y + 0.5f - cy;
    const int nx = (int)std::floor(ca * dx - sa * dy + cx);
    const int ny = (int)std::floor(sa * dx + ca * dy + cy);
    if (ny >= 0 && ny < s.height() && nx >= 0 && nx < s.width() &&
        o.mask.at(ny, nx))
      o.annots.push_back({nx, ny, a.vertex});
  }
  return o;
}

Sample hue_shift(const Sample& s, float degrees) {
  Sample o = s;
  for (int y = 0; y < s.height(); ++y)
    for (int x = 0; x < s.width(); ++x) {
      float h, sat, v;
      rgb_to_hsv(get_rgb(s.rgb, y, x), &h, &sat, &v);
      put_rgb(o.rgb, y, x, hsv_to_rgb8(h + degrees, sat, v));
    }
  return o;
}

Sample multi_person(const Sample& s, int k, uint64_t seed,
                    const std::vector<const Sample*>& others) {
  if ((int)others.size() < k - 1)
    throw InputError(fmt::format(
        "multi_person({}) needs {} extra samples, got {}", k, k - 1,
        others.size()));
  const int h = s.height(), w = s.width();
  std::vector<const Sample*> people{&s};
  for (int i = 0; i < k - 1; ++i) people.push_back(others[i]);

  Rng rng(seed);
  std::vector<std::pair<int, int>> offset(k, {0, 0});  // (dy, dx); base stays
  for (int i = 1; i < k; ++i)
    offset[i] = {rng.uniform_int(-h / 4, h / 4), rng.uniform_int(-w / 4, w / 4)};
  // Random depth order, front first.
  std::vector<int> order(k);
  for (int i = 0; i < k; ++i) order[i] = i;
  for (int i = k - 1; i > 0; --i)
    std::swap(order[i], order[rng.uniform_int((uint64_t)(i + 1))]);

  Sample o;
  o.rgb = ImageU8(h, w, 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) put_rgb(o.rgb, y, x, kBackgroundRgb);
  o.mask = Mask(h, w, 1, 0);
  o.corr_gt = ImageU8(h, w, 3, 0);
  o.init = ImageU8(h, w, 3, 0);
  o.instance = ImageU8(h, w, 1, 0);
  o.meta = s.meta;
  o.meta.instance_count = k;

  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      for (int oi = 0; oi < k; ++oi) {
        const int p = order[oi];
        const int iy = y - offset[p].first, ix = x - offset[p].second;
        if (iy < 0 || iy >= h || ix < 0 || ix >= w) continue;
        if (!people[p]->mask.at(iy, ix)) continue;
        put_rgb(o.rgb, y, x, get_rgb(people[p]->rgb, iy, ix));
        put_rgb(o.corr_gt, y, x, get_rgb(people[p]->corr_gt, iy, ix));
        put_rgb(o.init, y, x, get_rgb(people[p]->init, iy, ix));
        o.mask.at(y, x) = 1;
        o.instance.at(y, x) = (uint8_t)(p + 1);
        break;  // front-most placed person wins
      }
    }

  for (int p = 0; p < k; ++p)
    for (const auto& a : people[p]->annots) {
      const int ny = a.y + offset[p].first, nx = a.x + offset[p].second;
      if (ny >= 0 && ny < h && nx >= 0 && nx < w &&
          o.instance.at(ny, nx) == p + 1)
        o.annots.push_back({nx, ny, a.vertex});
    }
  return o;
}

}  // namespace

Sample augment(const Sample& s, const AugmentRecipe& recipe, uint64_t seed,
               const std::vector<const Sample*>& others) {
  switch (recipe.kind) {
    case AugmentRecipe::Kind::identity:
      return s;
    case AugmentRecipe::Kind::upper_crop:
      return upper_crop(s);
    case AugmentRecipe::Kind::rotate:
      return rotate(s, recipe.angle);
    case AugmentRecipe::Kind::hue_shift:
      return hue_shift(s, recipe.hue);
    case AugmentRecipe::Kind::multi_person:
      return multi_person(s, recipe.k, seed, others);
  }
  throw InputError("unknown augmentation recipe");
}

}  // namespace corrmap::synth
