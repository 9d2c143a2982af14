#include "corrmap/synth/rasterizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace corrmap::synth {

namespace {
constexpr float kNear = 1e-3f;
}

RasterResult rasterize(const std::vector<Vec3>& positions,
                       const std::vector<std::array<int, 3>>& faces,
                       const mesh::VertexColoring& coloring,
                       const Camera& camera) {
  const CameraFrame frame(camera);
  const int w = camera.width, h = camera.height;

  RasterResult r;
  r.corr = ImageU8(h, w, 3, 0);
  r.mask = Mask(h, w, 1, 0);
  r.depth = ImageF(h, w, 1, std::numeric_limits<float>::infinity());
  r.vertex.assign((size_t)h * w, -1);

  // Project everything once.
  std::vector<float> px(positions.size()), py(positions.size()),
      pz(positions.size());
  for (size_t i = 0; i < positions.size(); ++i)
    pz[i] = frame.project(positions[i], &px[i], &py[i]);

  for (const auto& f : faces) {
    const int i0 = f[0], i1 = f[1], i2 = f[2];
    if (pz[i0] <= kNear || pz[i1] <= kNear || pz[i2] <= kNear) continue;

    const float x0 = px[i0], y0 = py[i0];
    const float x1 = px[i1], y1 = py[i1];
    const float x2 = px[i2], y2 = py[i2];

    float area = (x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0);
    if (std::abs(area) < 1e-12f) continue;  // edge-on in projection
    const float sign = area > 0 ? 1.0f : -1.0f;

    const int minx = std::max(0, (int)std::floor(std::min({x0, x1, x2})));
    const int maxx = std::min(w - 1, (int)std::ceil(std::max({x0, x1, x2})));
    const int miny = std::max(0, (int)std::floor(std::min({y0, y1, y2})));
    const int maxy = std::min(h - 1, (int)std::ceil(std::max({y0, y1, y2})));
    if (minx > maxx || miny > maxy) continue;

    for (int yy = miny; yy <= maxy; ++yy) {
      const float cy = yy + 0.5f;
      for (int xx = minx; xx <= maxx; ++xx) {
        const float cx = xx + 0.5f;
        const float w0 =
            sign * ((x1 - cx) * (y2 - cy) - (x2 - cx) * (y1 - cy));
        const float w1 =
            sign * ((x2 - cx) * (y0 - cy) - (x0 - cx) * (y2 - cy));
        const float w2 =
            sign * ((x0 - cx) * (y1 - cy) - (x1 - cx) * (y0 - cy));
        if (w0 < 0 || w1 < 0 || w2 < 0) continue;

        const float inv = 1.0f / (sign * area);
        const float l0 = w0 * inv, l1 = w1 * inv, l2 = w2 * inv;
        const float z = l0 * pz[i0] + l1 * pz[i1] + l2 * pz[i2];
        float& zb = r.depth.at(yy, xx);
        if (z >= zb) continue;
        zb = z;

        int vtx = i0;
        float best = l0;
        if (l1 > best) {
          best = l1;
          vtx = i1;
        }
        if (l2 > best) {
          vtx = i2;
        }
        r.vertex[(size_t)yy * w + xx] = vtx;
        r.mask.at(yy, xx) = 1;
        put_rgb(r.corr, yy, xx, coloring.rgb(vtx));
      }
    }
  }
  return r;
}

}  // namespace corrmap::synth
