#include "corrmap/synth/shading.hpp"

#include <algorithm>
#include <cmath>

#include "corrmap/core/rng.hpp"
#include "corrmap/synth/skinning.hpp"

namespace corrmap::synth {
namespace {

RGB8 hsv_to_rgb(float h, float s, float v) {
  h = std::fmod(std::fmod(h, 360.0f) + 360.0f, 360.0f) / 60.0f;
  const int i = (int)h;
  const float f = h - i;
  const float p = v * (1 - s), q = v * (1 - s * f), t = v * (1 - s * (1 - f));
  float r, g, b;
  switch (i % 6) {
    case 0: r = v; g = t; b = p; break;
    case 1: r = q; g = v; b = p; break;
    case 2: r = p; g = v; b = t; break;
    case 3: r = p; g = q; b = v; break;
    case 4: r = t; g = p; b = v; break;
    default: r = v; g = p; b = q; break;
  }
  auto to8 = [](float x) { return (uint8_t)std::lround(std::clamp(x, 0.0f, 1.0f) * 255.0f); };
  return {to8(r), to8(g), to8(b)};
}

}  // namespace

ImageU8 shade_rgb(const mesh::TemplateMesh& tmpl,
                  const std::vector<Vec3>& positions,
                  const std::vector<std::array<int, 3>>& faces,
                  const RasterResult& raster, uint64_t appearance_seed) {
  Rng rng(appearance_seed);
  const int nparts = std::max<size_t>(1, tmpl.bones.size());
  std::vector<RGB8> palette(nparts);
  for (auto& c : palette)
    c = hsv_to_rgb((float)rng.uniform(0, 360), (float)rng.uniform(0.35, 0.9),
                   (float)rng.uniform(0.45, 0.95));
  const float stripe_freq = (float)rng.uniform(12.0, 36.0);
  const float stripe_phase = (float)rng.uniform(0.0, 6.28318);

  const std::vector<Vec3> normals = vertex_normals(positions, faces);
  const Vec3 light = normalized({0.3f, 0.8f, 0.5f});

  const int h = raster.mask.h, w = raster.mask.w;
  ImageU8 rgb(h, w, 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!raster.mask.at(y, x)) {
        put_rgb(rgb, y, x, kBackgroundRgb);
        continue;
      }
      const int v = raster.vertex[(size_t)y * w + x];
      const int part = tmpl.bones.empty() ? 0 : tmpl.dominant_bone(v);
      const RGB8 albedo = palette[part];
      const float stripe =
          0.82f + 0.18f * std::sin(tmpl.vertices[v].y * stripe_freq + stripe_phase);
      const float lambert = 0.35f + 0.65f * std::max(0.0f, dot(normals[v], light));
      const float k = stripe * lambert;
      auto to8 = [k](uint8_t c) {
        return (uint8_t)std::clamp((int)std::lround(c * k), 0, 255);
      };
      put_rgb(rgb, y, x, {to8(albedo.r), to8(albedo.g), to8(albedo.b)});
    }
  return rgb;
}

ImageU8 render_rgb(const mesh::TemplateMesh& tmpl,
                   const std::vector<Vec3>& positions, const Camera& camera,
                   uint64_t appearance_seed) {
  mesh::VertexColoring dummy;
  dummy.colors.assign(positions.size(), {1, 1, 1});
  const RasterResult r = rasterize(positions, tmpl.faces, dummy, camera);
  return shade_rgb(tmpl, positions, tmpl.faces, r, appearance_seed);
}

}  // namespace corrmap::synth
