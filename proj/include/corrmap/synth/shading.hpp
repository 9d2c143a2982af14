#pragma once

#include "corrmap/mesh/mesh.hpp"
#include "corrmap/synth/rasterizer.hpp"

namespace corrmap::synth {

// Lambertian shading with a fixed light and a seeded per-body-part procedural
// albedo (palette + stripe modulation over canonical height). Deterministic
// for a fixed seed. Background pixels take kBackgroundRgb.
inline constexpr RGB8 kBackgroundRgb{28, 30, 34};

// Shades an existing raster coverage; keeps rgb and mask exactly aligned.
ImageU8 shade_rgb(const mesh::TemplateMesh& tmpl,
                  const std::vector<Vec3>& positions,
                  const std::vector<std::array<int, 3>>& faces,
                  const RasterResult& raster, uint64_t appearance_seed);

// Convenience: rasterize then shade.
ImageU8 render_rgb(const mesh::TemplateMesh& tmpl,
                   const std::vector<Vec3>& positions, const Camera& camera,
                   uint64_t appearance_seed);

}  // namespace corrmap::synth
