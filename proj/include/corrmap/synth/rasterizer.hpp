#pragma once

#include "corrmap/core/image.hpp"
#include "corrmap/mesh/coloring.hpp"
#include "corrmap/synth/camera.hpp"

namespace corrmap::synth {

struct RasterResult {
  ImageU8 corr;              // H,W,3; background (0,0,0)
  Mask mask;                 // covered pixels
  ImageF depth;              // view-space depth, +inf where empty
  std::vector<int32_t> vertex;  // chosen vertex per pixel, -1 outside
};

// Software rasterizer: screen-space edge functions over pixel centers
// (x+0.5, y+0.5), depth buffer keeps the smaller view depth (first triangle
// wins exact ties). A pixel's correspondence color is the code of the
// covering triangle's vertex with the largest barycentric coordinate, so
// every foreground pixel decodes to exactly one vertex. Triangles with any
// vertex at or behind the near plane are dropped.
RasterResult rasterize(const std::vector<Vec3>& positions,
                       const std::vector<std::array<int, 3>>& faces,
                       const mesh::VertexColoring& coloring,
                       const Camera& camera);

}  // namespace corrmap::synth
