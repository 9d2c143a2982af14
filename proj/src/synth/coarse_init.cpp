#include "corrmap/synth/coarse_init.hpp"

#include <unordered_map>

#include "corrmap/core/error.hpp"
#include "corrmap/core/rng.hpp"

namespace corrmap::synth {

Mask erode_mask(const Mask& mask, int px) {
  if (px < 0) throw InputError("erode_mask: negative radius");
  if (px == 0) return mask;
  Mask out(mask.h, mask.w, 1, 0);
  for (int y = 0; y < mask.h; ++y)
    for (int x = 0; x < mask.w; ++x) {
      if (!mask.at(y, x)) continue;
      bool keep = true;
      for (int dy = -px; dy <= px && keep; ++dy)
        for (int dx = -px; dx <= px; ++dx) {
          const int yy = y + dy, xx = x + dx;
          if (yy < 0 || yy >= mask.h || xx < 0 || xx >= mask.w ||
              !mask.at(yy, xx)) {
            keep = false;
            break;
          }
        }
      out.at(y, x) = keep ? 1 : 0;
    }
  return out;
}

ImageU8 simulate_coarse_init(const ImageU8& corr_gt, const Mask& mask,
                             int erosion_px, int noise_gap, uint64_t seed,
                             double mean_edge_length,
                             const mesh::VertexColoring& coloring,
                             const mesh::GeodesicTable& geodesics) {
  const Mask eroded = erode_mask(mask, erosion_px);
  ImageU8 init(corr_gt.h, corr_gt.w, 3, 0);
  const float radius = (float)(noise_gap * mean_edge_length);

  // Candidate vertices within the geodesic radius, built lazily per vertex.
  std::unordered_map<int, std::vector<int>> candidates;
  auto cands_for = [&](int v) -> const std::vector<int>& {
    auto it = candidates.find(v);
    if (it != candidates.end()) return it->second;
    std::vector<int> c;
    for (int u = 0; u < geodesics.n; ++u)
      if (geodesics.at(v, u) <= radius) c.push_back(u);
    return candidates.emplace(v, std::move(c)).first->second;
  };

  Rng rng(seed);
  for (int y = 0; y < corr_gt.h; ++y)
    for (int x = 0; x < corr_gt.w; ++x) {
      if (!eroded.at(y, x)) continue;
      const int v = mesh::color_to_vertex(get_rgb(corr_gt, y, x), coloring);
      const auto& cs = cands_for(v);
      const int pick = cs[rng.uniform_int((uint64_t)cs.size())];
      put_rgb(init, y, x, coloring.rgb(pick));
    }
  return init;
}

}  // namespace corrmap::synth
