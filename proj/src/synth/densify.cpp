#include "corrmap/synth/densify.hpp"

#include <cstdint>
#include <limits>

#include <fmt/format.h>

#include "corrmap/core/error.hpp"

namespace corrmap::synth {
namespace {

inline bool covered(const ImageU8& img, int y, int x) {
  return img.at(y, x, 0) | img.at(y, x, 1) | img.at(y, x, 2);
}

inline int64_t d2(int y0, int x0, int y1, int x1) {
  const int64_t dy = y0 - y1, dx = x0 - x1;
  return dy * dy + dx * dx;
}

}  // namespace

ImageU8 densify_sparse_annotations(const std::vector<data::SparseAnnot>& annots,
                                   const ImageU8& init, const Mask& mask,
                                   const mesh::VertexColoring& coloring,
                                   float trust_radius) {
  if (mask_area(mask) == 0)
    throw InputError("densify_sparse_annotations: empty mask");
  const int h = mask.h, w = mask.w;

  ImageU8 annot_color(h, w, 3, 0);
  Mask annotated(h, w, 1, 0);
  for (const auto& a : annots) {
    if (a.x < 0 || a.x >= w || a.y < 0 || a.y >= h || !mask.at(a.y, a.x))
      throw InputError(fmt::format(
          "annotation at ({},{}) lies outside the mask", a.x, a.y));
    annotated.at(a.y, a.x) = 1;
    put_rgb(annot_color, a.y, a.x, mesh::vertex_to_color(a.vertex, coloring));
  }

  // Sources in scan order so equal-distance ties resolve to the smaller (y,x).
  struct Src {
    int y, x;
    RGB8 color;
  };
  std::vector<Src> sources, annot_sources;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (annotated.at(y, x)) {
        sources.push_back({y, x, get_rgb(annot_color, y, x)});
        annot_sources.push_back(sources.back());
      } else if (mask.at(y, x) && covered(init, y, x)) {
        sources.push_back({y, x, get_rgb(init, y, x)});
      }
    }

  const int64_t trust2 = (int64_t)(trust_radius * trust_radius);
  ImageU8 out(h, w, 3, 0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!mask.at(y, x)) continue;
      if (annotated.at(y, x)) {
        put_rgb(out, y, x, get_rgb(annot_color, y, x));
        continue;
      }
      if (covered(init, y, x)) {
        // Nearby annotation overrides the init.
        int64_t best = std::numeric_limits<int64_t>::max();
        RGB8 c{};
        for (const auto& a : annot_sources) {
          const int64_t d = d2(y, x, a.y, a.x);
          if (d < best) {
            best = d;
            c = a.color;
          }
        }
        if (!annot_sources.empty() && best < trust2)
          put_rgb(out, y, x, c);
        else
          put_rgb(out, y, x, get_rgb(init, y, x));
        continue;
      }
      int64_t best = std::numeric_limits<int64_t>::max();
      RGB8 c{};
      for (const auto& s : sources) {
        const int64_t d = d2(y, x, s.y, s.x);
        if (d < best) {  // scan order already favors smaller (y,x) on ties
          best = d;
          c = s.color;
        }
      }
      if (best == std::numeric_limits<int64_t>::max())
        throw InputError(
            "densify_sparse_annotations: no sources (empty init and no "
            "annotations)");
      put_rgb(out, y, x, c);
    }
  return out;
}

}  // namespace corrmap::synth
