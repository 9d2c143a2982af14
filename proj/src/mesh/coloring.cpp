#include "corrmap/mesh/coloring.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <set>

#include <fmt/format.h>

#include "corrmap/core/error.hpp"
#include "corrmap/core/thread_pool.hpp"

namespace corrmap::mesh {
namespace {

inline int linf(const std::array<int, 3>& a, const std::array<int, 3>& b) {
  return std::max({std::abs(a[0] - b[0]), std::abs(a[1] - b[1]),
                   std::abs(a[2] - b[2])});
}

}  // namespace

int VertexColoring::max_adjacent_delta(const TemplateMesh& mesh) const {
  int mx = 0;
  for (auto [a, b] : mesh.edges()) mx = std::max(mx, linf(colors[a], colors[b]));
  return mx;
}

VertexColoring build_coloring(const TemplateMesh& mesh) {
  const int nv = mesh.vertex_count();
  if ((int64_t)nv > 256ll * 256 * 256 - 1)
    throw InputError(fmt::format(
        "cannot color {} vertices with distinct 8-bit RGB triples", nv));

  float mn[3] = {mesh.vertices[0].x, mesh.vertices[0].y, mesh.vertices[0].z};
  float mx[3] = {mn[0], mn[1], mn[2]};
  for (const auto& v : mesh.vertices) {
    const float p[3] = {v.x, v.y, v.z};
    for (int a = 0; a < 3; ++a) {
      mn[a] = std::min(mn[a], p[a]);
      mx[a] = std::max(mx[a], p[a]);
    }
  }

  VertexColoring out;
  out.colors.resize(nv);
  for (int v = 0; v < nv; ++v) {
    const float p[3] = {mesh.vertices[v].x, mesh.vertices[v].y,
                        mesh.vertices[v].z};
    for (int a = 0; a < 3; ++a) {
      const float ext = mx[a] - mn[a];
      const double t = ext > 0 ? (p[a] - mn[a]) / ext : 0.0;
      out.colors[v][a] = (int)std::lround(t * 255.0);
    }
  }

  // Collision resolution, index order. The reserved background black counts
  // as occupied from the start.
  std::set<std::array<int, 3>> used;
  used.insert({0, 0, 0});
  for (int v = 0; v < nv; ++v) {
    auto& c = out.colors[v];
    while (used.count(c)) {
      int best = -1, headroom = -1;
      for (int a = 0; a < 3; ++a)
        if (255 - c[a] > headroom) {
          headroom = 255 - c[a];
          best = a;
        }
      if (headroom <= 0)
        throw InputError(
            fmt::format("coloring dead-end at vertex {}: no headroom left", v));
      c[best] += 1;
    }
    used.insert(c);
  }

  out.min_gap = 255;
  for (int i = 0; i < nv; ++i)
    for (int j = i + 1; j < nv; ++j)
      out.min_gap = std::min(out.min_gap, linf(out.colors[i], out.colors[j]));
  if (nv == 1) out.min_gap = 255;
  return out;
}

int vertex_to_color_index(int v, const VertexColoring& coloring) {
  if (v < 0 || v >= coloring.vertex_count())
    throw InputError(fmt::format("vertex index {} out of range [0,{})", v,
                                 coloring.vertex_count()));
  return v;
}

int color_to_vertex(RGB8 c, const VertexColoring& coloring) {
  int best = 0;
  int64_t bd = INT64_MAX;
  for (int v = 0; v < coloring.vertex_count(); ++v) {
    const auto& cv = coloring.colors[v];
    const int64_t dr = cv[0] - (int)c.r, dg = cv[1] - (int)c.g,
                  db = cv[2] - (int)c.b;
    const int64_t d = dr * dr + dg * dg + db * db;
    if (d < bd) {
      bd = d;
      best = v;
    }
  }
  return best;
}

void decode_colors(const float* rgb, int n, const VertexColoring& coloring,
                   int* out_vertices) {
  const int nv = coloring.vertex_count();
  parallel_for(n, [&](int64_t lo, int64_t hi) {
    for (int64_t i = lo; i < hi; ++i) {
      const float r = rgb[i * 3], g = rgb[i * 3 + 1], b = rgb[i * 3 + 2];
      int best = 0;
      float bd = std::numeric_limits<float>::max();
      for (int v = 0; v < nv; ++v) {
        const auto& cv = coloring.colors[v];
        const float dr = cv[0] - r, dg = cv[1] - g, db = cv[2] - b;
        const float d = dr * dr + dg * dg + db * db;
        if (d < bd) {
          bd = d;
          best = v;
        }
      }
      out_vertices[i] = best;
    }
  });
}

ColorIndex::ColorIndex(const VertexColoring& coloring) : coloring_(&coloring) {
  exact_.reserve(coloring.vertex_count() * 2);
  for (int v = coloring.vertex_count() - 1; v >= 0; --v) {
    const auto& c = coloring.colors[v];
    exact_[(uint32_t)((c[0] << 16) | (c[1] << 8) | c[2])] = v;
  }
}

int ColorIndex::lookup(RGB8 c) const {
  const auto it = exact_.find((uint32_t)(((int)c.r << 16) | ((int)c.g << 8) | c.b));
  return it != exact_.end() ? it->second : color_to_vertex(c, *coloring_);
}

}  // namespace corrmap::mesh
