#pragma once

#include <array>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "corrmap/core/image.hpp"
#include "corrmap/mesh/mesh.hpp"

namespace corrmap::mesh {

// Injective vertex -> RGB code. Channel values are raw integer labels in
// [0,255]; (0,0,0) is reserved for image background and never assigned.
struct VertexColoring {
  std::vector<std::array<int, 3>> colors;  // one triple per vertex
  int min_gap = 0;  // smallest pairwise L-inf distance between codes

  int vertex_count() const { return (int)colors.size(); }

  RGB8 rgb(int v) const {
    const auto& c = colors[v];
    return {(uint8_t)c[0], (uint8_t)c[1], (uint8_t)c[2]};
  }

  // Largest L-inf delta across any mesh edge; the continuity measure.
  int max_adjacent_delta(const TemplateMesh& mesh) const;
};

// Canonical position of each vertex, min-max normalized per axis to [0,255]
// and rounded. Collisions (and the reserved black) are resolved by
// incrementing the channel with the most headroom, scanning vertices in index
// order, until all codes are distinct. Deterministic.
// Throws InputError when vertex count exceeds 256^3 - 1.
VertexColoring build_coloring(const TemplateMesh& mesh);

int vertex_to_color_index(int v, const VertexColoring& coloring);  // range check
inline RGB8 vertex_to_color(int v, const VertexColoring& coloring) {
  vertex_to_color_index(v, coloring);
  return coloring.rgb(v);
}

// Nearest stored code by L2 in RGB space; ties break to the lowest vertex
// index. Total on all byte triples.
int color_to_vertex(RGB8 c, const VertexColoring& coloring);

// Batch decoder for real-valued colors (e.g. softmax color expectations).
// Same argmin with lowest-index ties.
void decode_colors(const float* rgb /* n x 3 */, int n,
                   const VertexColoring& coloring, int* out_vertices);

// O(1) decode for colors that are exact stored codes (all generated ground
// truth is); falls back to the nearest-neighbor scan otherwise.
class ColorIndex {
 public:
  explicit ColorIndex(const VertexColoring& coloring);
  int lookup(RGB8 c) const;

 private:
  const VertexColoring* coloring_;
  std::unordered_map<uint32_t, int> exact_;  // keyed by packed rgb
};

}  // namespace corrmap::mesh
