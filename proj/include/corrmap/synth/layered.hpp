#pragma once

#include <array>

#include "corrmap/data/sample.hpp"
#include "corrmap/mesh/coloring.hpp"
#include "corrmap/synth/camera.hpp"

namespace corrmap::synth {

// Body plus two procedurally offset "garment" shells (template subsets pushed
// along vertex normals), rasterized into separate correspondence images with
// a shared depth buffer. Each layer carries its own coloring.
struct LayeredResult {
  data::Sample sample;                // composite rgb, union mask, zero init
  std::array<ImageU8, 3> layer_corr;  // body, upper garment, lower garment
  ImageU8 seg;                        // 0 bg, 1 body, 2 upper, 3 lower
  std::array<mesh::VertexColoring, 3> colorings;
};

LayeredResult make_layered(const mesh::TemplateMesh& tmpl,
                           const PoseParams& pose, float upper_offset,
                           float lower_offset, uint64_t appearance_seed);

}  // namespace corrmap::synth
