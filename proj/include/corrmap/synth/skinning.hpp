#pragma once

#include "corrmap/mesh/mesh.hpp"
#include "corrmap/synth/camera.hpp"

namespace corrmap::synth {

// Linear blend skinning. Each bone's world transform chains a translation to
// its rest joint with the posed rotation; a vertex is the weight-blended image
// of its rest position under each bone transform. Identity pose reproduces the
// canonical vertices exactly. Throws InputError on bone-count mismatch.
std::vector<Vec3> articulate(const mesh::TemplateMesh& mesh,
                             const PoseParams& pose);

// Per-vertex normals (area-weighted face normals, normalized) for shading.
std::vector<Vec3> vertex_normals(const std::vector<Vec3>& vertices,
                                 const std::vector<std::array<int, 3>>& faces);

}  // namespace corrmap::synth
