#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "corrmap/core/vec3.hpp"

namespace corrmap::mesh {

struct Bone {
  std::string name;
  int parent = -1;        // -1 for the root
  Vec3 rest;              // joint position in the canonical pose
};

struct SkinWeight {
  int bone = 0;
  float w = 0;
};

// Canonical articulated surface. Vertices are the canonical (rest) pose;
// all correspondence codes refer to these indices.
struct TemplateMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> faces;
  std::vector<Bone> bones;
  std::vector<std::vector<SkinWeight>> skin_weights;  // one list per vertex

  int vertex_count() const { return (int)vertices.size(); }

  // Throws InputError on: out-of-range or degenerate faces, weights that are
  // negative or do not sum to 1 (tol 1e-6), bad bone parents, or a
  // disconnected edge graph (message names an unreachable component).
  void validate() const;

  // Undirected edge list (deduplicated) with Euclidean lengths.
  std::vector<std::pair<int, int>> edges() const;
  double mean_edge_length() const;

  // Hash over vertex/face/bone/weight bytes; keys the geodesic cache.
  uint64_t content_hash() const;

  // Bone with the largest skin weight; body-part id of a vertex.
  int dominant_bone(int vertex) const;
};

// OBJ subset: `v x y z` and `f i j k` (1-based). The rig sidecar is JSON with
// bones (name/parent/rest) and per-vertex sparse weights.
TemplateMesh load_obj_with_rig(const std::string& obj_path,
                               const std::string& rig_path);
void save_obj_with_rig(const TemplateMesh& mesh, const std::string& obj_path,
                       const std::string& rig_path);

}  // namespace corrmap::mesh
