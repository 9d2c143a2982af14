#include "corrmap/synth/skinning.hpp"

#include <fmt/format.h>

#include "corrmap/core/error.hpp"

namespace corrmap::synth {

std::vector<Vec3> articulate(const mesh::TemplateMesh& mesh,
                             const PoseParams& pose) {
  const size_t nb = mesh.bones.size();
  if (pose.bone_axis.size() != nb || pose.bone_angle.size() != nb)
    throw InputError(fmt::format(
        "pose has {} bone rotations but the mesh has {} bones",
        pose.bone_angle.size(), nb));

  // Forward kinematics. World transform of bone b maps its rest-local frame;
  // since rest rotations are identity, the skinning map for a vertex x is
  //   W_b(x) = R_chain(b) applied about the chain, anchored at joints.
  // Represent each bone's world transform as (R, t): p -> R*p + t, built so
  // that the identity pose yields R=I, t=0 for every bone.
  std::vector<Mat3> rot(nb);
  std::vector<Vec3> trans(nb);
  for (size_t b = 0; b < nb; ++b) {
    const Mat3 local = axis_angle(pose.bone_axis[b], pose.bone_angle[b]);
    const Vec3 joint = mesh.bones[b].rest;
    // Local transform: rotate about the joint -> p = joint + L*(p - joint)
    Mat3 lr = local;
    Vec3 lt = joint - local * joint;
    const int parent = mesh.bones[b].parent;
    if (parent < 0) {
      rot[b] = lr;
      trans[b] = lt;
    } else {
      rot[b] = rot[parent] * lr;
      trans[b] = rot[parent] * lt + trans[parent];
    }
  }

  std::vector<Vec3> out(mesh.vertices.size());
  const bool rigged = nb > 0 && !mesh.skin_weights.empty();
  for (size_t v = 0; v < mesh.vertices.size(); ++v) {
    const Vec3 rest = mesh.vertices[v];
    Vec3 p{0, 0, 0};
    if (rigged) {
      for (const auto& sw : mesh.skin_weights[v])
        p += (rot[sw.bone] * rest + trans[sw.bone]) * sw.w;
    } else {
      p = rest;
    }
    out[v] = p + pose.root_translation;
  }
  return out;
}

std::vector<Vec3> vertex_normals(const std::vector<Vec3>& vertices,
                                 const std::vector<std::array<int, 3>>& faces) {
  std::vector<Vec3> n(vertices.size(), Vec3{0, 0, 0});
  for (const auto& f : faces) {
    const Vec3 e1 = vertices[f[1]] - vertices[f[0]];
    const Vec3 e2 = vertices[f[2]] - vertices[f[0]];
    const Vec3 fn = cross(e1, e2);  // area-weighted
    n[f[0]] += fn;
    n[f[1]] += fn;
    n[f[2]] += fn;
  }
  for (auto& v : n) v = normalized(v);
  return n;
}

}  // namespace corrmap::synth
