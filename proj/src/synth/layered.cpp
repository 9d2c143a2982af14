#include "corrmap/synth/layered.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "corrmap/core/rng.hpp"

#include "corrmap/synth/rasterizer.hpp"
#include "corrmap/synth/shading.hpp"
#include "corrmap/synth/skinning.hpp"

namespace corrmap::synth {
namespace {

bool name_has(const std::string& s, std::initializer_list<const char*> keys) {
  for (const char* k : keys)
    if (s.find(k) != std::string::npos) return true;
  return false;
}

// Faces whose vertices are all dominated by the listed bones, as a reindexed
// submesh suitable for its own coloring.
struct SubMesh {
  mesh::TemplateMesh mesh;       // canonical positions of the shell
  std::vector<int> vertex_map;   // submesh vertex -> template vertex
};

SubMesh garment_shell(const mesh::TemplateMesh& tmpl,
                      std::initializer_list<const char*> bone_keys,
                      float offset) {
  std::set<int> allowed;
  for (size_t b = 0; b < tmpl.bones.size(); ++b)
    if (name_has(tmpl.bones[b].name, bone_keys)) allowed.insert((int)b);

  std::vector<int> old_to_new(tmpl.vertices.size(), -1);
  SubMesh sub;
  const auto normals = vertex_normals(tmpl.vertices, tmpl.faces);
  for (const auto& f : tmpl.faces) {
    bool take = true;
    for (int v : f) take &= allowed.count(tmpl.dominant_bone(v)) > 0;
    if (!take) continue;
    std::array<int, 3> nf{};
    for (int e = 0; e < 3; ++e) {
      const int v = f[e];
      if (old_to_new[v] < 0) {
        old_to_new[v] = (int)sub.mesh.vertices.size();
        sub.mesh.vertices.push_back(tmpl.vertices[v] + normals[v] * offset);
        sub.vertex_map.push_back(v);
      }
      nf[e] = old_to_new[v];
    }
    sub.mesh.faces.push_back(nf);
  }
  return sub;
}

}  // namespace

LayeredResult make_layered(const mesh::TemplateMesh& tmpl,
                           const PoseParams& pose, float upper_offset,
                           float lower_offset, uint64_t appearance_seed) {
  const SubMesh upper = garment_shell(
      tmpl, {"chest", "spine", "upperarm", "neck"}, upper_offset);
  const SubMesh lower =
      garment_shell(tmpl, {"pelvis", "thigh"}, lower_offset);

  LayeredResult out;
  out.colorings[0] = mesh::build_coloring(tmpl);
  out.colorings[1] = mesh::build_coloring(upper.mesh);
  out.colorings[2] = mesh::build_coloring(lower.mesh);

  const std::vector<Vec3> body_pos = articulate(tmpl, pose);
  const auto deformed_normals = vertex_normals(body_pos, tmpl.faces);
  auto shell_positions = [&](const SubMesh& sub, float offset) {
    std::vector<Vec3> p(sub.mesh.vertices.size());
    for (size_t i = 0; i < p.size(); ++i) {
      const int v = sub.vertex_map[i];
      p[i] = body_pos[v] + deformed_normals[v] * offset;
    }
    return p;
  };
  const std::vector<Vec3> upper_pos = shell_positions(upper, upper_offset);
  const std::vector<Vec3> lower_pos = shell_positions(lower, lower_offset);

  const RasterResult body_r =
      rasterize(body_pos, tmpl.faces, out.colorings[0], pose.camera);
  const RasterResult upper_r =
      rasterize(upper_pos, upper.mesh.faces, out.colorings[1], pose.camera);
  const RasterResult lower_r =
      rasterize(lower_pos, lower.mesh.faces, out.colorings[2], pose.camera);
  const RasterResult* layers[3] = {&body_r, &upper_r, &lower_r};

  const int h = pose.camera.height, w = pose.camera.width;
  out.seg = ImageU8(h, w, 1, 0);
  for (int i = 0; i < 3; ++i) out.layer_corr[i] = ImageU8(h, w, 3, 0);

  data::Sample& s = out.sample;
  s.rgb = shade_rgb(tmpl, body_pos, tmpl.faces, body_r, appearance_seed);
  s.mask = Mask(h, w, 1, 0);
  s.corr_gt = ImageU8(h, w, 3, 0);
  s.init = ImageU8(h, w, 3, 0);
  s.instance = ImageU8(h, w, 1, 0);
  s.meta.pose = pose;
  s.meta.seed = appearance_seed;

  // Garment shading: seeded flat albedo with lambert over shell normals.
  Rng arng(appearance_seed ^ 0x9e3779b97f4a7c15ull);
  RGB8 garment_albedo[2];
  for (auto& c : garment_albedo) {
    const int g = arng.uniform_int(90, 220);
    c = {(uint8_t)arng.uniform_int(60, 230), (uint8_t)g,
         (uint8_t)arng.uniform_int(60, 230)};
  }
  const Vec3 light = normalized({0.3f, 0.8f, 0.5f});
  const std::vector<Vec3> upper_n = vertex_normals(upper_pos, upper.mesh.faces);
  const std::vector<Vec3> lower_n = vertex_normals(lower_pos, lower.mesh.faces);
  const std::vector<Vec3>* shell_normals[2] = {&upper_n, &lower_n};

  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      int win = -1;
      float depth = std::numeric_limits<float>::infinity();
      for (int i = 0; i < 3; ++i) {
        if (!layers[i]->mask.at(y, x)) continue;
        const float d = layers[i]->depth.at(y, x);
        if (d < depth) {
          depth = d;
          win = i;
        }
      }
      if (win < 0) continue;
      out.seg.at(y, x) = (uint8_t)(win + 1);
      put_rgb(out.layer_corr[win], y, x, get_rgb(layers[win]->corr, y, x));
      s.mask.at(y, x) = 1;
      s.instance.at(y, x) = 1;
      if (win == 0) {
        put_rgb(s.corr_gt, y, x, get_rgb(body_r.corr, y, x));
      } else {
        const int sv = layers[win]->vertex[(size_t)y * w + x];
        const float lam =
            0.35f + 0.65f * std::max(0.0f, dot((*shell_normals[win - 1])[sv], light));
        const RGB8 a = garment_albedo[win - 1];
        auto to8 = [lam](uint8_t c) {
          return (uint8_t)std::clamp((int)std::lround(c * lam), 0, 255);
        };
        put_rgb(s.rgb, y, x, {to8(a.r), to8(a.g), to8(a.b)});
      }
    }
  return out;
}

}  // namespace corrmap::synth
