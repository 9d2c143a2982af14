// Builds the repo's rigged humanoid template: tube-based body parts welded
// into one connected edge graph, a 17-bone skeleton, and smooth chain-blended
// skin weights. Deterministic; run from the repo root to refresh assets/.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <initializer_list>
#include <limits>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "corrmap/mesh/coloring.hpp"
#include "corrmap/mesh/geodesics.hpp"
#include "corrmap/mesh/mesh.hpp"

using namespace corrmap;
using mesh::TemplateMesh;

namespace {

constexpr int kRingSegments = 14;

struct Builder {
  TemplateMesh m;

  int add_vertex(Vec3 p, std::vector<mesh::SkinWeight> w) {
    m.vertices.push_back(p);
    m.skin_weights.push_back(std::move(w));
    return (int)m.vertices.size() - 1;
  }

  void add_face(int a, int b, int c) { m.faces.push_back({a, b, c}); }

  int nearest_vertex(Vec3 p, int limit) const {
    int best = 0;
    float bd = std::numeric_limits<float>::max();
    for (int i = 0; i < limit; ++i) {
      const float d = dot(m.vertices[i] - p, m.vertices[i] - p);
      if (d < bd) {
        bd = d;
        best = i;
      }
    }
    return best;
  }
};

float smoothstep01(float u) {
  u = std::clamp(u, 0.0f, 1.0f);
  return u * u * (3.0f - 2.0f * u);
}

// Chain-blended weights at parameter t in [0,1] along a tube.
std::vector<mesh::SkinWeight> chain_weights(const std::vector<int>& chain,
                                            const std::vector<float>& chain_t,
                                            float t) {
  if (chain.size() == 1 || t <= chain_t.front()) return {{chain.front(), 1.0f}};
  if (t >= chain_t.back()) return {{chain.back(), 1.0f}};
  size_t j = 0;
  while (j + 1 < chain_t.size() && t > chain_t[j + 1]) ++j;
  const float u = (t - chain_t[j]) / (chain_t[j + 1] - chain_t[j]);
  const float s = smoothstep01(u);
  if (s <= 0.0f) return {{chain[j], 1.0f}};
  if (s >= 1.0f) return {{chain[j + 1], 1.0f}};
  return {{chain[j], 1.0f - s}, {chain[j + 1], s}};
}

struct TubeSpec {
  std::vector<Vec3> path;      // ring centers, >= 2
  std::vector<float> radius;   // per ring
  float flatten = 1.0f;        // z-radius multiplier (elliptical sections)
  std::vector<int> chain;      // bones along the tube
  std::vector<float> chain_t;  // chain joint parameters in [0,1]
  bool cap_start = false, cap_end = true;
  bool attach = false;         // fan-connect ring 0 to the nearest prior vertex
};

void add_tube(Builder& b, const TubeSpec& spec) {
  const int R = (int)spec.path.size();
  const int S = kRingSegments;
  const int base_limit = (int)b.m.vertices.size();

  // Orthonormal ring frame per segment (paths are near-straight).
  std::vector<std::vector<int>> rings(R);
  for (int r = 0; r < R; ++r) {
    const Vec3 t = normalized(
        spec.path[std::min(r + 1, R - 1)] - spec.path[std::max(r - 1, 0)]);
    Vec3 u = cross(t, Vec3{0, 1, 0});
    if (norm(u) < 1e-4f) u = cross(t, Vec3{1, 0, 0});
    u = normalized(u);
    const Vec3 v = cross(t, u);
    const float tt = R > 1 ? (float)r / (R - 1) : 0.0f;
    const auto w = chain_weights(spec.chain, spec.chain_t, tt);
    for (int s = 0; s < S; ++s) {
      const float a = 2.0f * 3.14159265358979f * s / S;
      const Vec3 p = spec.path[r] + u * (std::cos(a) * spec.radius[r]) +
                     v * (std::sin(a) * spec.radius[r] * spec.flatten);
      rings[r].push_back(b.add_vertex(p, w));
    }
  }
  for (int r = 0; r + 1 < R; ++r)
    for (int s = 0; s < S; ++s) {
      const int s1 = (s + 1) % S;
      b.add_face(rings[r][s], rings[r][s1], rings[r + 1][s1]);
      b.add_face(rings[r][s], rings[r + 1][s1], rings[r + 1][s]);
    }
  if (spec.cap_start) {
    const int c = b.add_vertex(spec.path.front(),
                               chain_weights(spec.chain, spec.chain_t, 0.0f));
    for (int s = 0; s < S; ++s)
      b.add_face(c, rings[0][(s + 1) % S], rings[0][s]);
  }
  if (spec.cap_end) {
    const int c = b.add_vertex(spec.path.back(),
                               chain_weights(spec.chain, spec.chain_t, 1.0f));
    for (int s = 0; s < S; ++s)
      b.add_face(c, rings[R - 1][s], rings[R - 1][(s + 1) % S]);
  }
  if (spec.attach && base_limit > 0) {
    const int anchor = b.nearest_vertex(spec.path.front(), base_limit);
    for (int s = 0; s < S; ++s)
      b.add_face(anchor, rings[0][s], rings[0][(s + 1) % S]);
  }
}

std::vector<Vec3> line_path(Vec3 a, Vec3 z, int rings) {
  std::vector<Vec3> p;
  for (int i = 0; i < rings; ++i) {
    const float t = rings > 1 ? (float)i / (rings - 1) : 0.0f;
    p.push_back(a + (z - a) * t);
  }
  return p;
}

std::vector<float> radius_profile(std::initializer_list<float> keys, int rings) {
  const std::vector<float> k(keys);
  std::vector<float> out(rings);
  for (int i = 0; i < rings; ++i) {
    const float t = rings > 1 ? (float)i / (rings - 1) : 0.0f;
    const float x = t * (k.size() - 1);
    const int j = std::min((int)x, (int)k.size() - 2);
    const float u = x - j;
    out[i] = k[j] * (1 - u) + k[j + 1] * u;
  }
  return out;
}

TemplateMesh build_humanoid() {
  Builder b;
  auto& bones = b.m.bones;
  auto add_bone = [&](const char* name, int parent, Vec3 rest) {
    bones.push_back({name, parent, rest});
    return (int)bones.size() - 1;
  };
  const int pelvis = add_bone("pelvis", -1, {0, 0.95f, 0});
  const int spine = add_bone("spine", pelvis, {0, 1.12f, 0});
  const int chest = add_bone("chest", spine, {0, 1.32f, 0});
  const int neck = add_bone("neck", chest, {0, 1.50f, 0});
  const int head = add_bone("head", neck, {0, 1.58f, 0});
  const int uarm_l = add_bone("upperarm_l", chest, {0.17f, 1.44f, 0});
  const int farm_l = add_bone("forearm_l", uarm_l, {0.43f, 1.44f, 0});
  const int hand_l = add_bone("hand_l", farm_l, {0.66f, 1.44f, 0});
  const int uarm_r = add_bone("upperarm_r", chest, {-0.17f, 1.44f, 0});
  const int farm_r = add_bone("forearm_r", uarm_r, {-0.43f, 1.44f, 0});
  const int hand_r = add_bone("hand_r", farm_r, {-0.66f, 1.44f, 0});
  const int thigh_l = add_bone("thigh_l", pelvis, {0.10f, 0.90f, 0});
  const int shin_l = add_bone("shin_l", thigh_l, {0.10f, 0.50f, 0});
  const int foot_l = add_bone("foot_l", shin_l, {0.10f, 0.09f, 0});
  const int thigh_r = add_bone("thigh_r", pelvis, {-0.10f, 0.90f, 0});
  const int shin_r = add_bone("shin_r", thigh_r, {-0.10f, 0.50f, 0});
  const int foot_r = add_bone("foot_r", shin_r, {-0.10f, 0.09f, 0});

  // Torso.
  {
    TubeSpec t;
    t.path = line_path({0, 0.84f, 0}, {0, 1.52f, 0}, 9);
    t.radius = radius_profile({0.145f, 0.155f, 0.145f, 0.13f, 0.145f}, 9);
    t.flatten = 0.62f;
    t.chain = {pelvis, spine, chest};
    t.chain_t = {0.0f, 0.4f, 0.8f};
    t.cap_start = true;
    t.cap_end = false;
    add_tube(b, t);
  }
  // Head on the neck.
  {
    TubeSpec t;
    t.path = line_path({0, 1.52f, 0}, {0, 1.82f, 0}, 6);
    t.radius = radius_profile({0.045f, 0.055f, 0.093f, 0.095f, 0.07f}, 6);
    t.chain = {neck, head};
    t.chain_t = {0.0f, 0.35f};
    t.attach = true;
    add_tube(b, t);
  }
  // Arms (tip past the hand joint so the hand bone owns real surface).
  for (int side = 0; side < 2; ++side) {
    const float sx = side == 0 ? 1.0f : -1.0f;
    TubeSpec t;
    t.path = line_path({sx * 0.15f, 1.44f, 0}, {sx * 0.76f, 1.43f, 0}, 8);
    t.radius = radius_profile({0.052f, 0.045f, 0.04f, 0.045f, 0.028f}, 8);
    t.chain = side == 0 ? std::vector<int>{uarm_l, farm_l, hand_l}
                        : std::vector<int>{uarm_r, farm_r, hand_r};
    t.chain_t = {0.05f, 0.45f, 0.82f};
    t.attach = true;
    add_tube(b, t);
  }
  // Legs with a short forward foot.
  for (int side = 0; side < 2; ++side) {
    const float sx = side == 0 ? 1.0f : -1.0f;
    TubeSpec t;
    t.path = line_path({sx * 0.10f, 0.88f, 0}, {sx * 0.10f, 0.10f, 0}, 9);
    t.path.push_back({sx * 0.10f, 0.045f, 0.06f});
    t.path.push_back({sx * 0.10f, 0.035f, 0.13f});
    t.radius = radius_profile({0.075f, 0.065f, 0.05f, 0.045f, 0.04f}, 9);
    t.radius.push_back(0.035f);
    t.radius.push_back(0.022f);
    t.chain = side == 0 ? std::vector<int>{thigh_l, shin_l, foot_l}
                        : std::vector<int>{thigh_r, shin_r, foot_r};
    t.chain_t = {0.02f, 0.45f, 0.88f};
    t.attach = true;
    add_tube(b, t);
  }
  return b.m;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string out_obj = argc > 1 ? argv[1] : "assets/template_body.obj";
  const std::string out_rig = argc > 2 ? argv[2] : "assets/template_body.rig.json";

  TemplateMesh m = build_humanoid();
  m.validate();
  mesh::save_obj_with_rig(m, out_obj, out_rig);

  const auto coloring = mesh::build_coloring(m);
  const auto geod = mesh::compute_geodesics(m);
  fmt::print("template: {} vertices, {} faces, {} bones\n", m.vertex_count(),
             m.faces.size(), m.bones.size());
  fmt::print("coloring: min_gap={}, max_adjacent_delta={}\n", coloring.min_gap,
             coloring.max_adjacent_delta(m));
  fmt::print("geodesics: sigma_geo={:.4f}, mean_edge={:.4f}\n", geod.sigma_geo,
             m.mean_edge_length());
  fmt::print("content hash: {:016x}\n", m.content_hash());
  return 0;
}
