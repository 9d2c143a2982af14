#include "corrmap/synth/generator.hpp"

#include <algorithm>
#include <cmath>

#include "corrmap/core/rng.hpp"
#include "corrmap/synth/coarse_init.hpp"
#include "corrmap/synth/rasterizer.hpp"
#include "corrmap/synth/shading.hpp"
#include "corrmap/synth/skinning.hpp"

namespace corrmap::synth {

using data::Sample;

PoseParams sample_pose(const SceneContext& scene, const DataGenConfig& cfg,
                       int sequence, int frame) {
  const auto& tmpl = *scene.tmpl;
  Rng seq_rng = Rng(cfg.seed).fork(0x5e9 + sequence);
  const size_t nb = tmpl.bones.size();

  PoseParams pose;
  pose.bone_axis.resize(nb);
  pose.bone_angle.resize(nb);
  const float t = frame * 0.45f;
  for (size_t b = 0; b < nb; ++b) {
    // Per-sequence swing: fixed random axis, sinusoidal angle over frames.
    Vec3 axis{(float)seq_rng.uniform(-1, 1), (float)seq_rng.uniform(-1, 1),
              (float)seq_rng.uniform(-1, 1)};
    if (norm(axis) < 1e-3f) axis = {0, 0, 1};
    const std::string& name = tmpl.bones[b].name;
    float amp = 0.12f;
    if (name.find("arm") != std::string::npos) amp = 0.55f;
    if (name.find("thigh") != std::string::npos ||
        name.find("shin") != std::string::npos)
      amp = 0.4f;
    if (name.find("head") != std::string::npos ||
        name.find("neck") != std::string::npos)
      amp = 0.25f;
    if (name.find("pelvis") != std::string::npos) amp = 0.3f;  // whole-body yaw
    const float a = (float)seq_rng.uniform(0.3, 1.0) * amp;
    const float w = (float)seq_rng.uniform(0.6, 1.4);
    const float phase = (float)seq_rng.uniform(0, 6.28318);
    pose.bone_axis[b] = normalized(axis);
    pose.bone_angle[b] = a * std::sin(w * t + phase);
  }

  // Body bounding sphere in canonical pose frames the camera.
  Vec3 lo = tmpl.vertices[0], hi = tmpl.vertices[0];
  for (const auto& v : tmpl.vertices) {
    lo = {std::min(lo.x, v.x), std::min(lo.y, v.y), std::min(lo.z, v.z)};
    hi = {std::max(hi.x, v.x), std::max(hi.y, v.y), std::max(hi.z, v.z)};
  }
  const Vec3 center = (lo + hi) * 0.5f;
  const float extent = std::max({hi.x - lo.x, hi.y - lo.y, hi.z - lo.z});

  const float theta0 = (float)seq_rng.uniform(0, 6.28318);
  const float orbit = theta0 + 0.12f * frame;
  const float dist = extent * (float)seq_rng.uniform(1.35, 1.7);
  pose.camera.eye = center + Vec3{dist * std::sin(orbit),
                                  extent * (float)seq_rng.uniform(-0.05, 0.25),
                                  dist * std::cos(orbit)};
  pose.camera.look_at = center;
  pose.camera.fov_deg = cfg.fov_deg;
  pose.camera.width = cfg.image_size;
  pose.camera.height = cfg.image_size;
  return pose;
}

Sample make_sample(const SceneContext& scene, const DataGenConfig& cfg,
                   int sequence, int frame) {
  const auto& tmpl = *scene.tmpl;
  const PoseParams pose = sample_pose(scene, cfg, sequence, frame);
  const std::vector<Vec3> positions = articulate(tmpl, pose);

  const RasterResult raster =
      rasterize(positions, tmpl.faces, *scene.coloring, pose.camera);

  Sample s;
  s.corr_gt = raster.corr;
  s.mask = raster.mask;
  s.instance = ImageU8(cfg.image_size, cfg.image_size, 1, 0);
  for (size_t i = 0; i < s.mask.data.size(); ++i)
    s.instance.data[i] = s.mask.data[i] ? 1 : 0;

  const uint64_t appearance_seed = Rng(cfg.seed).fork(0xa99 + sequence).next_u64();
  s.rgb = shade_rgb(tmpl, positions, tmpl.faces, raster, appearance_seed);

  const uint64_t init_seed =
      Rng(cfg.seed).fork(0x1417 + sequence * 4096 + frame).next_u64();
  s.init = simulate_coarse_init(s.corr_gt, s.mask, cfg.erosion_px,
                                cfg.noise_gap, init_seed,
                                tmpl.mean_edge_length(), *scene.coloring,
                                *scene.geodesics);

  // Sparse pixel-vertex annotations, sampled uniformly over the silhouette.
  std::vector<std::pair<int, int>> fg;
  for (int y = 0; y < s.mask.h; ++y)
    for (int x = 0; x < s.mask.w; ++x)
      if (s.mask.at(y, x)) fg.push_back({y, x});
  Rng arng(Rng(cfg.seed).fork(0xa220 + sequence * 4096 + frame).next_u64());
  const int n_annots = std::min<int>(cfg.annots_per_sample, (int)fg.size());
  // Partial Fisher-Yates gives distinct pixels.
  for (int i = 0; i < n_annots; ++i) {
    const size_t j = i + arng.uniform_int((uint64_t)(fg.size() - i));
    std::swap(fg[i], fg[j]);
    const auto [y, x] = fg[i];
    s.annots.push_back({x, y, raster.vertex[(size_t)y * s.mask.w + x]});
  }

  s.meta.sequence = sequence;
  s.meta.frame = frame;
  s.meta.seed = cfg.seed;
  s.meta.pose = pose;
  return s;
}

}  // namespace corrmap::synth
