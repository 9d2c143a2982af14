#pragma once

#include <string>

#include "corrmap/data/sample.hpp"
#include "corrmap/mesh/coloring.hpp"
#include "corrmap/mesh/geodesics.hpp"

namespace corrmap::synth {

struct DataGenConfig {
  int image_size = 128;
  int sequences = 10;
  int frames_per_seq = 3;
  int erosion_px = 2;
  int noise_gap = 4;           // geodesic noise radius in mean-edge units
  int annots_per_sample = 100;
  uint64_t seed = 1;
  float fov_deg = 45.0f;
  float train_fraction = 0.9f;
};

// World shared by all samples of a dataset.
struct SceneContext {
  const mesh::TemplateMesh* tmpl;
  const mesh::VertexColoring* coloring;
  const mesh::GeodesicTable* geodesics;
};

// Procedural motion: smooth per-bone sinusoidal swings with per-sequence
// seeded axes/amplitudes/phases; the camera orbits the body.
PoseParams sample_pose(const SceneContext& scene, const DataGenConfig& cfg,
                       int sequence, int frame);

// Deterministic sample assembly for (sequence, frame) under cfg.seed.
data::Sample make_sample(const SceneContext& scene, const DataGenConfig& cfg,
                         int sequence, int frame);

}  // namespace corrmap::synth
