#pragma once

#include <vector>

#include "corrmap/core/vec3.hpp"

namespace corrmap::synth {

struct Camera {
  Vec3 eye{0, 0, 3};
  Vec3 look_at{0, 0, 0};
  float fov_deg = 45.0f;  // vertical field of view
  int width = 128, height = 128;
};

// Per-bone axis-angle rotation plus root translation and the camera.
struct PoseParams {
  std::vector<Vec3> bone_axis;     // rotation axis per bone (unnormalized ok)
  std::vector<float> bone_angle;   // radians
  Vec3 root_translation{0, 0, 0};
  Camera camera;
};

// World -> pixel projection. Throws InputError for a degenerate camera
// (fov outside (0,180) or eye == look_at, or a view axis parallel to up).
struct CameraFrame {
  Vec3 right, up, forward;  // orthonormal, forward points at the scene
  Vec3 eye;
  float fy, fx;             // focal scale in NDC units
  int width, height;

  explicit CameraFrame(const Camera& cam);

  // Returns view-space depth (positive in front); pixel coords via out args.
  // Points behind the eye get depth <= 0 and an unspecified pixel.
  float project(Vec3 p, float* px, float* py) const;
};

}  // namespace corrmap::synth
