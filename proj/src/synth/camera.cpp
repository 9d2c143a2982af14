#include "corrmap/synth/camera.hpp"

#include <cmath>

#include <fmt/format.h>

#include "corrmap/core/error.hpp"

namespace corrmap::synth {

CameraFrame::CameraFrame(const Camera& cam) {
  if (!(cam.fov_deg > 0.0f) || cam.fov_deg >= 180.0f)
    throw InputError(fmt::format("degenerate camera: fov {} deg", cam.fov_deg));
  if (cam.width < 1 || cam.height < 1)
    throw InputError("degenerate camera: empty image");
  Vec3 f = cam.look_at - cam.eye;
  if (norm(f) < 1e-9f)
    throw InputError("degenerate camera: eye coincides with look-at");
  forward = normalized(f);
  Vec3 world_up{0, 1, 0};
  Vec3 r = cross(forward, world_up);
  if (norm(r) < 1e-6f) {
    // Looking straight up/down; fall back to z as the up hint.
    r = cross(forward, Vec3{0, 0, 1});
  }
  right = normalized(r);
  up = cross(right, forward);
  eye = cam.eye;
  width = cam.width;
  height = cam.height;
  const float t = std::tan(cam.fov_deg * 0.5f * 3.14159265358979323846f / 180.0f);
  fy = 1.0f / t;
  fx = fy / ((float)width / (float)height);
}

float CameraFrame::project(Vec3 p, float* px, float* py) const {
  const Vec3 d = p - eye;
  const float z = dot(forward, d);
  if (z <= 1e-6f) {
    *px = *py = -1;
    return z;
  }
  const float xn = fx * dot(right, d) / z;
  const float yn = fy * dot(up, d) / z;
  *px = (xn * 0.5f + 0.5f) * width;
  *py = (0.5f - yn * 0.5f) * height;
  return z;
}

}  // namespace corrmap::synth
