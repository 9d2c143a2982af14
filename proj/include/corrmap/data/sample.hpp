#pragma once

#include <string>
#include <vector>

#include "corrmap/core/image.hpp"
#include "corrmap/synth/camera.hpp"

namespace corrmap::data {

struct SparseAnnot {
  int x = 0, y = 0;   // pixel, x = column
  int vertex = 0;
};

struct SampleMeta {
  int sequence = 0;
  int frame = 0;
  uint64_t seed = 0;
  int instance_count = 1;
  synth::PoseParams pose;  // includes the camera
};

// One training/eval unit.
struct Sample {
  ImageU8 rgb;       // H,W,3
  Mask mask;         // H,W, 0/1
  ImageU8 corr_gt;   // H,W,3; (0,0,0) outside the mask
  ImageU8 init;      // H,W,3; simulated coarse correspondence
  ImageU8 instance;  // H,W,1; 0 background, else instance id (1-based)
  std::vector<SparseAnnot> annots;
  SampleMeta meta;

  int height() const { return rgb.h; }
  int width() const { return rgb.w; }
};

// Per-sample directory layout: rgb.png, mask.png (0/255), corr.png, init.png,
// instance.png (multi-person only), meta.json.
void save_sample(const std::string& dir, const Sample& s);
Sample load_sample(const std::string& dir);

}  // namespace corrmap::data
