#pragma once

#include <map>
#include <string>

#include "corrmap/core/image.hpp"
#include "corrmap/net/config.hpp"
#include "corrmap/tensor/tensor.hpp"

namespace corrmap::net {

// Raw per-pixel scores: for each output head a [H*W, 3*256] grid (three
// 256-way channel classifiers per pixel, pixel-major rows) plus one
// foreground logit per pixel.
struct Logits {
  std::vector<Tensor> corr;  // size == config.heads
  Tensor fg;                 // [H*W]
  int h = 0, w = 0;
};

class Model {
 public:
  Model() = default;
  Model(const ModelConfig& cfg, uint64_t seed);

  const ModelConfig& config() const { return cfg_; }
  std::map<std::string, Tensor>& params() { return params_; }
  const std::map<std::string, Tensor>& params() const { return params_; }
  int64_t parameter_count() const;

  // Patch projection only, before readout/positional terms ("app"/"corr").
  Tensor tokenize_raw(const Tensor& image, const std::string& branch) const;
  // Full token sequence: N patch tokens + readout at row 0, positional table
  // added (bilinearly resampled when the image grid differs from build time).
  Tensor tokenize(const Tensor& image, const std::string& branch) const;

  // Per-tap spatial feature grids [D, G, G] for one branch.
  std::vector<Tensor> encode(const Tensor& tokens, const std::string& branch,
                             int grid) const;
  std::vector<Tensor> encode_appearance(const Tensor& tokens, int grid) const {
    return encode(tokens, "app", grid);
  }
  std::vector<Tensor> encode_correspondence(const Tensor& tokens,
                                            int grid) const {
    return encode(tokens, "corr", grid);
  }

  // corr_stages may be empty when use_correspondence_branch is false.
  Logits fuse_and_decode(const std::vector<Tensor>& app_stages,
                         const std::vector<Tensor>& corr_stages, int grid,
                         int out_h, int out_w) const;

  // Inputs are [3,H,W] tensors in [-1,1] with background zeroed; H=W, a
  // power-of-two multiple of patch_size times any integer grid.
  Logits forward(const Tensor& rgb, const Tensor& init) const;
  // Convenience: normalizes and masks raw images.
  Logits forward(const ImageU8& rgb, const ImageU8& init, const Mask& mask) const;

  static Tensor image_to_tensor(const ImageU8& img, const Mask& mask);

 private:
  Tensor p(const std::string& name) const;

  ModelConfig cfg_;
  std::map<std::string, Tensor> params_;
};

// Per pixel and channel: label = argmax over the 256 scores (ties to the
// lowest label); background pixels forced to (0,0,0). Uses head `head`.
ImageU8 logits_to_image(const Logits& logits, const Mask& mask, int head = 0);

}  // namespace corrmap::net
