#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace corrmap::net {

// Dual-encoder dense-prediction transformer configuration.
//
// Tokens keep one resolution (image_size/patch_size per side) through every
// encoder stage; the decoder fuses tapped stages, refines with residual conv
// units and upsamples log2(patch_size) times back to full resolution.
struct ModelConfig {
  int image_size = 128;
  int patch_size = 16;      // power of two
  int token_dim = 192;
  int encoder_depth = 6;
  int attention_heads = 3;
  int mlp_ratio = 4;
  std::vector<int> stage_taps = {3, 6};  // 1-based encoder block indices
  // Fusion width at the token grid, then width after each upsample:
  // log2(patch_size)+1 entries.
  std::vector<int> decoder_channels = {96, 96, 64, 48, 32};
  int heads = 1;            // output heads: 1 (standard) or 3 (layered)
  bool use_correspondence_branch = true;

  int grid() const { return image_size / patch_size; }
  int tokens() const { return grid() * grid(); }
  int upsample_stages() const;

  void validate() const;  // throws InputError

  nlohmann::json to_json() const;
  static ModelConfig from_json(const nlohmann::json& j);
  bool operator==(const ModelConfig&) const = default;
};

// 16x16 probe configuration used by the gradient checks.
ModelConfig tiny_config();

}  // namespace corrmap::net
