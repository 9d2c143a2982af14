#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "corrmap/data/sample.hpp"
#include "corrmap/loss/losses.hpp"
#include "corrmap/mesh/geodesics.hpp"
#include "corrmap/net/model.hpp"

namespace corrmap::train {

struct TrainConfig {
  std::string phase = "pretrain";       // pretrain | finetune
  std::string finetune_mode = "dense";  // sparse | dense
  float lr = 3e-4f;
  int steps = 2000;
  int batch_size = 1;
  uint64_t seed = 1;
  float warmup_fraction = 0.05f;  // linear LR warmup over this share of steps
  int checkpoint_every = 500;
  float densify_trust_radius = 8.0f;  // px, annotation wins over init within it
  // Per-recipe augmentation probabilities (pretrain batches).
  float p_upper_crop = 0.2f, p_multi_person = 0.2f, p_rotate = 0.2f,
        p_hue_shift = 0.2f;
  loss::LossWeights loss;
  net::ModelConfig model;
  std::string out_dir;                // checkpoints + training log
  std::string pretrain_checkpoint;    // required for phase == finetune

  void validate() const;
  nlohmann::json to_json() const;
  static TrainConfig from_json(const nlohmann::json& j);
};

// Supervision view of one sample: which pixels contribute to the
// correspondence losses and with which target colors. The silhouette loss
// always sees the full mask.
struct TrainTarget {
  ImageU8 gt;      // target correspondence colors
  Mask loss_mask;  // pixels entering cls/geo/con
};

// mode "sparse": targets only at annotated pixels (error when none);
// mode "dense": densified pseudo ground truth over the full silhouette.
TrainTarget build_finetune_batch(const data::Sample& s, const std::string& mode,
                                 const mesh::VertexColoring& coloring,
                                 float trust_radius);

struct World {
  const mesh::TemplateMesh* tmpl = nullptr;
  const mesh::VertexColoring* coloring = nullptr;
  const mesh::GeodesicTable* geodesics = nullptr;
};

class Trainer {
 public:
  // Fresh model for pretrain; for finetune the pretrain checkpoint is loaded
  // (its model config wins over cfg.model).
  Trainer(const TrainConfig& cfg, const World& world,
          std::vector<data::Sample> train_set);

  // One optimizer step over the next batch. Deterministic for a fixed
  // (config seed, initial state). Throws NumericError on a non-finite loss.
  loss::LossBreakdown train_step();

  // Full loop: steps, JSONL logging, periodic + final checkpoints.
  void run();

  net::Model& model() { return model_; }
  const net::Model& model() const { return model_; }
  int step() const { return step_; }
  const TrainConfig& config() const { return cfg_; }

  // Exposed for tests: the supervision view the next step would build.
  TrainTarget target_for(const data::Sample& s) const;

 private:
  data::Sample assemble_sample(int step, int slot, const data::Sample& base);
  void adam_update();
  void append_log(const loss::LossBreakdown& b, double wall_ms);

  TrainConfig cfg_;
  World world_;
  std::vector<data::Sample> train_set_;
  net::Model model_;
  int step_ = 0;

  struct AdamSlot {
    std::vector<float> m, v;
  };
  std::map<std::string, AdamSlot> adam_;
  std::vector<int> order_;  // epoch permutation
  size_t cursor_ = 0;
  int epoch_ = 0;
};

}  // namespace corrmap::train
