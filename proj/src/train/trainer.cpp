#include "corrmap/train/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <fmt/format.h>

#include "corrmap/core/error.hpp"
#include "corrmap/core/rng.hpp"
#include "corrmap/net/checkpoint.hpp"
#include "corrmap/synth/augment.hpp"
#include "corrmap/synth/densify.hpp"
#include "corrmap/tensor/ops.hpp"

namespace corrmap::train {

namespace fs = std::filesystem;
using data::Sample;

void TrainConfig::validate() const {
  if (phase != "pretrain" && phase != "finetune")
    throw InputError("train config: phase must be pretrain|finetune");
  if (finetune_mode != "sparse" && finetune_mode != "dense")
    throw InputError("train config: finetune_mode must be sparse|dense");
  if (phase == "finetune" && pretrain_checkpoint.empty())
    throw InputError("train config: finetune requires a pretrain checkpoint");
  if (!(lr > 0)) throw InputError("train config: lr must be positive");
  if (steps < 1) throw InputError("train config: steps must be positive");
  if (batch_size < 1) throw InputError("train config: batch_size must be positive");
  if (warmup_fraction < 0 || warmup_fraction > 1)
    throw InputError("train config: warmup_fraction in [0,1]");
  loss.validate();
  model.validate();
}

nlohmann::json TrainConfig::to_json() const {
  return {{"phase", phase},
          {"finetune_mode", finetune_mode},
          {"lr", lr},
          {"steps", steps},
          {"batch_size", batch_size},
          {"seed", seed},
          {"warmup_fraction", warmup_fraction},
          {"checkpoint_every", checkpoint_every},
          {"densify_trust_radius", densify_trust_radius},
          {"p_upper_crop", p_upper_crop},
          {"p_multi_person", p_multi_person},
          {"p_rotate", p_rotate},
          {"p_hue_shift", p_hue_shift},
          {"loss",
           {{"lambda_cls", loss.lambda_cls},
            {"lambda_sil", loss.lambda_sil},
            {"lambda_geo", loss.lambda_geo},
            {"lambda_con", loss.lambda_con},
            {"sigma_geo", loss.sigma_geo},
            {"sigma_col", loss.sigma_col},
            {"con_samples", loss.con_samples},
            {"part_weight_boost", loss.part_weight_boost},
            {"part_weight_base", loss.part_weight_base}}},
          {"model", model.to_json()},
          {"out_dir", out_dir},
          {"pretrain_checkpoint", pretrain_checkpoint}};
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.phase = j.value("phase", c.phase);
  c.finetune_mode = j.value("finetune_mode", c.finetune_mode);
  c.lr = j.value("lr", c.lr);
  c.steps = j.value("steps", c.steps);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.seed = j.value("seed", c.seed);
  c.warmup_fraction = j.value("warmup_fraction", c.warmup_fraction);
  c.checkpoint_every = j.value("checkpoint_every", c.checkpoint_every);
  c.densify_trust_radius = j.value("densify_trust_radius", c.densify_trust_radius);
  c.p_upper_crop = j.value("p_upper_crop", c.p_upper_crop);
  c.p_multi_person = j.value("p_multi_person", c.p_multi_person);
  c.p_rotate = j.value("p_rotate", c.p_rotate);
  c.p_hue_shift = j.value("p_hue_shift", c.p_hue_shift);
  if (j.contains("loss")) {
    const auto& l = j["loss"];
    c.loss.lambda_cls = l.value("lambda_cls", c.loss.lambda_cls);
    c.loss.lambda_sil = l.value("lambda_sil", c.loss.lambda_sil);
    c.loss.lambda_geo = l.value("lambda_geo", c.loss.lambda_geo);
    c.loss.lambda_con = l.value("lambda_con", c.loss.lambda_con);
    c.loss.sigma_geo = l.value("sigma_geo", c.loss.sigma_geo);
    c.loss.sigma_col = l.value("sigma_col", c.loss.sigma_col);
    c.loss.con_samples = l.value("con_samples", c.loss.con_samples);
    c.loss.part_weight_boost = l.value("part_weight_boost", c.loss.part_weight_boost);
    c.loss.part_weight_base = l.value("part_weight_base", c.loss.part_weight_base);
  }
  if (j.contains("model")) c.model = net::ModelConfig::from_json(j["model"]);
  c.out_dir = j.value("out_dir", c.out_dir);
  c.pretrain_checkpoint = j.value("pretrain_checkpoint", c.pretrain_checkpoint);
  return c;
}

TrainTarget build_finetune_batch(const Sample& s, const std::string& mode,
                                 const mesh::VertexColoring& coloring,
                                 float trust_radius) {
  TrainTarget t;
  if (mode == "sparse") {
    if (s.annots.empty())
      throw InputError("build_finetune_batch: sparse mode with no annotations");
    t.gt = ImageU8(s.mask.h, s.mask.w, 3, 0);
    t.loss_mask = Mask(s.mask.h, s.mask.w, 1, 0);
    for (const auto& a : s.annots) {
      put_rgb(t.gt, a.y, a.x, mesh::vertex_to_color(a.vertex, coloring));
      t.loss_mask.at(a.y, a.x) = 1;
    }
    return t;
  }
  if (mode == "dense") {
    t.gt = synth::densify_sparse_annotations(s.annots, s.init, s.mask, coloring,
                                             trust_radius);
    t.loss_mask = s.mask;
    return t;
  }
  throw InputError(fmt::format("build_finetune_batch: unknown mode '{}'", mode));
}

Trainer::Trainer(const TrainConfig& cfg, const World& world,
                 std::vector<Sample> train_set)
    : cfg_(cfg), world_(world), train_set_(std::move(train_set)) {
  cfg_.validate();
  if (train_set_.empty()) throw InputError("trainer: empty training set");
  if (!world_.tmpl || !world_.coloring || !world_.geodesics)
    throw InputError("trainer: incomplete world");

  if (cfg_.phase == "finetune") {
    model_ = net::load_checkpoint(cfg_.pretrain_checkpoint);
    cfg_.model = model_.config();
  } else {
    model_ = net::Model(cfg_.model, cfg_.seed);
  }
  if (cfg_.loss.sigma_geo <= 0) cfg_.loss.sigma_geo = world_.geodesics->sigma_geo;

  for (const auto& [name, t] : model_.params()) {
    adam_[name].m.assign((size_t)t.numel(), 0.0f);
    adam_[name].v.assign((size_t)t.numel(), 0.0f);
  }
  order_.resize(train_set_.size());
  for (size_t i = 0; i < order_.size(); ++i) order_[i] = (int)i;
}

Sample Trainer::assemble_sample(int step, int slot, const Sample& base) {
  if (cfg_.phase != "pretrain") return base;  // augmentations are a pretrain aid
  Rng rng(Rng(cfg_.seed).fork(0xa06 + (uint64_t)step * 64 + slot).next_u64());
  auto coin = [&](float p) { return rng.uniform() < p; };
  try {
    if (coin(cfg_.p_multi_person) && train_set_.size() > 1) {
      synth::AugmentRecipe r;
      r.kind = synth::AugmentRecipe::Kind::multi_person;
      r.k = 2;
      const data::Sample& other =
          train_set_[rng.uniform_int((uint64_t)train_set_.size())];
      return synth::augment(base, r, rng.next_u64(), {&other});
    }
    if (coin(cfg_.p_upper_crop)) {
      synth::AugmentRecipe r;
      r.kind = synth::AugmentRecipe::Kind::upper_crop;
      return synth::augment(base, r, rng.next_u64());
    }
    if (coin(cfg_.p_rotate)) {
      synth::AugmentRecipe r;
      r.kind = synth::AugmentRecipe::Kind::rotate;
      r.angle = (float)rng.uniform(-0.35, 0.35);
      return synth::augment(base, r, rng.next_u64());
    }
    if (coin(cfg_.p_hue_shift)) {
      synth::AugmentRecipe r;
      r.kind = synth::AugmentRecipe::Kind::hue_shift;
      r.hue = (float)rng.uniform(-30.0, 30.0);
      return synth::augment(base, r, rng.next_u64());
    }
  } catch (const InputError&) {
    return base;  // degenerate crop/rotation: fall back to the raw sample
  }
  return base;
}

TrainTarget Trainer::target_for(const Sample& s) const {
  if (cfg_.phase == "finetune")
    return build_finetune_batch(s, cfg_.finetune_mode, *world_.coloring,
                                cfg_.densify_trust_radius);
  TrainTarget t;
  t.gt = s.corr_gt;
  t.loss_mask = s.mask;
  return t;
}

loss::LossBreakdown Trainer::train_step() {
  namespace o = corrmap::ops;
  const auto& weights = cfg_.loss;

  std::vector<Tensor> totals;
  loss::LossBreakdown mean{};
  for (int b = 0; b < cfg_.batch_size; ++b) {
    if (cursor_ >= order_.size()) {
      cursor_ = 0;
      ++epoch_;
      Rng shuffle(Rng(cfg_.seed).fork(0xe90c + epoch_).next_u64());
      for (size_t i = order_.size(); i > 1; --i)
        std::swap(order_[i - 1], order_[shuffle.uniform_int((uint64_t)i)]);
    }
    const Sample& base = train_set_[order_[cursor_++]];
    const Sample s = assemble_sample(step_, b, base);
    const TrainTarget target = target_for(s);

    net::Logits logits = model_.forward(s.rgb, s.init, s.mask);

    Tensor cls, sil, geo, con;
    const ImageF pw = loss::part_weight_map(
        target.gt, target.loss_mask, *world_.coloring, *world_.tmpl,
        weights.part_weight_base, weights.part_weight_boost);
    if (weights.lambda_cls > 0)
      cls = loss::loss_cls(logits.corr[0], target.gt, target.loss_mask, pw);
    if (weights.lambda_sil > 0) sil = loss::loss_sil(logits.fg, s.mask);
    if (weights.lambda_geo > 0 || weights.lambda_con > 0) {
      Tensor expected = loss::expected_color(logits.corr[0]);
      if (weights.lambda_geo > 0)
        geo = loss::loss_geo(expected, target.gt, target.loss_mask,
                             *world_.coloring, *world_.geodesics,
                             weights.sigma_geo);
      if (weights.lambda_con > 0)
        con = loss::loss_con(
            expected, target.loss_mask, *world_.coloring, *world_.geodesics,
            weights.sigma_geo, weights.sigma_col, weights.con_samples,
            Rng(cfg_.seed).fork(0xc02 + (uint64_t)step_ * 64 + b).next_u64());
    }
    loss::LossBreakdown bd;
    totals.push_back(loss::total_loss(cls, sil, geo, con, weights, &bd));
    mean.cls += bd.cls / cfg_.batch_size;
    mean.sil += bd.sil / cfg_.batch_size;
    mean.geo += bd.geo / cfg_.batch_size;
    mean.con += bd.con / cfg_.batch_size;
    mean.total += bd.total / cfg_.batch_size;
  }

  Tensor batch_loss = ops::affine_combine(
      totals, std::vector<float>(totals.size(), 1.0f / cfg_.batch_size));
  batch_loss.backward();
  ++step_;
  adam_update();
  for (auto& [name, t] : model_.params()) t.zero_grad();
  return mean;
}

void Trainer::adam_update() {
  constexpr float b1 = 0.9f, b2 = 0.999f, eps = 1e-8f;
  const int warmup = std::max(1, (int)std::lround(cfg_.warmup_fraction * cfg_.steps));
  const float lr = cfg_.lr * std::min(1.0f, (float)step_ / (float)warmup);
  const double bc1 = 1.0 - std::pow((double)b1, step_);
  const double bc2 = 1.0 - std::pow((double)b2, step_);

  for (auto& [name, t] : model_.params()) {
    if (!t.has_grad()) continue;
    AdamSlot& slot = adam_[name];
    float* th = t.data();
    const float* g = t.grad();
    for (int64_t i = 0; i < t.numel(); ++i) {
      slot.m[i] = b1 * slot.m[i] + (1 - b1) * g[i];
      slot.v[i] = b2 * slot.v[i] + (1 - b2) * g[i] * g[i];
      const float mh = (float)(slot.m[i] / bc1);
      const float vh = (float)(slot.v[i] / bc2);
      th[i] -= lr * mh / (std::sqrt(vh) + eps);
    }
  }
}

void Trainer::append_log(const loss::LossBreakdown& b, double wall_ms) {
  if (cfg_.out_dir.empty()) return;
  fs::create_directories(cfg_.out_dir);
  std::ofstream log(fs::path(cfg_.out_dir) / "train_log.jsonl", std::ios::app);
  const int warmup = std::max(1, (int)std::lround(cfg_.warmup_fraction * cfg_.steps));
  const float lr = cfg_.lr * std::min(1.0f, (float)step_ / (float)warmup);
  log << fmt::format(
      R"({{"step":{},"cls":{:.6g},"sil":{:.6g},"geo":{:.6g},"con":{:.6g},"total":{:.6g},"lr":{:.6g},"wall_ms":{:.1f}}})",
      step_, b.cls, b.sil, b.geo, b.con, b.total, lr, wall_ms)
      << "\n";
}

void Trainer::run() {
  using clock = std::chrono::steady_clock;
  while (step_ < cfg_.steps) {
    const auto t0 = clock::now();
    const loss::LossBreakdown b = train_step();
    const double ms =
        std::chrono::duration<double, std::milli>(clock::now() - t0).count();
    append_log(b, ms);
    if (!cfg_.out_dir.empty() && cfg_.checkpoint_every > 0 &&
        step_ % cfg_.checkpoint_every == 0 && step_ < cfg_.steps)
      net::save_checkpoint(
          (fs::path(cfg_.out_dir) / fmt::format("ckpt_{:06d}.ckpt", step_)).string(),
          model_, {{"step", step_}});
  }
  if (!cfg_.out_dir.empty())
    net::save_checkpoint((fs::path(cfg_.out_dir) / "final.ckpt").string(),
                         model_, {{"step", step_}, {"train", cfg_.to_json()}});
}

}  // namespace corrmap::train
