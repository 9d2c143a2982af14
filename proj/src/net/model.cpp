#include "corrmap/net/model.hpp"

#include <cmath>

#include <fmt/format.h>

#include "corrmap/core/error.hpp"
#include "corrmap/core/rng.hpp"
#include "corrmap/tensor/ops.hpp"

namespace corrmap::net {

namespace o = corrmap::ops;

int ModelConfig::upsample_stages() const {
  int u = 0, p = patch_size;
  while (p > 1) {
    p >>= 1;
    ++u;
  }
  return u;
}

void ModelConfig::validate() const {
  auto fail = [](const std::string& m) { throw InputError("model config: " + m); };
  if (image_size < 8) fail("image_size too small");
  if (patch_size < 2 || (patch_size & (patch_size - 1)) != 0)
    fail("patch_size must be a power of two >= 2");
  if (image_size % patch_size != 0) fail("image_size not divisible by patch_size");
  if (heads != 1 && heads != 3) fail("heads must be 1 or 3");
  if (token_dim < 8 || token_dim % attention_heads != 0)
    fail("token_dim must be a multiple of attention_heads");
  if (encoder_depth < 1) fail("encoder_depth must be positive");
  if (mlp_ratio < 1) fail("mlp_ratio must be positive");
  if (stage_taps.empty()) fail("stage_taps must not be empty");
  for (size_t i = 0; i < stage_taps.size(); ++i) {
    if (stage_taps[i] < 1 || stage_taps[i] > encoder_depth)
      fail("stage tap outside encoder depth");
    if (i && stage_taps[i] <= stage_taps[i - 1]) fail("stage taps not increasing");
  }
  if ((int)decoder_channels.size() != upsample_stages() + 1)
    fail(fmt::format("decoder_channels needs {} entries for patch {}",
                     upsample_stages() + 1, patch_size));
  for (int c : decoder_channels)
    if (c < 1) fail("decoder channel widths must be positive");
}

nlohmann::json ModelConfig::to_json() const {
  return {{"image_size", image_size},
          {"patch_size", patch_size},
          {"token_dim", token_dim},
          {"encoder_depth", encoder_depth},
          {"attention_heads", attention_heads},
          {"mlp_ratio", mlp_ratio},
          {"stage_taps", stage_taps},
          {"decoder_channels", decoder_channels},
          {"heads", heads},
          {"use_correspondence_branch", use_correspondence_branch}};
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.image_size = j.value("image_size", c.image_size);
  c.patch_size = j.value("patch_size", c.patch_size);
  c.token_dim = j.value("token_dim", c.token_dim);
  c.encoder_depth = j.value("encoder_depth", c.encoder_depth);
  c.attention_heads = j.value("attention_heads", c.attention_heads);
  c.mlp_ratio = j.value("mlp_ratio", c.mlp_ratio);
  c.stage_taps = j.value("stage_taps", c.stage_taps);
  c.decoder_channels = j.value("decoder_channels", c.decoder_channels);
  c.heads = j.value("heads", c.heads);
  c.use_correspondence_branch =
      j.value("use_correspondence_branch", c.use_correspondence_branch);
  return c;
}

ModelConfig tiny_config() {
  ModelConfig c;
  c.image_size = 16;
  c.patch_size = 4;
  c.token_dim = 32;
  c.encoder_depth = 2;
  c.attention_heads = 2;
  c.mlp_ratio = 2;
  c.stage_taps = {1, 2};
  c.decoder_channels = {24, 16, 16};
  return c;
}

Model::Model(const ModelConfig& cfg, uint64_t seed) : cfg_(cfg) {
  cfg_.validate();
  Rng rng(seed);
  const int d = cfg_.token_dim;
  const int g0 = cfg_.grid();
  const int pd = 3 * cfg_.patch_size * cfg_.patch_size;
  const float std0 = 0.02f;

  std::vector<std::string> branches = {"app"};
  if (cfg_.use_correspondence_branch) branches.push_back("corr");

  for (const auto& br : branches) {
    params_[br + ".patch.w"] = Tensor::param({pd, d}, rng, std0);
    params_[br + ".patch.b"] = Tensor::param_zeros({d});
    params_[br + ".pos"] = Tensor::param({g0 * g0 + 1, d}, rng, std0);
    params_[br + ".readout"] = Tensor::param({1, d}, rng, std0);
    for (int i = 1; i <= cfg_.encoder_depth; ++i) {
      const std::string pre = fmt::format("{}.blk{:02d}.", br, i);
      params_[pre + "ln1.g"] = Tensor::param_full({d}, 1.0f);
      params_[pre + "ln1.b"] = Tensor::param_zeros({d});
      params_[pre + "qkv.w"] = Tensor::param({d, 3 * d}, rng, std0);
      params_[pre + "qkv.b"] = Tensor::param_zeros({3 * d});
      params_[pre + "proj.w"] = Tensor::param({d, d}, rng, std0);
      params_[pre + "proj.b"] = Tensor::param_zeros({d});
      params_[pre + "ln2.g"] = Tensor::param_full({d}, 1.0f);
      params_[pre + "ln2.b"] = Tensor::param_zeros({d});
      params_[pre + "mlp1.w"] = Tensor::param({d, cfg_.mlp_ratio * d}, rng, std0);
      params_[pre + "mlp1.b"] = Tensor::param_zeros({cfg_.mlp_ratio * d});
      params_[pre + "mlp2.w"] = Tensor::param({cfg_.mlp_ratio * d, d}, rng, std0);
      params_[pre + "mlp2.b"] = Tensor::param_zeros({d});
    }
  }

  const int c0 = cfg_.decoder_channels[0];
  const int fuse_in = cfg_.use_correspondence_branch ? 2 * d : d;
  for (size_t s = 0; s < cfg_.stage_taps.size(); ++s) {
    const std::string pre = fmt::format("fuse{}.", s);
    params_[pre + "w"] = Tensor::param({c0, fuse_in, 1, 1}, rng, std0);
    params_[pre + "b"] = Tensor::param_zeros({c0});
    const std::string rcu = fmt::format("dec.rcu{}.", s);
    params_[rcu + "c1.w"] = Tensor::param({c0, c0, 3, 3}, rng, std0);
    params_[rcu + "c1.b"] = Tensor::param_zeros({c0});
    params_[rcu + "c2.w"] = Tensor::param({c0, c0, 3, 3}, rng, std0);
    params_[rcu + "c2.b"] = Tensor::param_zeros({c0});
  }
  const int stages = cfg_.upsample_stages();
  for (int u = 1; u <= stages; ++u) {
    const int cin = cfg_.decoder_channels[u - 1], cout = cfg_.decoder_channels[u];
    const std::string pre = fmt::format("dec.up{}.", u);
    params_[pre + "w"] = Tensor::param({cout, cin, 3, 3}, rng, std0);
    params_[pre + "b"] = Tensor::param_zeros({cout});
    if (u <= 2) {
      const std::string rcu = fmt::format("dec.rcu_up{}.", u);
      params_[rcu + "c1.w"] = Tensor::param({cout, cout, 3, 3}, rng, std0);
      params_[rcu + "c1.b"] = Tensor::param_zeros({cout});
      params_[rcu + "c2.w"] = Tensor::param({cout, cout, 3, 3}, rng, std0);
      params_[rcu + "c2.b"] = Tensor::param_zeros({cout});
    }
  }
  const int clast = cfg_.decoder_channels.back();
  for (int hd = 0; hd < cfg_.heads; ++hd) {
    params_[fmt::format("head{}.w", hd)] = Tensor::param({clast, 768}, rng, std0);
    params_[fmt::format("head{}.b", hd)] = Tensor::param_zeros({768});
  }
  params_["fg.w"] = Tensor::param({clast, 1}, rng, std0);
  params_["fg.b"] = Tensor::param_zeros({1});
}

int64_t Model::parameter_count() const {
  int64_t n = 0;
  for (const auto& [k, v] : params_) n += v.numel();
  return n;
}

Tensor Model::p(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end())
    throw NumericError("missing model parameter: " + name);
  return it->second;
}

Tensor Model::tokenize_raw(const Tensor& image, const std::string& branch) const {
  if (image.ndim() != 3 || image.dim(0) != 3 || image.dim(1) != image.dim(2))
    throw InputError("tokenize: [3,H,H] input required");
  if (image.dim(1) % cfg_.patch_size != 0)
    throw InputError(fmt::format("tokenize: size {} not divisible by patch {}",
                                 image.dim(1), cfg_.patch_size));
  Tensor patches = o::patchify(image, cfg_.patch_size);
  return o::linear(patches, p(branch + ".patch.w"), p(branch + ".patch.b"));
}

Tensor Model::tokenize(const Tensor& image, const std::string& branch) const {
  Tensor tok = tokenize_raw(image, branch);
  const int g = image.dim(1) / cfg_.patch_size;
  Tensor with_readout = o::concat_rows(p(branch + ".readout"), tok);
  Tensor pos = o::resample_pos_table(p(branch + ".pos"), cfg_.grid(), g);
  return o::add(with_readout, pos);
}

std::vector<Tensor> Model::encode(const Tensor& tokens, const std::string& branch,
                                  int grid) const {
  const int d = cfg_.token_dim;
  const int hN = cfg_.attention_heads;
  const float scale = 1.0f / std::sqrt((float)(d / hN));
  Tensor x = tokens;
  std::vector<Tensor> taps;
  size_t next_tap = 0;
  for (int i = 1; i <= cfg_.encoder_depth; ++i) {
    const std::string pre = fmt::format("{}.blk{:02d}.", branch, i);
    Tensor n1 = o::layernorm(x, p(pre + "ln1.g"), p(pre + "ln1.b"));
    Tensor qkv = o::linear(n1, p(pre + "qkv.w"), p(pre + "qkv.b"));
    Tensor q = o::split_heads(o::slice_cols(qkv, 0, d), hN);
    Tensor k = o::split_heads(o::slice_cols(qkv, d, 2 * d), hN);
    Tensor v = o::split_heads(o::slice_cols(qkv, 2 * d, 3 * d), hN);
    Tensor att = o::softmax_lastdim(o::scale(o::bmm_bt(q, k), scale));
    Tensor ctx = o::merge_heads(o::bmm(att, v));
    x = o::add(x, o::linear(ctx, p(pre + "proj.w"), p(pre + "proj.b")));
    Tensor n2 = o::layernorm(x, p(pre + "ln2.g"), p(pre + "ln2.b"));
    Tensor m = o::linear(o::gelu(o::linear(n2, p(pre + "mlp1.w"), p(pre + "mlp1.b"))),
                         p(pre + "mlp2.w"), p(pre + "mlp2.b"));
    x = o::add(x, m);

    if (next_tap < cfg_.stage_taps.size() && cfg_.stage_taps[next_tap] == i) {
      // Spatial tokens plus the readout broadcast back onto them.
      const int n = grid * grid;
      Tensor spatial = o::slice_rows(x, 1, n + 1);
      Tensor readout = o::reshape(o::slice_rows(x, 0, 1), {d});
      taps.push_back(o::tokens_to_grid(o::add_bias(spatial, readout), grid));
      ++next_tap;
    }
  }
  return taps;
}

namespace {

Tensor rcu(const Model& m, const std::map<std::string, Tensor>& params,
           const std::string& prefix, const Tensor& x) {
  (void)m;
  const Tensor c1w = params.at(prefix + "c1.w"), c1b = params.at(prefix + "c1.b");
  const Tensor c2w = params.at(prefix + "c2.w"), c2b = params.at(prefix + "c2.b");
  Tensor y = o::conv2d(o::relu(x), c1w, c1b);
  y = o::conv2d(o::relu(y), c2w, c2b);
  return o::add(x, y);
}

}  // namespace

Logits Model::fuse_and_decode(const std::vector<Tensor>& app_stages,
                              const std::vector<Tensor>& corr_stages, int grid,
                              int out_h, int out_w) const {
  if (app_stages.size() != cfg_.stage_taps.size())
    throw InputError("fuse_and_decode: stage count mismatch");
  if (cfg_.use_correspondence_branch &&
      corr_stages.size() != app_stages.size())
    throw InputError("fuse_and_decode: branch stage counts differ");
  if (!app_stages.empty() && app_stages[0].dim(1) != grid)
    throw InputError("fuse_and_decode: stage grid size mismatch");

  Tensor x;
  for (size_t s = 0; s < app_stages.size(); ++s) {
    Tensor fused = cfg_.use_correspondence_branch
                       ? o::concat_ch(app_stages[s], corr_stages[s])
                       : app_stages[s];
    fused = o::conv2d(fused, p(fmt::format("fuse{}.w", s)),
                      p(fmt::format("fuse{}.b", s)));
    Tensor r = rcu(*this, params_, fmt::format("dec.rcu{}.", s), fused);
    x = x.defined() ? o::add(x, r) : r;
  }

  const int stages = cfg_.upsample_stages();
  for (int u = 1; u <= stages; ++u) {
    x = o::upsample2x_bilinear(x);
    x = o::relu(o::conv2d(x, p(fmt::format("dec.up{}.w", u)),
                          p(fmt::format("dec.up{}.b", u))));
    if (u <= 2) x = rcu(*this, params_, fmt::format("dec.rcu_up{}.", u), x);
  }

  const int clast = cfg_.decoder_channels.back();
  const int hw = out_h * out_w;
  if (x.dim(1) != out_h || x.dim(2) != out_w)
    throw NumericError("decoder produced unexpected spatial size");
  Tensor feat = o::transpose2d(o::reshape(x, {clast, hw}));  // [HW, C]

  Logits out;
  out.h = out_h;
  out.w = out_w;
  for (int hd = 0; hd < cfg_.heads; ++hd)
    out.corr.push_back(o::linear(feat, p(fmt::format("head{}.w", hd)),
                                 p(fmt::format("head{}.b", hd))));
  out.fg = o::reshape(o::linear(feat, p("fg.w"), p("fg.b")), {hw});
  return out;
}

Logits Model::forward(const Tensor& rgb, const Tensor& init) const {
  if (rgb.shape() != init.shape())
    throw InputError("forward: rgb and init sizes differ");
  const int g = rgb.dim(1) / cfg_.patch_size;
  std::vector<Tensor> app = encode(tokenize(rgb, "app"), "app", g);
  std::vector<Tensor> corr;
  if (cfg_.use_correspondence_branch)
    corr = encode(tokenize(init, "corr"), "corr", g);
  return fuse_and_decode(app, corr, g, rgb.dim(1), rgb.dim(2));
}

Logits Model::forward(const ImageU8& rgb, const ImageU8& init,
                      const Mask& mask) const {
  return forward(image_to_tensor(rgb, mask), image_to_tensor(init, mask));
}

Tensor Model::image_to_tensor(const ImageU8& img, const Mask& mask) {
  if (img.c != 3) throw InputError("image_to_tensor: 3-channel image required");
  if (img.h != mask.h || img.w != mask.w)
    throw InputError("image_to_tensor: mask size mismatch");
  Tensor t = Tensor::zeros({3, img.h, img.w});
  float* d = t.data();
  const int64_t hw = (int64_t)img.h * img.w;
  for (int y = 0; y < img.h; ++y)
    for (int x = 0; x < img.w; ++x) {
      if (!mask.at(y, x)) continue;
      const int64_t i = (int64_t)y * img.w + x;
      for (int c = 0; c < 3; ++c)
        d[c * hw + i] = img.at(y, x, c) / 127.5f - 1.0f;
    }
  return t;
}

ImageU8 logits_to_image(const Logits& logits, const Mask& mask, int head) {
  const Tensor& z = logits.corr.at(head);
  const int hw = logits.h * logits.w;
  if (z.dim(0) != hw || z.dim(1) != 768)
    throw InputError("logits_to_image: unexpected logits shape");
  ImageU8 out(logits.h, logits.w, 3, 0);
  const float* d = z.data();
  for (int i = 0; i < hw; ++i) {
    const int y = i / logits.w, x = i % logits.w;
    if (!mask.at(y, x)) continue;
    for (int c = 0; c < 3; ++c) {
      const float* row = d + (int64_t)i * 768 + c * 256;
      int best = 0;
      float bv = row[0];
      for (int l = 1; l < 256; ++l)
        if (row[l] > bv) {
          bv = row[l];
          best = l;
        }
      out.at(y, x, c) = (uint8_t)best;
    }
  }
  return out;
}

}  // namespace corrmap::net
