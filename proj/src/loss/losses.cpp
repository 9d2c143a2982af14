#include "corrmap/loss/losses.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "corrmap/core/error.hpp"
#include "corrmap/core/rng.hpp"
#include "corrmap/kern/kernels.hpp"
#include "corrmap/tensor/ops.hpp"

namespace corrmap::loss {

using detail::Node;
using detail::make_op;
using kern::kernels;

namespace {

std::vector<int> foreground_pixels(const Mask& mask) {
  std::vector<int> fg;
  for (int i = 0; i < (int)mask.data.size(); ++i)
    if (mask.data[i]) fg.push_back(i);
  return fg;
}

double softplus(double z) {
  return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

// log-sum-exp of a 256-row plus the softmax into `probs` when non-null.
double lse256(const float* row, float* probs) {
  float mx = row[0];
  for (int l = 1; l < 256; ++l) mx = std::max(mx, row[l]);
  float buf[256];
  float* e = probs ? probs : buf;
  for (int l = 0; l < 256; ++l) e[l] = row[l] - mx;
  kernels().exp_vec(e, e, 256);
  const double s = kernels().sum(e, 256);
  if (probs) {
    const float inv = (float)(1.0 / s);
    kernels().scale(probs, inv, 256);
  }
  return mx + std::log(s);
}

}  // namespace

void LossWeights::validate() const {
  if (lambda_cls < 0 || lambda_sil < 0 || lambda_geo < 0 || lambda_con < 0)
    throw InputError("loss weights must be nonnegative");
  if (sigma_col <= 0) throw InputError("sigma_col must be positive");
  if (sigma_geo < 0) throw InputError("sigma_geo must be nonnegative");
  if (con_samples < 1) throw InputError("consistency sample count must be >= 1");
  if (part_weight_base <= 0 || part_weight_boost <= 0)
    throw InputError("part weights must be positive");
}

ImageF part_weight_map(const ImageU8& corr_gt, const Mask& mask,
                       const mesh::VertexColoring& coloring,
                       const mesh::TemplateMesh& tmpl, float base, float boost) {
  ImageF w(mask.h, mask.w, 1, base);
  std::vector<uint8_t> boosted(tmpl.bones.size(), 0);
  for (size_t b = 0; b < tmpl.bones.size(); ++b) {
    const std::string& n = tmpl.bones[b].name;
    boosted[b] = n.find("head") != std::string::npos ||
                 n.find("neck") != std::string::npos ||
                 n.find("hand") != std::string::npos;
  }
  if (tmpl.bones.empty()) return w;
  for (int y = 0; y < mask.h; ++y)
    for (int x = 0; x < mask.w; ++x) {
      if (!mask.at(y, x)) continue;
      const int v = mesh::color_to_vertex(get_rgb(corr_gt, y, x), coloring);
      if (boosted[tmpl.dominant_bone(v)]) w.at(y, x) = boost;
    }
  return w;
}

Tensor loss_cls(const Tensor& logits, const ImageU8& corr_gt, const Mask& mask,
                const ImageF& part_weights) {
  const int hw = mask.h * mask.w;
  if (logits.ndim() != 2 || logits.dim(0) != hw || logits.dim(1) != 768)
    throw InputError("loss_cls: logits must be [H*W, 768]");
  auto fg = std::make_shared<std::vector<int>>(foreground_pixels(mask));
  if (fg->empty()) throw InputError("loss_cls: empty mask");

  auto labels = std::make_shared<std::vector<uint8_t>>();
  auto weights = std::make_shared<std::vector<float>>();
  labels->reserve(fg->size() * 3);
  weights->reserve(fg->size());
  for (int i : *fg) {
    for (int c = 0; c < 3; ++c) labels->push_back(corr_gt.data[(size_t)i * 3 + c]);
    weights->push_back(part_weights.data[i]);
  }

  auto zn = logits.node();
  const double denom = 3.0 * (double)fg->size();
  Tensor y = make_op({1}, {zn}, [zn, fg, labels, weights, denom](Node& nd) {
    const float go = nd.grad[0];
    float* gz = zn->grad_ptr();
    float probs[256];
    for (size_t k = 0; k < fg->size(); ++k) {
      const int i = (*fg)[k];
      const float scale = (float)((*weights)[k] / denom) * go;
      for (int c = 0; c < 3; ++c) {
        const float* row = zn->value.data() + (int64_t)i * 768 + c * 256;
        float* grow = gz + (int64_t)i * 768 + c * 256;
        lse256(row, probs);
        kernels().axpy(grow, scale, probs, 256);
        grow[(*labels)[k * 3 + c]] -= scale;
      }
    }
  });

  double acc = 0;
  for (size_t k = 0; k < fg->size(); ++k) {
    const int i = (*fg)[k];
    double pix = 0;
    for (int c = 0; c < 3; ++c) {
      const float* row = logits.data() + (int64_t)i * 768 + c * 256;
      pix += lse256(row, nullptr) - row[(*labels)[k * 3 + c]];
    }
    acc += (*weights)[k] * pix;
  }
  y.data()[0] = (float)(acc / denom);
  return y;
}

Tensor loss_sil(const Tensor& fg_logit, const Mask& mask) {
  const int hw = mask.h * mask.w;
  if (fg_logit.numel() != hw) throw InputError("loss_sil: shape mismatch");
  auto zn = fg_logit.node();
  auto m = std::make_shared<std::vector<uint8_t>>(mask.data);

  // p = sigmoid(z); softIoU = sum(p*m) / sum(p + m - p*m)
  std::vector<float> p(hw);
  kernels().sigmoid_vec(fg_logit.data(), p.data(), hw);
  double inter = 0, uni = 0;
  for (int i = 0; i < hw; ++i) {
    const double pi = p[i], mi = (*m)[i] ? 1.0 : 0.0;
    inter += pi * mi;
    uni += pi + mi - pi * mi;
  }
  if (uni == 0.0)
    throw InputError("loss_sil: both masks empty");

  auto pv = std::make_shared<std::vector<float>>(std::move(p));
  Tensor y = make_op({1}, {zn}, [zn, m, pv, inter, uni](Node& nd) {
    const float go = nd.grad[0];
    float* gz = zn->grad_ptr();
    const double u2 = uni * uni;
    for (int64_t i = 0; i < nd.parents[0]->numel; ++i) {
      const double pi = (*pv)[i], mi = (*m)[i] ? 1.0 : 0.0;
      // d(1 - I/U)/dp = -(m*U - I*(1-m)) / U^2
      const double dLdp = -(mi * uni - inter * (1.0 - mi)) / u2;
      gz[i] += go * (float)(dLdp * pi * (1.0 - pi));
    }
  });
  y.data()[0] = (float)(1.0 - inter / uni);
  return y;
}

Tensor expected_color(const Tensor& logits) {
  if (logits.ndim() != 2 || logits.dim(1) != 768)
    throw InputError("expected_color: logits must be [N, 768]");
  const int n = logits.dim(0);
  auto zn = logits.node();

  Tensor y = make_op({n, 3}, {zn}, [zn, n](Node& nd) {
    float* gz = zn->grad_ptr();
    float probs[256];
    for (int i = 0; i < n; ++i)
      for (int c = 0; c < 3; ++c) {
        const float g = nd.grad[(int64_t)i * 3 + c];
        if (g == 0.0f) continue;
        const float e = nd.value[(int64_t)i * 3 + c];
        const float* row = zn->value.data() + (int64_t)i * 768 + c * 256;
        float* grow = gz + (int64_t)i * 768 + c * 256;
        lse256(row, probs);
        for (int l = 0; l < 256; ++l) grow[l] += g * probs[l] * ((float)l - e);
      }
  });

  float probs[256];
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < 3; ++c) {
      const float* row = logits.data() + (int64_t)i * 768 + c * 256;
      lse256(row, probs);
      double e = 0;
      for (int l = 0; l < 256; ++l) e += (double)l * probs[l];
      y.data()[(int64_t)i * 3 + c] = (float)e;
    }
  return y;
}

namespace {

std::vector<int> decode_fg(const float* colors3, const std::vector<int>& fg,
                           int stride_idx, const mesh::VertexColoring& col) {
  // colors3 is indexed by fg order when stride_idx==0, by pixel when ==1.
  std::vector<float> buf(fg.size() * 3);
  for (size_t k = 0; k < fg.size(); ++k) {
    const int64_t src = stride_idx ? (int64_t)fg[k] * 3 : (int64_t)k * 3;
    for (int c = 0; c < 3; ++c) buf[k * 3 + c] = colors3[src + c];
  }
  std::vector<int> verts(fg.size());
  mesh::decode_colors(buf.data(), (int)fg.size(), col, verts.data());
  return verts;
}

}  // namespace

Tensor loss_geo(const Tensor& expected, const ImageU8& corr_gt,
                const Mask& mask, const mesh::VertexColoring& coloring,
                const mesh::GeodesicTable& geod, float sigma_geo) {
  const int hw = mask.h * mask.w;
  if (expected.ndim() != 2 || expected.dim(0) != hw || expected.dim(1) != 3)
    throw InputError("loss_geo: expected colors must be [H*W, 3]");
  const std::vector<int> fg = foreground_pixels(mask);
  if (fg.empty()) throw InputError("loss_geo: empty mask");
  const float sg = sigma_geo > 0 ? sigma_geo : geod.sigma_geo;
  if (!(sg > 0)) throw InputError("loss_geo: sigma_geo must be positive");

  const std::vector<int> pred_v = decode_fg(expected.data(), fg, 1, coloring);
  double acc = 0;
  for (size_t k = 0; k < fg.size(); ++k) {
    const int i = fg[k];
    const int gt_v = mesh::color_to_vertex(
        {corr_gt.data[(size_t)i * 3], corr_gt.data[(size_t)i * 3 + 1],
         corr_gt.data[(size_t)i * 3 + 2]},
        coloring);
    acc += geod.at(pred_v[k], gt_v);
  }
  // Nearest-vertex decode is locally constant: no gradient path.
  auto en = expected.node();
  Tensor y = make_op({1}, {en}, [](Node&) {});
  y.data()[0] = (float)(acc / ((double)fg.size() * sg));
  return y;
}

Tensor loss_con(const Tensor& expected, const Mask& mask,
                const mesh::VertexColoring& coloring,
                const mesh::GeodesicTable& geod, float sigma_geo,
                float sigma_col, int n_samples, uint64_t seed) {
  const int hw = mask.h * mask.w;
  if (expected.ndim() != 2 || expected.dim(0) != hw || expected.dim(1) != 3)
    throw InputError("loss_con: expected colors must be [H*W, 3]");
  if (n_samples < 1) throw InputError("loss_con: n_samples must be >= 1");
  if (!(sigma_col > 0)) throw InputError("loss_con: sigma_col must be positive");
  auto fg = std::make_shared<std::vector<int>>(foreground_pixels(mask));
  if (fg->empty()) throw InputError("loss_con: empty mask");
  const float sg = sigma_geo > 0 ? sigma_geo : geod.sigma_geo;

  auto verts = std::make_shared<std::vector<int>>(
      decode_fg(expected.data(), *fg, 1, coloring));

  Rng rng(seed);
  auto refs = std::make_shared<std::vector<int>>();  // indices into fg
  for (int s = 0; s < n_samples; ++s)
    refs->push_back((int)rng.uniform_int((uint64_t)fg->size()));

  // Geodesic rows for each reference vertex.
  auto ref_rows = std::make_shared<std::vector<float>>();
  ref_rows->resize((size_t)n_samples * geod.n);
  for (int s = 0; s < n_samples; ++s) {
    const int rv = (*verts)[(*refs)[s]];
    std::copy_n(geod.dist.data() + (size_t)rv * geod.n, geod.n,
                ref_rows->data() + (size_t)s * geod.n);
  }

  auto en = expected.node();
  const double norm = (double)n_samples * (double)fg->size();
  const float inv_sc = 1.0f / sigma_col, inv_sg = 1.0f / sg;

  Tensor y = make_op(
      {1}, {en},
      [en, fg, verts, refs, ref_rows, n_samples, inv_sc, inv_sg, norm,
       n = geod.n](Node& nd) {
        const float go = nd.grad[0];
        float* ge = en->grad_ptr();
        const float* e = en->value.data();
        for (int s = 0; s < n_samples; ++s) {
          const int r_pix = (*fg)[(*refs)[s]];
          const float* er = e + (int64_t)r_pix * 3;
          const float* drow = ref_rows->data() + (size_t)s * n;
          for (size_t k = 0; k < fg->size(); ++k) {
            const int p_pix = (*fg)[k];
            const float* ep = e + (int64_t)p_pix * 3;
            float l1 = 0;
            for (int c = 0; c < 3; ++c) l1 += std::abs(er[c] - ep[c]);
            const double z = (double)drow[(*verts)[k]] * inv_sg - l1 * inv_sc;
            const float sz = (float)(1.0 / (1.0 + std::exp(-z)));
            const float w = (float)(go / norm) * sz * inv_sc;
            for (int c = 0; c < 3; ++c) {
              const float sgn =
                  er[c] > ep[c] ? 1.0f : (er[c] < ep[c] ? -1.0f : 0.0f);
              ge[(int64_t)p_pix * 3 + c] += w * sgn;
              ge[(int64_t)r_pix * 3 + c] -= w * sgn;
            }
          }
        }
      });

  double acc = 0;
  const float* e = expected.data();
  for (int s = 0; s < n_samples; ++s) {
    const int r_pix = (*fg)[(*refs)[s]];
    const float* er = e + (int64_t)r_pix * 3;
    const float* drow = ref_rows->data() + (size_t)s * geod.n;
    double sacc = 0;
    for (size_t k = 0; k < fg->size(); ++k) {
      const float* ep = e + (int64_t)(*fg)[k] * 3;
      double l1 = 0;
      for (int c = 0; c < 3; ++c) l1 += std::abs((double)er[c] - ep[c]);
      const double z = (double)drow[(*verts)[k]] * inv_sg - l1 * inv_sc;
      sacc += softplus(z);
    }
    acc += sacc / (double)fg->size();
  }
  y.data()[0] = (float)(acc / n_samples);
  return y;
}

Tensor total_loss(const Tensor& cls, const Tensor& sil, const Tensor& geo,
                  const Tensor& con, const LossWeights& w, LossBreakdown* bd) {
  w.validate();
  struct Term {
    const char* name;
    const Tensor* t;
    float lambda;
    double* slot;
  };
  LossBreakdown local;
  LossBreakdown& b = bd ? *bd : local;
  b = LossBreakdown{};
  Term terms[4] = {{"cls", &cls, w.lambda_cls, &b.cls},
                   {"sil", &sil, w.lambda_sil, &b.sil},
                   {"geo", &geo, w.lambda_geo, &b.geo},
                   {"con", &con, w.lambda_con, &b.con}};
  std::vector<Tensor> used;
  std::vector<float> lambdas;
  for (const auto& t : terms) {
    if (!t.t->defined()) continue;
    const double v = t.t->item();
    if (!std::isfinite(v))
      throw NumericError(fmt::format("loss term '{}' is not finite ({})",
                                     t.name, v));
    *t.slot = v;
    used.push_back(*t.t);
    lambdas.push_back(t.lambda);
  }
  Tensor total = used.empty() ? Tensor::scalar(0.0f)
                              : ops::affine_combine(used, lambdas);
  b.total = total.item();
  return total;
}

double loss_geo_eval(const ImageU8& pred, const ImageU8& corr_gt,
                     const Mask& mask, const mesh::VertexColoring& coloring,
                     const mesh::GeodesicTable& geod, float sigma_geo) {
  const std::vector<int> fg = foreground_pixels(mask);
  if (fg.empty()) throw InputError("loss_geo: empty mask");
  const float sg = sigma_geo > 0 ? sigma_geo : geod.sigma_geo;
  double acc = 0;
  for (int i : fg) {
    const int pv = mesh::color_to_vertex(
        {pred.data[(size_t)i * 3], pred.data[(size_t)i * 3 + 1],
         pred.data[(size_t)i * 3 + 2]},
        coloring);
    const int gv = mesh::color_to_vertex(
        {corr_gt.data[(size_t)i * 3], corr_gt.data[(size_t)i * 3 + 1],
         corr_gt.data[(size_t)i * 3 + 2]},
        coloring);
    acc += geod.at(pv, gv);
  }
  return acc / ((double)fg.size() * sg);
}

double loss_con_eval(const ImageU8& pred, const Mask& mask,
                     const mesh::VertexColoring& coloring,
                     const mesh::GeodesicTable& geod, float sigma_geo,
                     float sigma_col, int n_samples, uint64_t seed,
                     bool reverse_enumeration) {
  if (n_samples < 1) throw InputError("loss_con: n_samples must be >= 1");
  std::vector<int> fg = foreground_pixels(mask);
  if (fg.empty()) throw InputError("loss_con: empty mask");
  const float sg = sigma_geo > 0 ? sigma_geo : geod.sigma_geo;

  std::vector<int> verts(fg.size());
  {
    std::vector<float> buf(fg.size() * 3);
    for (size_t k = 0; k < fg.size(); ++k)
      for (int c = 0; c < 3; ++c)
        buf[k * 3 + c] = pred.data[(size_t)fg[k] * 3 + c];
    mesh::decode_colors(buf.data(), (int)fg.size(), coloring, verts.data());
  }

  Rng rng(seed);
  std::vector<int> refs;
  for (int s = 0; s < n_samples; ++s)
    refs.push_back((int)rng.uniform_int((uint64_t)fg.size()));

  std::vector<size_t> order(fg.size());
  for (size_t k = 0; k < fg.size(); ++k)
    order[k] = reverse_enumeration ? fg.size() - 1 - k : k;

  double acc = 0;
  for (int s = 0; s < n_samples; ++s) {
    const int rk = refs[s];
    const int r_pix = fg[rk];
    double sacc = 0;
    for (size_t k : order) {
      const int p_pix = fg[k];
      double l1 = 0;
      for (int c = 0; c < 3; ++c)
        l1 += std::abs((double)pred.data[(size_t)r_pix * 3 + c] -
                       (double)pred.data[(size_t)p_pix * 3 + c]);
      const double z =
          (double)geod.at(verts[rk], verts[k]) / sg - l1 / sigma_col;
      sacc += softplus(z);
    }
    acc += sacc / (double)fg.size();
  }
  return acc / n_samples;
}

}  // namespace corrmap::loss
