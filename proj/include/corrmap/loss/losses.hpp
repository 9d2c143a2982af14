#pragma once

#include "corrmap/core/image.hpp"
#include "corrmap/mesh/coloring.hpp"
#include "corrmap/mesh/geodesics.hpp"
#include "corrmap/tensor/tensor.hpp"

namespace corrmap::loss {

struct LossWeights {
  float lambda_cls = 1.0f;
  float lambda_sil = 0.5f;
  float lambda_geo = 0.5f;
  float lambda_con = 0.1f;
  float sigma_geo = 0.0f;    // 0: take the geodesic table's max distance
  float sigma_col = 765.0f;  // max possible L1 distance between RGB triples
  int con_samples = 100;     // reference draws per consistency evaluation
  float part_weight_boost = 2.0f;  // hands/head pixels
  float part_weight_base = 1.0f;

  void validate() const;  // throws InputError
};

// Per-pixel loss weights from body parts: pixels whose GT vertex is dominated
// by a head/neck/hand bone get the boosted weight, the rest the base weight.
ImageF part_weight_map(const ImageU8& corr_gt, const Mask& mask,
                       const mesh::VertexColoring& coloring,
                       const mesh::TemplateMesh& tmpl, float base, float boost);

// ---------- differentiable terms (training path) ----------
// logits: [H*W, 768] pixel-major (three 256-way channel classifiers).
// Mean over foreground pixels and the three channels of part-weighted
// cross-entropy between the 256-way scores and the GT channel label.
Tensor loss_cls(const Tensor& logits, const ImageU8& corr_gt, const Mask& mask,
                const ImageF& part_weights);

// 1 - softIoU(sigmoid(fg_logit), mask).
Tensor loss_sil(const Tensor& fg_logit, const Mask& mask);

// Per channel: sum_l l * softmax(scores)_l, in [0,255]. [H*W,768] -> [H*W,3].
Tensor expected_color(const Tensor& logits);

// Geodesic error between decoded prediction and decoded GT, averaged over
// foreground pixels and normalized by sigma_geo. The nearest-vertex decode is
// piecewise constant, so this term propagates no gradient; it is attached to
// the graph for bookkeeping only.
Tensor loss_geo(const Tensor& expected, const ImageU8& corr_gt,
                const Mask& mask, const mesh::VertexColoring& coloring,
                const mesh::GeodesicTable& geod, float sigma_geo = 0);

// Pairwise consistency penalty: n_samples reference pixels drawn uniformly
// from the mask; per reference, softplus(D_g/sigma_geo - |dcolor|_1/sigma_col)
// averaged over foreground pixels, then averaged over draws. Gradient flows
// through the predicted-color L1 term; the decoded D_g part is constant.
Tensor loss_con(const Tensor& expected, const Mask& mask,
                const mesh::VertexColoring& coloring,
                const mesh::GeodesicTable& geod, float sigma_geo,
                float sigma_col, int n_samples, uint64_t seed);

struct LossBreakdown {
  double cls = 0, sil = 0, geo = 0, con = 0, total = 0;
};

// Weighted sum of the provided terms (undefined tensors mean "skipped",
// contributing zero). Throws NumericError naming any non-finite component.
Tensor total_loss(const Tensor& cls, const Tensor& sil, const Tensor& geo,
                  const Tensor& con, const LossWeights& w, LossBreakdown* bd);

// ---------- evaluation path (decoded images, no gradients) ----------
double loss_geo_eval(const ImageU8& pred, const ImageU8& corr_gt,
                     const Mask& mask, const mesh::VertexColoring& coloring,
                     const mesh::GeodesicTable& geod, float sigma_geo = 0);
double loss_con_eval(const ImageU8& pred, const Mask& mask,
                     const mesh::VertexColoring& coloring,
                     const mesh::GeodesicTable& geod, float sigma_geo,
                     float sigma_col, int n_samples, uint64_t seed,
                     bool reverse_enumeration = false);

}  // namespace corrmap::loss
