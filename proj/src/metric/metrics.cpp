#include "corrmap/metric/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include <fmt/format.h>

#include "corrmap/core/error.hpp"

namespace corrmap::metric {
namespace {

std::vector<int> decode_image(const ImageU8& img, const Mask& mask,
                              const mesh::VertexColoring& coloring) {
  std::vector<int> v((size_t)mask.h * mask.w, -1);
  for (int y = 0; y < mask.h; ++y)
    for (int x = 0; x < mask.w; ++x)
      if (mask.at(y, x))
        v[(size_t)y * mask.w + x] =
            mesh::color_to_vertex(get_rgb(img, y, x), coloring);
  return v;
}

}  // namespace

double pixel_accuracy(const ImageU8& pred, const ImageU8& corr_gt,
                      const Mask& mask, int window_px,
                      const mesh::VertexColoring& coloring) {
  if (window_px < 0) throw InputError("pixel_accuracy: negative window");
  if (!pred.same_shape(corr_gt) || pred.h != mask.h || pred.w != mask.w)
    throw InputError("pixel_accuracy: shape mismatch");
  const std::vector<int> pv = decode_image(pred, mask, coloring);
  const std::vector<int> gv = decode_image(corr_gt, mask, coloring);

  int64_t fg = 0, correct = 0;
  for (int y = 0; y < mask.h; ++y)
    for (int x = 0; x < mask.w; ++x) {
      if (!mask.at(y, x)) continue;
      ++fg;
      const int want = pv[(size_t)y * mask.w + x];
      bool hit = false;
      for (int dy = -window_px; dy <= window_px && !hit; ++dy) {
        const int qy = y + dy;
        if (qy < 0 || qy >= mask.h) continue;
        for (int dx = -window_px; dx <= window_px; ++dx) {
          const int qx = x + dx;
          if (qx < 0 || qx >= mask.w || !mask.at(qy, qx)) continue;
          if (gv[(size_t)qy * mask.w + qx] == want) {
            hit = true;
            break;
          }
        }
      }
      correct += hit;
    }
  if (fg == 0) throw InputError("pixel_accuracy: empty mask");
  return 100.0 * (double)correct / (double)fg;
}

double gps(const std::vector<int>& pred_vertices,
           const std::vector<int>& gt_vertices,
           const mesh::GeodesicTable& geod, double kappa) {
  if (pred_vertices.empty() || pred_vertices.size() != gt_vertices.size())
    throw InputError("gps: empty or mismatched annotation lists");
  if (!(kappa > 0)) throw InputError("gps: kappa must be positive");
  double acc = 0;
  const double denom = 2.0 * kappa * kappa;
  for (size_t i = 0; i < pred_vertices.size(); ++i) {
    const double g = geod.at(pred_vertices[i], gt_vertices[i]);
    acc += std::exp(-(g * g) / denom);
  }
  return acc / (double)pred_vertices.size();
}

ApAr ap_ar_over_gps(const std::vector<std::optional<double>>& instance_gps,
                    std::vector<double> thresholds) {
  if (instance_gps.empty()) throw InputError("ap_ar_over_gps: no instances");
  if (thresholds.empty())
    for (int i = 0; i < 10; ++i) thresholds.push_back(0.50 + 0.05 * i);

  ApAr out;
  out.thresholds = thresholds;
  int64_t with_pred = 0;
  for (const auto& g : instance_gps) with_pred += g.has_value();

  for (double t : thresholds) {
    int64_t tp = 0;
    for (const auto& g : instance_gps) tp += g.has_value() && *g > t;
    const double prec = with_pred > 0 ? (double)tp / (double)with_pred : 0.0;
    const double rec = (double)tp / (double)instance_gps.size();
    out.ap_t.push_back(prec);
    out.ar_t.push_back(rec);
    out.ap += prec;
    out.ar += rec;
  }
  out.ap /= (double)thresholds.size();
  out.ar /= (double)thresholds.size();
  return out;
}

double temporal_consistency(const std::vector<ImageU8>& preds,
                            const std::vector<ImageU8>& gts,
                            const std::vector<Mask>& masks, int interval,
                            double tau, const mesh::VertexColoring& coloring,
                            const mesh::GeodesicTable& geod) {
  const size_t nf = preds.size();
  if (gts.size() != nf || masks.size() != nf)
    throw InputError("temporal_consistency: sequence length mismatch");
  if (interval < 1 || (size_t)interval >= nf)
    throw InputError(
        fmt::format("temporal_consistency: interval {} outside sequence of {} "
                    "frames",
                    interval, nf));
  if (tau < 0) throw InputError("temporal_consistency: negative tolerance");

  // Per-frame vertex -> first GT pixel, and decoded predictions.
  std::vector<std::unordered_map<int, int>> vis(nf);
  std::vector<std::vector<int>> pred_v(nf);
  for (size_t f = 0; f < nf; ++f) {
    const std::vector<int> gv = decode_image(gts[f], masks[f], coloring);
    pred_v[f] = decode_image(preds[f], masks[f], coloring);
    for (size_t i = 0; i < gv.size(); ++i)
      if (gv[i] >= 0 && !vis[f].count(gv[i])) vis[f][gv[i]] = (int)i;
  }

  int64_t pairs = 0, matches = 0;
  for (size_t t = 0; t + interval < nf; ++t) {
    const auto& a = vis[t];
    const auto& b = vis[t + interval];
    for (const auto& [v, pa] : a) {
      const auto it = b.find(v);
      if (it == b.end()) continue;
      ++pairs;
      const int da = pred_v[t][pa];
      const int db = pred_v[t + interval][it->second];
      if (geod.at(da, db) <= tau) ++matches;
    }
  }
  if (pairs == 0)
    throw InputError("temporal_consistency: no co-visible vertices");
  return 100.0 * (double)matches / (double)pairs;
}

}  // namespace corrmap::metric
