#pragma once

#include <optional>
#include <vector>

#include "corrmap/core/image.hpp"
#include "corrmap/mesh/coloring.hpp"
#include "corrmap/mesh/geodesics.hpp"

namespace corrmap::metric {

// Percentage (0..100) of foreground pixels p for which some GT pixel q with
// ||p-q||_inf <= window_px (q inside the mask) decodes to the same vertex as
// the prediction at p. Window 0 is the exact per-pixel match.
double pixel_accuracy(const ImageU8& pred, const ImageU8& corr_gt,
                      const Mask& mask, int window_px,
                      const mesh::VertexColoring& coloring);

// Geodesic point similarity over one instance's annotated points:
// mean of exp(-g^2 / (2 kappa^2)). kappa is in the table's distance units.
double gps(const std::vector<int>& pred_vertices,
           const std::vector<int>& gt_vertices,
           const mesh::GeodesicTable& geod, double kappa);

// DensePose-style kappa convention: a fraction of the maximum distance.
inline double kappa_absolute(double kappa_normalized,
                             const mesh::GeodesicTable& geod) {
  return kappa_normalized * geod.sigma_geo;
}

struct ApAr {
  double ap = 0, ar = 0;
  std::vector<double> thresholds, ap_t, ar_t;
};

// Ground-truth instances are given (no detector): at threshold t an instance
// is a true positive iff it has a prediction and GPS > t. Precision counts
// over predicted instances, recall over all instances. Instances without a
// prediction carry std::nullopt.
ApAr ap_ar_over_gps(const std::vector<std::optional<double>>& instance_gps,
                    std::vector<double> thresholds = {});

// Positive-match percentage between frames t and t+interval over vertices
// visible (per GT) in both: a vertex matches when the geodesic distance
// between the decoded predictions at its two GT pixel locations is <= tau.
// A vertex's GT pixel is the first (row-major) pixel decoding to it.
double temporal_consistency(const std::vector<ImageU8>& preds,
                            const std::vector<ImageU8>& gts,
                            const std::vector<Mask>& masks, int interval,
                            double tau, const mesh::VertexColoring& coloring,
                            const mesh::GeodesicTable& geod);

}  // namespace corrmap::metric
