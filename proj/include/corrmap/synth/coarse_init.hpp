#pragma once

#include "corrmap/core/image.hpp"
#include "corrmap/mesh/coloring.hpp"
#include "corrmap/mesh/geodesics.hpp"

namespace corrmap::synth {

// Chebyshev-ball erosion: a pixel survives iff every pixel within L-inf
// radius `px` lies inside the mask (off-image counts as outside).
Mask erode_mask(const Mask& mask, int px);

// Degraded stand-in for an external coarse-correspondence model: erode the
// silhouette, then replace every surviving pixel's vertex with a uniformly
// random vertex within geodesic radius noise_gap * mean_edge_length.
// Pixels are visited in row-major order with a splitmix stream, so the result
// is a pure function of (inputs, seed).
ImageU8 simulate_coarse_init(const ImageU8& corr_gt, const Mask& mask,
                             int erosion_px, int noise_gap, uint64_t seed,
                             double mean_edge_length,
                             const mesh::VertexColoring& coloring,
                             const mesh::GeodesicTable& geodesics);

}  // namespace corrmap::synth
