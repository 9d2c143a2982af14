#pragma once

#include "corrmap/data/sample.hpp"
#include "corrmap/mesh/coloring.hpp"

namespace corrmap::synth {

// Dense pseudo ground truth over a silhouette from sparse annotations plus a
// coarse init:
//   - annotated pixels keep their annotation's vertex color exactly;
//   - init-covered pixels keep init unless an annotation lies nearer
//     (image-space Euclidean) than trust_radius;
//   - all other mask pixels copy the nearest source pixel (annotation or
//     init-covered), distance ties going to the lexicographically smaller
//     (y, x) source.
// Throws InputError on an empty mask or an annotation outside the mask.
ImageU8 densify_sparse_annotations(const std::vector<data::SparseAnnot>& annots,
                                   const ImageU8& init, const Mask& mask,
                                   const mesh::VertexColoring& coloring,
                                   float trust_radius);

}  // namespace corrmap::synth
