#pragma once

#include <string>
#include <vector>

#include "corrmap/mesh/mesh.hpp"

namespace corrmap::mesh {

// All-pairs shortest-path distances on the mesh edge graph with Euclidean
// edge lengths. Row-major V x V float32; symmetric, zero diagonal.
struct GeodesicTable {
  int n = 0;
  std::vector<float> dist;
  float sigma_geo = 0;  // max entry

  float at(int i, int j) const { return dist[(size_t)i * n + j]; }
};

// Dijkstra from every source, parallel over sources. Throws InputError for a
// disconnected mesh (names the unreachable component).
GeodesicTable compute_geodesics(const TemplateMesh& mesh);

// Binary cache: u32 vertex count, u32 format version, then the row-major
// float32 matrix. Files are keyed by the mesh content hash.
void save_geodesic_cache(const GeodesicTable& table, const std::string& path);
GeodesicTable load_geodesic_cache(const std::string& path);

// Loads from `cache_dir` when a file for this mesh exists, otherwise computes
// and writes it. Empty cache_dir disables caching.
GeodesicTable geodesics_cached(const TemplateMesh& mesh,
                               const std::string& cache_dir);

}  // namespace corrmap::mesh
