#include "corrmap/mesh/geodesics.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <queue>

#include <fmt/format.h>

#include "corrmap/core/error.hpp"
#include "corrmap/core/thread_pool.hpp"

namespace corrmap::mesh {
namespace {

constexpr uint32_t kCacheVersion = 1;
constexpr float kInf = std::numeric_limits<float>::infinity();

struct Adj {
  std::vector<int> head;           // per-vertex start into nbr/len
  std::vector<int> nbr;
  std::vector<float> len;
};

Adj build_adjacency(const TemplateMesh& mesh) {
  const int nv = mesh.vertex_count();
  auto es = mesh.edges();
  std::vector<int> deg(nv, 0);
  for (auto [a, b] : es) {
    ++deg[a];
    ++deg[b];
  }
  Adj adj;
  adj.head.assign(nv + 1, 0);
  for (int v = 0; v < nv; ++v) adj.head[v + 1] = adj.head[v] + deg[v];
  adj.nbr.resize(adj.head[nv]);
  adj.len.resize(adj.head[nv]);
  std::vector<int> fill(adj.head.begin(), adj.head.end() - 1);
  for (auto [a, b] : es) {
    const float l = norm(mesh.vertices[a] - mesh.vertices[b]);
    adj.nbr[fill[a]] = b;
    adj.len[fill[a]++] = l;
    adj.nbr[fill[b]] = a;
    adj.len[fill[b]++] = l;
  }
  return adj;
}

void dijkstra(const Adj& adj, int src, float* out) {
  const int nv = (int)adj.head.size() - 1;
  std::fill(out, out + nv, kInf);
  out[src] = 0;
  using Item = std::pair<float, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> q;
  q.push({0.0f, src});
  while (!q.empty()) {
    auto [d, v] = q.top();
    q.pop();
    if (d > out[v]) continue;
    for (int e = adj.head[v]; e < adj.head[v + 1]; ++e) {
      const int u = adj.nbr[e];
      const float nd = d + adj.len[e];
      if (nd < out[u]) {
        out[u] = nd;
        q.push({nd, u});
      }
    }
  }
}

}  // namespace

GeodesicTable compute_geodesics(const TemplateMesh& mesh) {
  const int nv = mesh.vertex_count();
  const Adj adj = build_adjacency(mesh);

  GeodesicTable t;
  t.n = nv;
  t.dist.resize((size_t)nv * nv);
  parallel_for(nv, [&](int64_t lo, int64_t hi) {
    for (int64_t s = lo; s < hi; ++s)
      dijkstra(adj, (int)s, t.dist.data() + (size_t)s * nv);
  });

  for (int s = 0; s < nv; ++s)
    for (int v = 0; v < nv; ++v)
      if (t.at(s, v) == kInf) {
        int sz = 0;
        for (int u = 0; u < nv; ++u) sz += t.at(s, u) == kInf;
        throw InputError(fmt::format(
            "mesh is disconnected: vertex {} is unreachable from vertex {} "
            "({} vertices in the unreachable component)",
            v, s, sz));
      }
  t.sigma_geo = *std::max_element(t.dist.begin(), t.dist.end());
  return t;
}

void save_geodesic_cache(const GeodesicTable& table, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError(fmt::format("cannot write geodesic cache: {}", path));
  const uint32_t n = (uint32_t)table.n, ver = kCacheVersion;
  out.write((const char*)&n, 4);
  out.write((const char*)&ver, 4);
  out.write((const char*)table.dist.data(),
            (std::streamsize)(table.dist.size() * sizeof(float)));
}

GeodesicTable load_geodesic_cache(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(fmt::format("cannot open geodesic cache: {}", path));
  uint32_t n = 0, ver = 0;
  in.read((char*)&n, 4);
  in.read((char*)&ver, 4);
  if (!in || ver != kCacheVersion)
    throw InputError(fmt::format("bad geodesic cache header: {}", path));
  GeodesicTable t;
  t.n = (int)n;
  t.dist.resize((size_t)n * n);
  in.read((char*)t.dist.data(), (std::streamsize)(t.dist.size() * sizeof(float)));
  if (!in) throw InputError(fmt::format("truncated geodesic cache: {}", path));
  t.sigma_geo = t.dist.empty()
                    ? 0.0f
                    : *std::max_element(t.dist.begin(), t.dist.end());
  return t;
}

GeodesicTable geodesics_cached(const TemplateMesh& mesh,
                               const std::string& cache_dir) {
  if (cache_dir.empty()) return compute_geodesics(mesh);
  namespace fs = std::filesystem;
  fs::create_directories(cache_dir);
  const std::string path =
      (fs::path(cache_dir) /
       fmt::format("geodesics_{:016x}.bin", mesh.content_hash()))
          .string();
  if (fs::exists(path)) {
    GeodesicTable t = load_geodesic_cache(path);
    if (t.n == mesh.vertex_count()) return t;
  }
  GeodesicTable t = compute_geodesics(mesh);
  const std::string tmp = path + ".tmp";
  save_geodesic_cache(t, tmp);
  fs::rename(tmp, path);
  return t;
}

}  // namespace corrmap::mesh
