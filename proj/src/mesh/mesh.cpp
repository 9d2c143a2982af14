#include "corrmap/mesh/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "corrmap/core/error.hpp"
#include "corrmap/core/rng.hpp"

namespace corrmap::mesh {

using nlohmann::json;

void TemplateMesh::validate() const {
  const int nv = vertex_count();
  if (nv == 0) throw InputError("mesh has no vertices");
  for (size_t fi = 0; fi < faces.size(); ++fi) {
    const auto& f = faces[fi];
    for (int idx : f)
      if (idx < 0 || idx >= nv)
        throw InputError(
            fmt::format("face {} references vertex {} out of range [0,{})", fi,
                        idx, nv));
    if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2])
      throw InputError(fmt::format("face {} is degenerate", fi));
  }
  if (!bones.empty()) {
    for (size_t b = 0; b < bones.size(); ++b) {
      const int p = bones[b].parent;
      if (p >= (int)b || p < -1)
        throw InputError(fmt::format(
            "bone {} has invalid parent {} (parents must precede children)", b,
            p));
    }
    if ((int)skin_weights.size() != nv)
      throw InputError("skin weight count does not match vertex count");
    for (int v = 0; v < nv; ++v) {
      double s = 0;
      for (const auto& sw : skin_weights[v]) {
        if (sw.bone < 0 || sw.bone >= (int)bones.size())
          throw InputError(fmt::format("vertex {} weights unknown bone {}", v,
                                       sw.bone));
        if (sw.w < 0)
          throw InputError(fmt::format("vertex {} has negative skin weight", v));
        s += sw.w;
      }
      if (std::abs(s - 1.0) > 1e-6)
        throw InputError(
            fmt::format("vertex {} skin weights sum to {} (expected 1)", v, s));
    }
  }

  // Edge-graph connectivity via union-find.
  std::vector<int> parent(nv);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  for (const auto& f : faces)
    for (int e = 0; e < 3; ++e) {
      int a = find(f[e]), b = find(f[(e + 1) % 3]);
      if (a != b) parent[a] = b;
    }
  const int root = find(0);
  for (int v = 1; v < nv; ++v)
    if (find(v) != root) {
      int sz = 0;
      for (int u = 0; u < nv; ++u) sz += find(u) == find(v);
      throw InputError(fmt::format(
          "mesh edge graph is disconnected: vertex {} lies in a component of "
          "{} vertices unreachable from vertex 0",
          v, sz));
    }
}

std::vector<std::pair<int, int>> TemplateMesh::edges() const {
  std::set<std::pair<int, int>> es;
  for (const auto& f : faces)
    for (int e = 0; e < 3; ++e) {
      int a = f[e], b = f[(e + 1) % 3];
      es.insert({std::min(a, b), std::max(a, b)});
    }
  return {es.begin(), es.end()};
}

double TemplateMesh::mean_edge_length() const {
  auto es = edges();
  if (es.empty()) return 0;
  double s = 0;
  for (auto [a, b] : es) s += norm(vertices[a] - vertices[b]);
  return s / (double)es.size();
}

uint64_t TemplateMesh::content_hash() const {
  uint64_t h = 0xcbf29ce484222325ull;
  h = fnv1a64(vertices.data(), vertices.size() * sizeof(Vec3), h);
  h = fnv1a64(faces.data(), faces.size() * sizeof(faces[0]), h);
  for (const auto& b : bones) {
    h = fnv1a64(b.name.data(), b.name.size(), h);
    h = fnv1a64(&b.parent, sizeof(b.parent), h);
    h = fnv1a64(&b.rest, sizeof(b.rest), h);
  }
  for (const auto& ws : skin_weights)
    h = fnv1a64(ws.data(), ws.size() * sizeof(SkinWeight), h);
  return h;
}

int TemplateMesh::dominant_bone(int vertex) const {
  const auto& ws = skin_weights[vertex];
  int best = 0;
  float bw = -1;
  for (const auto& sw : ws)
    if (sw.w > bw) {
      bw = sw.w;
      best = sw.bone;
    }
  return best;
}

TemplateMesh load_obj_with_rig(const std::string& obj_path,
                               const std::string& rig_path) {
  std::ifstream in(obj_path);
  if (!in) throw InputError(fmt::format("cannot open mesh: {}", obj_path));
  TemplateMesh m;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag == "v") {
      Vec3 v;
      ss >> v.x >> v.y >> v.z;
      if (!ss) throw InputError(fmt::format("bad vertex line: {}", line));
      m.vertices.push_back(v);
    } else if (tag == "f") {
      std::array<int, 3> f{};
      for (int i = 0; i < 3; ++i) {
        std::string tok;
        ss >> tok;
        if (tok.empty()) throw InputError(fmt::format("bad face line: {}", line));
        f[i] = std::stoi(tok.substr(0, tok.find('/'))) - 1;  // 1-based
      }
      m.faces.push_back(f);
    }
  }

  std::ifstream rin(rig_path);
  if (!rin) throw InputError(fmt::format("cannot open rig: {}", rig_path));
  json rig;
  try {
    rin >> rig;
  } catch (const json::exception& e) {
    throw InputError(fmt::format("bad rig JSON {}: {}", rig_path, e.what()));
  }
  for (const auto& jb : rig.at("bones")) {
    Bone b;
    b.name = jb.at("name").get<std::string>();
    b.parent = jb.at("parent").get<int>();
    auto r = jb.at("rest");
    b.rest = {r.at(0).get<float>(), r.at(1).get<float>(), r.at(2).get<float>()};
    m.bones.push_back(b);
  }
  for (const auto& jw : rig.at("weights")) {
    std::vector<SkinWeight> ws;
    for (const auto& pair : jw)
      ws.push_back({pair.at(0).get<int>(), pair.at(1).get<float>()});
    m.skin_weights.push_back(std::move(ws));
  }
  m.validate();
  return m;
}

void save_obj_with_rig(const TemplateMesh& mesh, const std::string& obj_path,
                       const std::string& rig_path) {
  std::ofstream out(obj_path);
  if (!out) throw InputError(fmt::format("cannot write mesh: {}", obj_path));
  out << "# corrmap template mesh\n";
  for (const auto& v : mesh.vertices)
    out << fmt::format("v {:.9g} {:.9g} {:.9g}\n", v.x, v.y, v.z);
  for (const auto& f : mesh.faces)
    out << fmt::format("f {} {} {}\n", f[0] + 1, f[1] + 1, f[2] + 1);

  json rig;
  rig["bones"] = json::array();
  for (const auto& b : mesh.bones)
    rig["bones"].push_back(
        {{"name", b.name}, {"parent", b.parent}, {"rest", {b.rest.x, b.rest.y, b.rest.z}}});
  rig["weights"] = json::array();
  for (const auto& ws : mesh.skin_weights) {
    json jw = json::array();
    for (const auto& sw : ws) jw.push_back({sw.bone, sw.w});
    rig["weights"].push_back(jw);
  }
  std::ofstream rout(rig_path);
  if (!rout) throw InputError(fmt::format("cannot write rig: {}", rig_path));
  rout << rig.dump(1) << "\n";
}

}  // namespace corrmap::mesh
