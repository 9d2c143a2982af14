#include "corrmap/data/sample.hpp"

#include <filesystem>
#include <fstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "corrmap/core/error.hpp"
#include "corrmap/io/png_io.hpp"

namespace corrmap::data {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json camera_to_json(const synth::Camera& c) {
  return {{"eye", {c.eye.x, c.eye.y, c.eye.z}},
          {"look_at", {c.look_at.x, c.look_at.y, c.look_at.z}},
          {"fov_deg", c.fov_deg},
          {"width", c.width},
          {"height", c.height}};
}

synth::Camera camera_from_json(const json& j) {
  synth::Camera c;
  c.eye = {j.at("eye")[0], j.at("eye")[1], j.at("eye")[2]};
  c.look_at = {j.at("look_at")[0], j.at("look_at")[1], j.at("look_at")[2]};
  c.fov_deg = j.at("fov_deg");
  c.width = j.at("width");
  c.height = j.at("height");
  return c;
}

}  // namespace

void save_sample(const std::string& dir, const Sample& s) {
  fs::create_directories(dir);
  const fs::path d(dir);
  io::write_png((d / "rgb.png").string(), s.rgb);
  io::write_mask_png((d / "mask.png").string(), s.mask);
  io::write_png((d / "corr.png").string(), s.corr_gt);
  io::write_png((d / "init.png").string(), s.init);
  if (s.meta.instance_count > 1)
    io::write_png((d / "instance.png").string(), s.instance);

  json meta;
  meta["sequence"] = s.meta.sequence;
  meta["frame"] = s.meta.frame;
  meta["seed"] = s.meta.seed;
  meta["instance_count"] = s.meta.instance_count;
  meta["camera"] = camera_to_json(s.meta.pose.camera);
  json axes = json::array(), angles = json::array();
  for (size_t b = 0; b < s.meta.pose.bone_angle.size(); ++b) {
    const Vec3 a = s.meta.pose.bone_axis[b];
    axes.push_back({a.x, a.y, a.z});
    angles.push_back(s.meta.pose.bone_angle[b]);
  }
  meta["pose"] = {{"axes", axes},
                  {"angles", angles},
                  {"root_translation",
                   {s.meta.pose.root_translation.x, s.meta.pose.root_translation.y,
                    s.meta.pose.root_translation.z}}};
  json annots = json::array();
  for (const auto& a : s.annots)
    annots.push_back({{a.x, a.y}, a.vertex});  // [[x,y],vertex]
  meta["sparse_annotations"] = annots;

  std::ofstream out(d / "meta.json");
  if (!out) throw InputError(fmt::format("cannot write {}/meta.json", dir));
  out << meta.dump(1) << "\n";
}

Sample load_sample(const std::string& dir) {
  const fs::path d(dir);
  Sample s;
  s.rgb = io::read_png((d / "rgb.png").string(), 3);
  s.mask = io::read_mask_png((d / "mask.png").string());
  s.corr_gt = io::read_png((d / "corr.png").string(), 3);
  s.init = io::read_png((d / "init.png").string(), 3);

  std::ifstream in(d / "meta.json");
  if (!in) throw InputError(fmt::format("missing {}/meta.json", dir));
  json meta;
  try {
    in >> meta;
  } catch (const json::exception& e) {
    throw InputError(fmt::format("bad meta.json in {}: {}", dir, e.what()));
  }
  s.meta.sequence = meta.at("sequence");
  s.meta.frame = meta.at("frame");
  s.meta.seed = meta.at("seed");
  s.meta.instance_count = meta.value("instance_count", 1);
  s.meta.pose.camera = camera_from_json(meta.at("camera"));
  if (meta.contains("pose")) {
    for (const auto& a : meta["pose"]["axes"])
      s.meta.pose.bone_axis.push_back({a[0], a[1], a[2]});
    for (const auto& a : meta["pose"]["angles"])
      s.meta.pose.bone_angle.push_back(a);
    const auto& rt = meta["pose"]["root_translation"];
    s.meta.pose.root_translation = {rt[0], rt[1], rt[2]};
  }
  for (const auto& ja : meta.at("sparse_annotations"))
    s.annots.push_back({ja[0][0], ja[0][1], ja[1]});

  if (s.meta.instance_count > 1 && fs::exists(d / "instance.png"))
    s.instance = io::read_png((d / "instance.png").string(), 1);
  else {
    s.instance = ImageU8(s.mask.h, s.mask.w, 1, 0);
    for (size_t i = 0; i < s.mask.data.size(); ++i)
      s.instance.data[i] = s.mask.data[i] ? 1 : 0;
  }
  return s;
}

}  // namespace corrmap::data
