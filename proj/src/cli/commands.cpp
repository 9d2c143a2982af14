#include "corrmap/cli/commands.hpp"

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <map>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "corrmap/core/error.hpp"
#include "corrmap/core/rng.hpp"
#include "corrmap/data/dataset.hpp"
#include "corrmap/io/plot.hpp"
#include "corrmap/io/png_io.hpp"
#include "corrmap/metric/report.hpp"
#include "corrmap/net/checkpoint.hpp"

namespace corrmap::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void echo_config(const std::string& cmd, const json& resolved) {
  std::cout << fmt::format(R"({{"command":"{}","config":{}}})", cmd,
                           resolved.dump())
            << "\n";
}

std::string resolve_asset(const std::string& path, const std::string& base_dir) {
  if (fs::exists(path)) return path;
  const fs::path alt = fs::path(base_dir) / path;
  if (fs::exists(alt)) return alt.string();
  throw InputError(fmt::format("cannot find file '{}' (also tried {})", path,
                               alt.string()));
}

struct LoadedWorld {
  mesh::TemplateMesh tmpl;
  mesh::VertexColoring coloring;
  mesh::GeodesicTable geod;
  data::Manifest manifest;
};

LoadedWorld load_world(const std::string& dataset_dir) {
  LoadedWorld w;
  w.manifest = data::load_manifest(dataset_dir);
  w.tmpl = mesh::load_obj_with_rig(
      resolve_asset(w.manifest.mesh_obj, dataset_dir),
      resolve_asset(w.manifest.mesh_rig, dataset_dir));
  if (w.tmpl.content_hash() != w.manifest.mesh_hash)
    throw InputError("template mesh does not match the dataset manifest hash");
  w.coloring = mesh::build_coloring(w.tmpl);
  w.geod = mesh::geodesics_cached(w.tmpl,
                                  (fs::path(dataset_dir) / "geocache").string());
  return w;
}

}  // namespace

int cmd_gen_data(const GenDataOptions& o) {
  if (o.out_dir.empty()) throw InputError("gen-data: --out is required");
  const auto& g = o.gen;
  echo_config("gen-data",
              {{"out", o.out_dir},
               {"mesh_obj", o.mesh_obj},
               {"mesh_rig", o.mesh_rig},
               {"image_size", g.image_size},
               {"sequences", g.sequences},
               {"frames_per_seq", g.frames_per_seq},
               {"erosion_px", g.erosion_px},
               {"noise_gap", g.noise_gap},
               {"annots_per_sample", g.annots_per_sample},
               {"seed", g.seed},
               {"fov_deg", g.fov_deg},
               {"train_fraction", g.train_fraction}});

  mesh::TemplateMesh tmpl = mesh::load_obj_with_rig(o.mesh_obj, o.mesh_rig);
  const mesh::VertexColoring coloring = mesh::build_coloring(tmpl);
  const mesh::GeodesicTable geod = mesh::geodesics_cached(
      tmpl, (fs::path(o.out_dir) / "geocache").string());
  const synth::SceneContext scene{&tmpl, &coloring, &geod};

  data::Manifest m;
  m.mesh_obj = o.mesh_obj;
  m.mesh_rig = o.mesh_rig;
  m.mesh_hash = tmpl.content_hash();
  m.image_size = g.image_size;

  const int n_train = g.train_fraction >= 1.0f
                          ? g.sequences
                          : std::clamp((int)std::lround(g.train_fraction *
                                                        g.sequences),
                                       g.sequences > 1 ? 1 : 0,
                                       g.sequences - (g.sequences > 1 ? 1 : 0));
  for (int seq = 0; seq < g.sequences; ++seq)
    for (int f = 0; f < g.frames_per_seq; ++f) {
      const data::Sample s = synth::make_sample(scene, g, seq, f);
      const std::string rel = fmt::format("seq{:04d}/frame{:04d}", seq, f);
      data::save_sample((fs::path(o.out_dir) / rel).string(), s);
      (seq < n_train ? m.train_dirs : m.test_dirs).push_back(rel);
    }
  data::save_manifest(o.out_dir, m);
  std::cout << fmt::format("wrote {} train and {} test samples to {}\n",
                           m.train_dirs.size(), m.test_dirs.size(), o.out_dir);
  return kExitOk;
}

int cmd_train(const TrainOptions& o) {
  if (o.dataset_dir.empty()) throw InputError("train: --dataset is required");
  train::TrainConfig cfg = o.cfg;
  echo_config("train", cfg.to_json());

  LoadedWorld w = load_world(o.dataset_dir);
  std::vector<data::Sample> train_set =
      data::load_split(o.dataset_dir, w.manifest, "train");
  if (!train_set.empty()) {
    cfg.model.image_size = train_set[0].height();
  }
  const train::World world{&w.tmpl, &w.coloring, &w.geod};
  train::Trainer trainer(cfg, world, std::move(train_set));
  trainer.run();
  std::cout << fmt::format("trained {} steps; checkpoints in {}\n", cfg.steps,
                           cfg.out_dir);
  return kExitOk;
}

int cmd_eval(const EvalOptions& o) {
  if (o.dataset_dir.empty()) throw InputError("eval: --dataset is required");
  if (o.mode != "model" && o.mode != "oracle" && o.mode != "init")
    throw InputError(fmt::format("eval: unknown mode '{}'", o.mode));
  if (o.mode == "model" && o.checkpoint.empty())
    throw InputError("eval: --checkpoint required in model mode");
  const std::string report_path =
      o.report_path.empty() ? (fs::path(o.dataset_dir) / "report.json").string()
                            : o.report_path;
  echo_config("eval", {{"checkpoint", o.checkpoint},
                       {"dataset", o.dataset_dir},
                       {"report", report_path},
                       {"plots", o.plots_dir},
                       {"mode", o.mode},
                       {"split", o.split},
                       {"windows", o.windows},
                       {"intervals", o.intervals},
                       {"kappa", o.kappa},
                       {"tau", o.tau},
                       {"gps_points", o.gps_points}});

  LoadedWorld w = load_world(o.dataset_dir);
  const std::vector<data::Sample> samples =
      data::load_split(o.dataset_dir, w.manifest, o.split);
  if (samples.empty())
    throw InputError(fmt::format("eval: split '{}' is empty", o.split));

  net::Model model;
  if (o.mode == "model") model = net::load_checkpoint(o.checkpoint);

  auto predict_one = [&](const data::Sample& s) -> ImageU8 {
    if (o.mode == "oracle") return s.corr_gt;
    if (o.mode == "init") return s.init;
    net::Logits lg = model.forward(s.rgb, s.init, s.mask);
    return net::logits_to_image(lg, s.mask);
  };

  metric::MetricReport rep;
  rep.kappa_normalized = o.kappa;
  rep.tau_normalized = o.tau;
  const double kappa_abs = metric::kappa_absolute(o.kappa, w.geod);
  const double tau_abs = o.tau * w.geod.sigma_geo;

  std::vector<ImageU8> preds;
  preds.reserve(samples.size());
  for (const auto& s : samples) preds.push_back(predict_one(s));

  // Pooled pixel accuracy: weight each sample's percentage by its area.
  for (int wpx : o.windows) {
    double weighted = 0, total = 0;
    for (size_t i = 0; i < samples.size(); ++i) {
      const double area = (double)mask_area(samples[i].mask);
      if (area == 0) continue;
      weighted += area * metric::pixel_accuracy(preds[i], samples[i].corr_gt,
                                                samples[i].mask, wpx,
                                                w.coloring);
      total += area;
    }
    if (total == 0) throw InputError("eval: all masks empty");
    rep.pixel_accuracy[wpx] = weighted / total;
  }

  // One GPS instance per sample (single-person data), over its annotations or
  // a seeded foreground sample.
  const mesh::ColorIndex index(w.coloring);
  double gps_sum = 0;
  int gps_n = 0;
  for (size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    std::vector<int> pred_v, gt_v;
    if (!s.annots.empty()) {
      for (const auto& a : s.annots) {
        gt_v.push_back(a.vertex);
        pred_v.push_back(index.lookup(get_rgb(preds[i], a.y, a.x)));
      }
    } else {
      Rng rng(0xe7a1 + i);
      std::vector<int> fg;
      for (int p = 0; p < (int)s.mask.data.size(); ++p)
        if (s.mask.data[p]) fg.push_back(p);
      for (int k = 0; k < std::min(o.gps_points, (int)fg.size()); ++k) {
        const int p = fg[rng.uniform_int((uint64_t)fg.size())];
        gt_v.push_back(index.lookup(
            {s.corr_gt.data[(size_t)p * 3], s.corr_gt.data[(size_t)p * 3 + 1],
             s.corr_gt.data[(size_t)p * 3 + 2]}));
        pred_v.push_back(index.lookup(
            {preds[i].data[(size_t)p * 3], preds[i].data[(size_t)p * 3 + 1],
             preds[i].data[(size_t)p * 3 + 2]}));
      }
    }
    if (pred_v.empty()) {
      rep.gps_instances.push_back(std::nullopt);
      continue;
    }
    const double g = metric::gps(pred_v, gt_v, w.geod, kappa_abs);
    rep.gps_instances.push_back(g);
    gps_sum += g;
    ++gps_n;
  }
  rep.gps_mean = gps_n ? gps_sum / gps_n : 0;
  rep.apar = metric::ap_ar_over_gps(rep.gps_instances);

  // Temporal consistency over sequences long enough for each interval.
  std::map<int, std::vector<size_t>> by_seq;
  for (size_t i = 0; i < samples.size(); ++i)
    by_seq[samples[i].meta.sequence].push_back(i);
  for (auto& [seq, idx] : by_seq)
    std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) {
      return samples[a].meta.frame < samples[b].meta.frame;
    });
  for (int interval : o.intervals) {
    double acc = 0;
    int n = 0;
    for (const auto& [seq, idx] : by_seq) {
      if ((int)idx.size() <= interval) continue;
      std::vector<ImageU8> sp, sg;
      std::vector<Mask> sm;
      for (size_t i : idx) {
        sp.push_back(preds[i]);
        sg.push_back(samples[i].corr_gt);
        sm.push_back(samples[i].mask);
      }
      acc += metric::temporal_consistency(sp, sg, sm, interval, tau_abs,
                                          w.coloring, w.geod);
      ++n;
    }
    if (n) rep.temporal[interval] = acc / n;
  }

  write_report(report_path, rep);
  if (!o.plots_dir.empty()) write_report_plots(o.plots_dir, rep);
  std::cout << rep.to_json().dump(1) << "\n";
  return kExitOk;
}

int cmd_predict(const PredictOptions& o) {
  echo_config("predict", {{"checkpoint", o.checkpoint},
                          {"image", o.image},
                          {"mask", o.mask},
                          {"init", o.init},
                          {"out", o.out}});
  for (const std::string& p : {o.checkpoint, o.image, o.mask, o.init})
    if (!fs::exists(p))
      throw InputError(fmt::format("predict: missing input '{}'", p));

  net::Model model = net::load_checkpoint(o.checkpoint);
  const ImageU8 rgb = io::read_png(o.image, 3);
  const Mask mask = io::read_mask_png(o.mask);
  const ImageU8 init = io::read_png(o.init, 3);
  if (rgb.h != mask.h || rgb.w != mask.w || init.h != rgb.h || init.w != rgb.w)
    throw InputError("predict: image/mask/init sizes differ");

  if (mask_area(mask) == 0) {
    std::cerr << "warning: empty mask, writing all-background output\n";
    io::write_png(o.out, ImageU8(rgb.h, rgb.w, 3, 0));
    return kExitOk;
  }
  net::Logits lg = model.forward(rgb, init, mask);
  io::write_png(o.out, net::logits_to_image(lg, mask));
  return kExitOk;
}

int cmd_viz(const VizOptions& o) {
  echo_config("viz", {{"sample", o.sample_dir},
                      {"checkpoint", o.checkpoint},
                      {"pred", o.pred_png},
                      {"out", o.out}});
  const data::Sample s = data::load_sample(o.sample_dir);
  ImageU8 pred;
  if (!o.pred_png.empty()) {
    pred = io::read_png(o.pred_png, 3);
  } else if (!o.checkpoint.empty()) {
    net::Model model = net::load_checkpoint(o.checkpoint);
    pred = net::logits_to_image(model.forward(s.rgb, s.init, s.mask), s.mask);
  } else {
    pred = s.init;  // fall back to the coarse initialization panel
  }
  const ImageU8 panel = io::hstack({&s.rgb, &s.corr_gt, &pred});
  io::write_png(o.out, panel);
  return kExitOk;
}

}  // namespace corrmap::cli
