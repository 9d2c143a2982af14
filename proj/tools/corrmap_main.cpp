#include <exception>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "corrmap/cli/commands.hpp"
#include "corrmap/core/error.hpp"
#include "corrmap/io/schema.hpp"

// corrmap: synthetic dense-correspondence data, training, evaluation.
//
// Exit codes: 0 success, 2 bad flags, 3 bad input data, 4 numeric failure.

namespace {

using namespace corrmap;

nlohmann::json section(const std::string& config_path, const char* key) {
  if (config_path.empty()) return nlohmann::json::object();
  const nlohmann::json j = io::load_json_file(config_path);
  return j.contains(key) ? j[key] : nlohmann::json::object();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dense surface correspondence toolkit"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path,
                 "JSON config file; sections gen/train/eval; flags override");

  // ---- gen-data ----
  auto* gen = app.add_subcommand("gen-data", "generate a synthetic dataset");
  cli::GenDataOptions go;
  bool gen_has_seed = false;
  gen->add_option("--out", go.out_dir, "output dataset directory")->required();
  gen->add_option("--mesh", go.mesh_obj, "template OBJ path");
  gen->add_option("--rig", go.mesh_rig, "rig sidecar JSON path");
  auto* gseq = gen->add_option("--sequences", go.gen.sequences, "sequence count");
  auto* gfr = gen->add_option("--frames", go.gen.frames_per_seq, "frames per sequence");
  auto* gsz = gen->add_option("--size", go.gen.image_size, "square image size");
  auto* gsd = gen->add_option("--seed", go.gen.seed, "master seed");
  auto* ger = gen->add_option("--erosion", go.gen.erosion_px, "init mask erosion px");
  auto* gng = gen->add_option("--noise-gap", go.gen.noise_gap,
                              "init noise radius in mean-edge units");
  auto* gan = gen->add_option("--annots", go.gen.annots_per_sample,
                              "sparse annotations per sample");
  auto* gtf = gen->add_option("--train-fraction", go.gen.train_fraction,
                              "identity split fraction");
  (void)gen_has_seed;

  // ---- train ----
  auto* tr = app.add_subcommand("train", "train or fine-tune a model");
  cli::TrainOptions to;
  tr->add_option("--dataset", to.dataset_dir, "dataset directory")->required();
  tr->add_option("--out", to.cfg.out_dir, "checkpoint/log directory")->required();
  auto* tph = tr->add_option("--phase", to.cfg.phase, "pretrain|finetune");
  auto* tfm = tr->add_option("--finetune-mode", to.cfg.finetune_mode, "sparse|dense");
  auto* tck = tr->add_option("--pretrain-checkpoint", to.cfg.pretrain_checkpoint,
                             "checkpoint to fine-tune from");
  auto* tst = tr->add_option("--steps", to.cfg.steps, "optimizer steps");
  auto* tlr = tr->add_option("--lr", to.cfg.lr, "learning rate");
  auto* tbs = tr->add_option("--batch", to.cfg.batch_size, "batch size");
  auto* tsd = tr->add_option("--seed", to.cfg.seed, "seed");

  // ---- eval ----
  auto* ev = app.add_subcommand("eval", "evaluate predictions on a dataset");
  cli::EvalOptions eo;
  ev->add_option("--dataset", eo.dataset_dir, "dataset directory")->required();
  ev->add_option("--checkpoint", eo.checkpoint, "model checkpoint");
  ev->add_option("--report", eo.report_path, "output report JSON path");
  ev->add_option("--plots", eo.plots_dir, "directory for PNG curves");
  ev->add_option("--mode", eo.mode, "model|oracle|init");
  ev->add_option("--split", eo.split, "train|test");
  ev->add_option("--windows", eo.windows, "pixel-accuracy windows");
  ev->add_option("--intervals", eo.intervals, "temporal frame intervals");
  ev->add_option("--kappa", eo.kappa, "GPS bandwidth (sigma_geo units)");
  ev->add_option("--tau", eo.tau, "temporal tolerance (sigma_geo units)");
  ev->add_option("--gps-points", eo.gps_points, "GPS points when unannotated");

  // ---- predict ----
  auto* pr = app.add_subcommand("predict", "run one image through a checkpoint");
  cli::PredictOptions po;
  pr->add_option("--checkpoint", po.checkpoint)->required();
  pr->add_option("--image", po.image)->required();
  pr->add_option("--mask", po.mask)->required();
  pr->add_option("--init", po.init)->required();
  pr->add_option("--out", po.out)->required();

  // ---- viz ----
  auto* vz = app.add_subcommand("viz", "side-by-side rgb / GT / prediction panel");
  cli::VizOptions vo;
  vz->add_option("--sample", vo.sample_dir, "sample directory")->required();
  vz->add_option("--checkpoint", vo.checkpoint, "model checkpoint");
  vz->add_option("--pred", vo.pred_png, "existing prediction PNG");
  vz->add_option("--out", vo.out, "output PNG")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return cli::kExitBadFlags;
  }

  try {
    if (*gen) {
      const auto j = section(config_path, "gen");
      if (!gseq->count() && j.contains("sequences")) go.gen.sequences = j["sequences"];
      if (!gfr->count() && j.contains("frames_per_seq")) go.gen.frames_per_seq = j["frames_per_seq"];
      if (!gsz->count() && j.contains("image_size")) go.gen.image_size = j["image_size"];
      if (!gsd->count() && j.contains("seed")) go.gen.seed = j["seed"];
      if (!ger->count() && j.contains("erosion_px")) go.gen.erosion_px = j["erosion_px"];
      if (!gng->count() && j.contains("noise_gap")) go.gen.noise_gap = j["noise_gap"];
      if (!gan->count() && j.contains("annots_per_sample")) go.gen.annots_per_sample = j["annots_per_sample"];
      if (!gtf->count() && j.contains("train_fraction")) go.gen.train_fraction = j["train_fraction"];
      return cli::cmd_gen_data(go);
    }
    if (*tr) {
      nlohmann::json j = section(config_path, "train");
      if (!j.empty()) {
        train::TrainConfig base = train::TrainConfig::from_json(j);
        // CLI flags win over file keys.
        if (!tph->count()) to.cfg.phase = base.phase;
        if (!tfm->count()) to.cfg.finetune_mode = base.finetune_mode;
        if (!tck->count()) to.cfg.pretrain_checkpoint = base.pretrain_checkpoint;
        if (!tst->count()) to.cfg.steps = base.steps;
        if (!tlr->count()) to.cfg.lr = base.lr;
        if (!tbs->count()) to.cfg.batch_size = base.batch_size;
        if (!tsd->count()) to.cfg.seed = base.seed;
        to.cfg.loss = base.loss;
        to.cfg.model = base.model;
        to.cfg.warmup_fraction = base.warmup_fraction;
        to.cfg.checkpoint_every = base.checkpoint_every;
        to.cfg.densify_trust_radius = base.densify_trust_radius;
        to.cfg.p_upper_crop = base.p_upper_crop;
        to.cfg.p_multi_person = base.p_multi_person;
        to.cfg.p_rotate = base.p_rotate;
        to.cfg.p_hue_shift = base.p_hue_shift;
      }
      return cli::cmd_train(to);
    }
    if (*ev) return cli::cmd_eval(eo);
    if (*pr) return cli::cmd_predict(po);
    if (*vz) return cli::cmd_viz(vo);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kExitBadInput;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return cli::kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kExitBadInput;
  }
  return cli::kExitBadFlags;
}
