#pragma once

#include <string>
#include <vector>

#include "corrmap/synth/generator.hpp"
#include "corrmap/train/trainer.hpp"

namespace corrmap::cli {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitBadFlags = 2;
inline constexpr int kExitBadInput = 3;
inline constexpr int kExitNumeric = 4;

struct GenDataOptions {
  synth::DataGenConfig gen;
  std::string out_dir;
  std::string mesh_obj = "assets/template_body.obj";
  std::string mesh_rig = "assets/template_body.rig.json";
};
int cmd_gen_data(const GenDataOptions& o);

struct TrainOptions {
  train::TrainConfig cfg;
  std::string dataset_dir;
};
int cmd_train(const TrainOptions& o);

struct EvalOptions {
  std::string checkpoint;        // unused for oracle/init modes
  std::string dataset_dir;
  std::string report_path;       // defaults to <dataset>/report.json
  std::string plots_dir;         // empty: no plots
  std::string mode = "model";    // model | oracle | init
  std::string split = "test";
  std::vector<int> windows = {5, 10, 20};
  std::vector<int> intervals = {1, 12};
  double kappa = 0.255;          // in sigma_geo units
  double tau = 0.05;             // temporal tolerance, sigma_geo units
  int gps_points = 100;          // annotation fallback sample count
};
int cmd_eval(const EvalOptions& o);

struct PredictOptions {
  std::string checkpoint, image, mask, init, out;
};
int cmd_predict(const PredictOptions& o);

struct VizOptions {
  std::string sample_dir;   // uses rgb/corr from the sample
  std::string checkpoint;   // model prediction panel when set
  std::string pred_png;     // or an existing prediction image
  std::string out;
};
int cmd_viz(const VizOptions& o);

}  // namespace corrmap::cli
