#include "corrmap/metric/report.hpp"

#include <filesystem>
#include <fstream>

#include <fmt/format.h>

#include "corrmap/core/error.hpp"
#include "corrmap/io/plot.hpp"
#include "corrmap/io/png_io.hpp"

namespace corrmap::metric {

using nlohmann::json;

json MetricReport::to_json() const {
  json j;
  json pa = json::object();
  for (const auto& [w, v] : pixel_accuracy) pa[fmt::format("{}", w)] = v;
  j["pixel_accuracy"] = pa;

  json gi = json::array();
  for (const auto& g : gps_instances) {
    if (g.has_value())
      gi.push_back(*g);
    else
      gi.push_back(nullptr);
  }
  j["gps"] = {{"per_instance", gi}, {"mean", gps_mean},
              {"kappa_normalized", kappa_normalized}};

  json per_t = json::object();
  for (size_t i = 0; i < apar.thresholds.size(); ++i)
    per_t[fmt::format("{:.2f}", apar.thresholds[i])] = {{"ap", apar.ap_t[i]},
                                                        {"ar", apar.ar_t[i]}};
  j["ap"] = apar.ap;
  j["ar"] = apar.ar;
  j["per_threshold"] = per_t;

  json tj = json::object();
  for (const auto& [k, v] : temporal) tj[fmt::format("{}", k)] = v;
  j["temporal"] = tj;
  j["tau_normalized"] = tau_normalized;
  return j;
}

void write_report(const std::string& path, const MetricReport& r) {
  std::ofstream out(path);
  if (!out) throw InputError(fmt::format("cannot write report: {}", path));
  out << r.to_json().dump(1) << "\n";
}

void write_report_plots(const std::string& dir, const MetricReport& r) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  if (!r.pixel_accuracy.empty()) {
    std::vector<double> xs, ys;
    for (const auto& [w, v] : r.pixel_accuracy) {
      xs.push_back(w);
      ys.push_back(v);
    }
    io::write_png((fs::path(dir) / "accuracy_vs_window.png").string(),
                  io::line_chart(xs, ys));
  }
  if (!r.temporal.empty()) {
    std::vector<double> xs, ys;
    for (const auto& [k, v] : r.temporal) {
      xs.push_back(k);
      ys.push_back(v);
    }
    io::write_png((fs::path(dir) / "consistency_vs_interval.png").string(),
                  io::line_chart(xs, ys));
  }
}

}  // namespace corrmap::metric
