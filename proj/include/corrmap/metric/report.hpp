#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "corrmap/metric/metrics.hpp"

namespace corrmap::metric {

struct MetricReport {
  std::map<int, double> pixel_accuracy;             // window px -> percent
  std::vector<std::optional<double>> gps_instances; // nullopt = no prediction
  double gps_mean = 0;
  ApAr apar;
  std::map<int, double> temporal;                   // frame interval -> percent
  double kappa_normalized = 0;
  double tau_normalized = 0;

  nlohmann::json to_json() const;
};

void write_report(const std::string& path, const MetricReport& r);

// accuracy_vs_window.png and (when temporal data exists)
// consistency_vs_interval.png under `dir`.
void write_report_plots(const std::string& dir, const MetricReport& r);

}  // namespace corrmap::metric
