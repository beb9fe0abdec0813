/*
Copyright 2026 The Shoebox Inversion Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS-IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

#ifndef SHOEBOX_PLOT_H_
#define SHOEBOX_PLOT_H_

#include <string>
#include <vector>

#include "shoebox/metrics.h"
#include "shoebox/rir.h"

namespace shoebox {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

// Minimal standalone SVG charts.
std::string BarChartSvg(const std::string& title,
                        const std::vector<std::string>& labels,
                        const std::vector<double>& values,
                        const std::string& y_label);
std::string LineChartSvg(const std::string& title,
                         const std::vector<Series>& series,
                         const std::string& x_label, const std::string& y_label,
                         const std::string& note = "");

// Per-room error bar charts and the dimension recall curve, each as SVG plus
// CSV, under `dir`.
void WriteReportPlots(const EvalReport& report, const std::string& dir);

// One channel of two RIRs overlaid; the CSV holds both traces. Returns the
// max absolute difference, which is also printed on the figure.
double WriteRirOverlay(const MultichannelRir& reference,
                       const MultichannelRir& estimate, int channel,
                       const std::string& title, const std::string& base_path);

}  // namespace shoebox

#endif  // SHOEBOX_PLOT_H_
