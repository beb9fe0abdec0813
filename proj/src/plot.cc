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

#include "shoebox/plot.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <sstream>

#include "shoebox/errors.h"
#include "shoebox/json_io.h"

namespace shoebox {
namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;
const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                               "#9467bd"};

std::string Escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string Num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

std::string Header(const std::string& title) {
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
    << "\" height=\"" << kHeight << "\" font-family=\"sans-serif\" "
    << "font-size=\"12\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" "
    << "font-size=\"14\">" << Escape(title) << "</text>\n";
  return s.str();
}

struct Frame {
  double x0, x1, y0, y1;
  double Px(double x) const {
    return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight);
  }
  double Py(double y) const {
    return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom);
  }
};

std::string Axes(const Frame& f, const std::string& x_label,
                 const std::string& y_label) {
  std::ostringstream s;
  s << "<line x1=\"" << kLeft << "\" y1=\"" << kHeight - kBottom << "\" x2=\""
    << kWidth - kRight << "\" y2=\"" << kHeight - kBottom
    << "\" stroke=\"black\"/>\n"
    << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft
    << "\" y2=\"" << kHeight - kBottom << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double y = f.y0 + (f.y1 - f.y0) * i / 4.0;
    s << "<text x=\"" << kLeft - 6 << "\" y=\"" << f.Py(y) + 4
      << "\" text-anchor=\"end\">" << Num(y) << "</text>\n";
  }
  s << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 12
    << "\" text-anchor=\"middle\">" << Escape(x_label) << "</text>\n"
    << "<text x=\"16\" y=\"" << kHeight / 2
    << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << kHeight / 2
    << ")\">" << Escape(y_label) << "</text>\n";
  return s.str();
}

void WriteCsv(const std::string& path, const std::string& header,
              const std::vector<std::vector<std::string>>& rows) {
  std::ostringstream s;
  s << header << '\n';
  for (const auto& row : rows) {
    for (size_t i = 0; i < row.size(); ++i) s << (i ? "," : "") << row[i];
    s << '\n';
  }
  WriteTextFile(path, s.str());
}

std::string Full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string PathIn(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

}  // namespace

std::string BarChartSvg(const std::string& title,
                        const std::vector<std::string>& labels,
                        const std::vector<double>& values,
                        const std::string& y_label) {
  if (labels.size() != values.size()) {
    throw ValidationError("bar chart labels and values differ in length");
  }
  double top = 0.0;
  for (double v : values) {
    if (std::isfinite(v)) top = std::max(top, v);
  }
  if (!(top > 0.0)) top = 1.0;
  const Frame f{0.0, std::max<double>(1.0, values.size()), 0.0, top * 1.1};
  std::ostringstream s;
  s << Header(title) << Axes(f, "", y_label);
  const double slot = (f.Px(1.0) - f.Px(0.0));
  for (size_t i = 0; i < values.size(); ++i) {
    const double v = std::isfinite(values[i]) ? values[i] : 0.0;
    const double x = f.Px(static_cast<double>(i)) + 0.15 * slot;
    s << "<rect x=\"" << x << "\" y=\"" << f.Py(v) << "\" width=\""
      << 0.7 * slot << "\" height=\"" << f.Py(0.0) - f.Py(v) << "\" fill=\""
      << kColors[0] << "\"/>\n"
      << "<text x=\"" << x + 0.35 * slot << "\" y=\"" << kHeight - kBottom + 14
      << "\" text-anchor=\"middle\" font-size=\"10\">" << Escape(labels[i])
      << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

std::string LineChartSvg(const std::string& title,
                         const std::vector<Series>& series,
                         const std::string& x_label, const std::string& y_label,
                         const std::string& note) {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0;
  double y0 = x0, y1 = -x0;
  for (const Series& sr : series) {
    if (sr.x.size() != sr.y.size()) {
      throw ValidationError("series x and y differ in length");
    }
    for (size_t i = 0; i < sr.x.size(); ++i) {
      x0 = std::min(x0, sr.x[i]);
      x1 = std::max(x1, sr.x[i]);
      y0 = std::min(y0, sr.y[i]);
      y1 = std::max(y1, sr.y[i]);
    }
  }
  if (!std::isfinite(x0)) x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
  if (x1 <= x0) x1 = x0 + 1.0;
  if (y1 <= y0) y1 = y0 + 1.0;
  const double pad = 0.05 * (y1 - y0);
  const Frame f{x0, x1, y0 - pad, y1 + pad};
  std::ostringstream s;
  s << Header(title) << Axes(f, x_label, y_label);
  for (int i = 0; i <= 4; ++i) {
    const double x = x0 + (x1 - x0) * i / 4.0;
    s << "<text x=\"" << f.Px(x) << "\" y=\"" << kHeight - kBottom + 16
      << "\" text-anchor=\"middle\">" << Num(x) << "</text>\n";
  }
  for (size_t k = 0; k < series.size(); ++k) {
    const char* color = kColors[k % 5];
    s << "<polyline fill=\"none\" stroke=\"" << color
      << "\" stroke-width=\"1.2\" points=\"";
    for (size_t i = 0; i < series[k].x.size(); ++i) {
      s << f.Px(series[k].x[i]) << ',' << f.Py(series[k].y[i]) << ' ';
    }
    s << "\"/>\n"
      << "<text x=\"" << kWidth - kRight - 8 << "\" y=\"" << kTop + 14 * (k + 1)
      << "\" text-anchor=\"end\" fill=\"" << color << "\">"
      << Escape(series[k].name) << "</text>\n";
  }
  if (!note.empty()) {
    s << "<text x=\"" << kLeft + 8 << "\" y=\"" << kTop + 14 << "\">"
      << Escape(note) << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

void WriteReportPlots(const EvalReport& report, const std::string& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::string> labels;
  std::vector<double> dims, axes, centers, absorption, ser;
  std::vector<std::vector<std::string>> rows;
  for (const RoomRecord& r : report.rooms) {
    labels.push_back(r.room_id);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    double d = nan, a = nan, c = nan, ab = nan;
    if (r.ok) {
      d = (r.dim_errors_m[0] + r.dim_errors_m[1] + r.dim_errors_m[2]) / 3.0;
      a = (r.axis_errors_deg[0] + r.axis_errors_deg[1] + r.axis_errors_deg[2]) / 3.0;
      c = r.center_error_m;
      double sum = 0.0;
      for (double e : r.absorption_errors) sum += e;
      ab = sum / 6.0;
    }
    dims.push_back(d);
    axes.push_back(a);
    centers.push_back(c);
    absorption.push_back(ab);
    ser.push_back(r.ser_db ? *r.ser_db : nan);
    rows.push_back({r.room_id, r.ok ? "1" : "0", Full(d), Full(a), Full(c),
                    Full(ab), Full(ser.back())});
  }
  WriteCsv(PathIn(dir, "room_errors.csv"),
           "room_id,ok,dims_mae_m,axis_error_deg,center_error_m,"
           "absorption_mae,ser_db",
           rows);
  WriteTextFile(PathIn(dir, "dims_error.svg"),
                BarChartSvg("Mean room dimension error", labels, dims, "m"));
  WriteTextFile(PathIn(dir, "axis_error.svg"),
                BarChartSvg("Mean axis angular error", labels, axes, "deg"));
  WriteTextFile(PathIn(dir, "center_error.svg"),
                BarChartSvg("Room center error", labels, centers, "m"));
  WriteTextFile(PathIn(dir, "absorption_error.svg"),
                BarChartSvg("Mean absorption error", labels, absorption, "abs"));
  WriteTextFile(PathIn(dir, "ser.svg"),
                BarChartSvg("Extrapolation SER", labels, ser, "dB"));

  std::vector<std::vector<std::string>> curve;
  for (size_t i = 0; i < report.thresholds_m.size(); ++i) {
    curve.push_back({Full(report.thresholds_m[i]), Full(report.dim_recall[i])});
  }
  WriteCsv(PathIn(dir, "dim_recall.csv"), "threshold_m,recall", curve);
  WriteTextFile(PathIn(dir, "dim_recall.svg"),
                LineChartSvg("Room dimension recall vs threshold",
                             {Series{"recall", report.thresholds_m,
                                     report.dim_recall}},
                             "threshold (m)", "recall"));
}

double WriteRirOverlay(const MultichannelRir& reference,
                       const MultichannelRir& estimate, int channel,
                       const std::string& title, const std::string& base_path) {
  if (reference.samples.rows() != estimate.samples.rows() ||
      reference.samples.cols() != estimate.samples.cols()) {
    throw ValidationError("overlay inputs differ in shape");
  }
  if (channel < 0 || channel >= reference.channels()) {
    throw ValidationError("overlay channel out of range");
  }
  Series ref{"true", {}, {}}, est{"estimate", {}, {}};
  std::vector<std::vector<std::string>> rows;
  double max_diff = 0.0;
  for (int n = 0; n < reference.length(); ++n) {
    const double t = 1e3 * n / reference.fs;
    const double a = reference.samples(channel, n);
    const double b = estimate.samples(channel, n);
    ref.x.push_back(t);
    ref.y.push_back(a);
    est.x.push_back(t);
    est.y.push_back(b);
    max_diff = std::max(max_diff, std::abs(a - b));
    rows.push_back({std::to_string(n), Full(t), Full(a), Full(b)});
  }
  WriteCsv(base_path + ".csv", "sample,time_ms,true,estimate", rows);
  WriteTextFile(base_path + ".svg",
                LineChartSvg(title, {ref, est}, "time (ms)", "amplitude",
                             "max |difference| = " + Num(max_diff)));
  return max_diff;
}

}  // namespace shoebox
