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

#include "shoebox/metrics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "shoebox/errors.h"
#include "shoebox/recovery.h"

namespace shoebox {
namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

template <size_t N>
Json ArrayToJson(const std::array<double, N>& a) {
  Json j = Json::array();
  for (double v : a) j.push_back(v);
  return j;
}

template <size_t N>
std::array<double, N> ArrayFromJson(const Json& j) {
  if (!j.is_array() || j.size() != N) {
    throw ValidationError("expected an array of " + std::to_string(N));
  }
  std::array<double, N> out{};
  for (size_t i = 0; i < N; ++i) out[i] = j[i].get<double>();
  return out;
}

Json SummaryToJson(const Summary& s) {
  return Json{{"mean", s.mean}, {"std", s.std}, {"median", s.median},
              {"count", s.count}};
}

}  // namespace

AxisMatch MatchAxes(const Basis& recovered, const Rotation& gt_rotation) {
  if (recovered.OrthonormalityError() > 1e-6) {
    throw ValidationError("recovered basis is not orthonormal");
  }
  const Mat3 inv = gt_rotation.matrix().transpose();
  AxisMatch match;
  std::array<bool, 3> used{false, false, false};
  for (int i = 0; i < 3; ++i) {
    const Vec3 v = inv * recovered.axis(i);
    int k = 0;
    v.cwiseAbs().maxCoeff(&k);
    if (used[k]) {
      throw MatchingError("recovered axes " + std::to_string(i + 1) +
                          " and another map to ground-truth axis " +
                          std::to_string(k + 1));
    }
    used[k] = true;
    match.permutation[i] = k;
    match.signs[i] = v[k] >= 0.0 ? 1 : -1;
    const double c = std::clamp(match.signs[i] * v[k] / v.norm(), -1.0, 1.0);
    match.errors_deg[i] = std::acos(c) * kRadToDeg;
  }
  return match;
}

std::array<double, 6> MatchWalls(const AxisMatch& match,
                                 const std::array<double, 6>& recovered) {
  std::array<double, 6> out{};
  for (int t = 0; t < 3; ++t) {
    const int k = match.permutation[t];
    for (int far = 0; far < 2; ++far) {
      // A flipped axis swaps the near and far walls.
      const bool gt_far = (far == 1) == (match.signs[t] > 0);
      out[WallIndex(k, gt_far)] = recovered[WallIndex(t, far == 1)];
    }
  }
  return out;
}

Vec3 MatchDims(const AxisMatch& match, const Vec3& recovered) {
  Vec3 out = Vec3::Zero();
  for (int t = 0; t < 3; ++t) out[match.permutation[t]] = recovered[t];
  return out;
}

AbsorptionScore AbsorptionMetrics(const std::array<double, 6>& estimated,
                                  const std::array<double, 6>& truth,
                                  double threshold) {
  AbsorptionScore score;
  int recalled = 0;
  double sum = 0.0;
  for (int w = 0; w < 6; ++w) {
    score.errors[w] = std::abs(estimated[w] - truth[w]);
    score.recalled[w] = score.errors[w] < threshold;
    if (score.recalled[w]) {
      ++recalled;
      sum += score.errors[w];
    }
  }
  score.recall = recalled / 6.0;
  score.mae = recalled > 0 ? sum / recalled : 0.0;
  return score;
}

double Ser(const MultichannelRir& estimate, const MultichannelRir& reference,
           double cap_db) {
  if (estimate.samples.rows() != reference.samples.rows() ||
      estimate.samples.cols() != reference.samples.cols()) {
    throw ValidationError("SER inputs differ in shape");
  }
  if (estimate.fs != reference.fs) {
    throw ValidationError("SER inputs differ in sampling rate");
  }
  const double signal = reference.samples.squaredNorm();
  const double error = (estimate.samples - reference.samples).squaredNorm();
  if (error <= std::numeric_limits<double>::min() ||
      error <= kSerRoundoffFloor * signal) {
    return cap_db;
  }
  if (signal == 0.0) return -cap_db;
  return std::min(cap_db, 10.0 * std::log10(signal / error));
}

std::vector<double> RecallCurve(const std::vector<double>& errors,
                                const std::vector<double>& thresholds) {
  std::vector<double> curve;
  curve.reserve(thresholds.size());
  for (double t : thresholds) {
    if (errors.empty()) {
      curve.push_back(0.0);
      continue;
    }
    const auto hits = std::count_if(errors.begin(), errors.end(),
                                    [t](double e) { return e <= t; });
    curve.push_back(static_cast<double>(hits) / errors.size());
  }
  return curve;
}

RoomRecord EvaluateRoom(const RecoveredRoom& recovered, const Scene& truth,
                        double absorption_threshold) {
  RoomRecord rec;
  const AxisMatch match = MatchAxes(recovered.basis, truth.room.pose);
  rec.axis_errors_deg = match.errors_deg;
  const Vec3 dims = MatchDims(match, recovered.dims);
  for (int i = 0; i < 3; ++i) {
    rec.dim_errors_m[i] = std::abs(dims[i] - truth.room.dims[i]);
  }
  const Vec3 gt_center = truth.room.ToArrayFrame(truth.room.dims / 2.0);
  rec.center_error_m = (RoomCenterInArrayFrame(recovered) - gt_center).norm();
  const AbsorptionScore abs = AbsorptionMetrics(
      MatchWalls(match, recovered.absorptions), truth.walls.absorptions(),
      absorption_threshold);
  rec.absorption_errors = abs.errors;
  rec.absorption_recalled = abs.recalled;
  rec.ok = true;
  return rec;
}

Summary Summarize(std::vector<double> values) {
  Summary s;
  s.count = static_cast<int>(values.size());
  if (values.empty()) return s;
  std::sort(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / values.size();
  double var = 0.0;
  for (double v : values) var += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(var / values.size());
  const size_t n = values.size();
  s.median = n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
  return s;
}

std::vector<double> DefaultRecallThresholds() {
  return {0.001, 0.002, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.5};
}

EvalReport Aggregate(std::vector<RoomRecord> rooms,
                     const std::vector<double>& thresholds_m,
                     double absorption_threshold) {
  std::sort(rooms.begin(), rooms.end(),
            [](const RoomRecord& a, const RoomRecord& b) {
              return a.room_id < b.room_id;
            });
  EvalReport report;
  report.thresholds_m = thresholds_m;
  report.absorption_threshold = absorption_threshold;
  std::vector<double> axis, dims, dims_all, center, absorption, ser, oracle;
  int walls_total = 0, walls_recalled = 0;
  for (const RoomRecord& r : rooms) {
    walls_total += 6;
    if (r.ser_db) ser.push_back(*r.ser_db);
    if (r.oracle_ser_db) oracle.push_back(*r.oracle_ser_db);
    if (!r.ok) {
      ++report.num_failed;
      for (int i = 0; i < 3; ++i) {
        dims_all.push_back(std::numeric_limits<double>::infinity());
      }
      continue;
    }
    axis.insert(axis.end(), r.axis_errors_deg.begin(), r.axis_errors_deg.end());
    dims.insert(dims.end(), r.dim_errors_m.begin(), r.dim_errors_m.end());
    dims_all.insert(dims_all.end(), r.dim_errors_m.begin(), r.dim_errors_m.end());
    center.push_back(r.center_error_m);
    for (int w = 0; w < 6; ++w) {
      if (r.absorption_recalled[w]) {
        ++walls_recalled;
        absorption.push_back(r.absorption_errors[w]);
      }
    }
  }
  report.axis_error_deg = Summarize(axis);
  report.dim_error_m = Summarize(dims);
  report.center_error_m = Summarize(center);
  report.absorption_error = Summarize(absorption);
  report.absorption_recall =
      walls_total > 0 ? static_cast<double>(walls_recalled) / walls_total : 0.0;
  report.ser_db = Summarize(ser);
  report.oracle_ser_db = Summarize(oracle);
  report.dim_recall = RecallCurve(dims_all, thresholds_m);
  report.rooms = std::move(rooms);
  return report;
}

Json RoomRecordToJson(const RoomRecord& r) {
  Json j;
  j["room_id"] = r.room_id;
  j["ok"] = r.ok;
  j["failure"] = r.failure;
  j["flags"] = r.flags;
  j["axis_angular_errors_deg"] = ArrayToJson(r.axis_errors_deg);
  j["dim_abs_errors_m"] = ArrayToJson(r.dim_errors_m);
  j["center_error_m"] = r.center_error_m;
  j["absorption_abs_errors"] = ArrayToJson(r.absorption_errors);
  Json flags = Json::array();
  for (bool b : r.absorption_recalled) flags.push_back(b);
  j["absorption_recall_flags"] = flags;
  j["ser_db"] = r.ser_db ? Json(*r.ser_db) : Json(nullptr);
  j["oracle_ser_db"] = r.oracle_ser_db ? Json(*r.oracle_ser_db) : Json(nullptr);
  j["num_spikes"] = r.num_spikes;
  return j;
}

RoomRecord RoomRecordFromJson(const Json& j) {
  RoomRecord r;
  r.room_id = j.at("room_id").get<std::string>();
  r.ok = j.at("ok").get<bool>();
  r.failure = j.at("failure").get<std::string>();
  r.flags = j.at("flags").get<std::vector<std::string>>();
  r.axis_errors_deg = ArrayFromJson<3>(j.at("axis_angular_errors_deg"));
  r.dim_errors_m = ArrayFromJson<3>(j.at("dim_abs_errors_m"));
  r.center_error_m = j.at("center_error_m").get<double>();
  r.absorption_errors = ArrayFromJson<6>(j.at("absorption_abs_errors"));
  const Json& flags = j.at("absorption_recall_flags");
  for (int w = 0; w < 6; ++w) r.absorption_recalled[w] = flags.at(w).get<bool>();
  if (!j.at("ser_db").is_null()) r.ser_db = j.at("ser_db").get<double>();
  if (!j.at("oracle_ser_db").is_null()) {
    r.oracle_ser_db = j.at("oracle_ser_db").get<double>();
  }
  r.num_spikes = j.at("num_spikes").get<int>();
  return r;
}

Json ReportToJson(const EvalReport& report) {
  Json j;
  j["num_rooms"] = report.rooms.size();
  j["num_failed"] = report.num_failed;
  j["absorption_threshold"] = report.absorption_threshold;
  Json agg;
  agg["axis_error_deg"] = SummaryToJson(report.axis_error_deg);
  agg["dim_error_m"] = SummaryToJson(report.dim_error_m);
  agg["center_error_m"] = SummaryToJson(report.center_error_m);
  agg["absorption_error"] = SummaryToJson(report.absorption_error);
  agg["absorption_recall"] = report.absorption_recall;
  agg["ser_db"] = SummaryToJson(report.ser_db);
  agg["oracle_ser_db"] = SummaryToJson(report.oracle_ser_db);
  agg["dim_recall"] = Json{{"thresholds_m", report.thresholds_m},
                           {"recall", report.dim_recall}};
  j["aggregate"] = agg;
  Json rooms = Json::array();
  for (const RoomRecord& r : report.rooms) rooms.push_back(RoomRecordToJson(r));
  j["rooms"] = rooms;
  return j;
}

std::string ReportToCsv(const EvalReport& report) {
  std::ostringstream out;
  out.precision(10);
  out << "room_id,ok,failure,axis_err1_deg,axis_err2_deg,axis_err3_deg,"
         "dim_err1_m,dim_err2_m,dim_err3_m,dims_mae_m,center_error_m";
  for (int w = 0; w < 6; ++w) out << ",abs_err" << w + 1;
  for (int w = 0; w < 6; ++w) out << ",abs_recalled" << w + 1;
  out << ",ser_db,oracle_ser_db,num_spikes\n";
  for (const RoomRecord& r : report.rooms) {
    std::string failure = r.failure;
    std::replace(failure.begin(), failure.end(), ',', ';');
    std::replace(failure.begin(), failure.end(), '\n', ' ');
    out << r.room_id << ',' << (r.ok ? 1 : 0) << ',' << failure;
    for (double v : r.axis_errors_deg) out << ',' << v;
    for (double v : r.dim_errors_m) out << ',' << v;
    out << ','
        << (r.dim_errors_m[0] + r.dim_errors_m[1] + r.dim_errors_m[2]) / 3.0;
    out << ',' << r.center_error_m;
    for (double v : r.absorption_errors) out << ',' << v;
    for (bool b : r.absorption_recalled) out << ',' << (b ? 1 : 0);
    out << ',';
    if (r.ser_db) out << *r.ser_db;
    out << ',';
    if (r.oracle_ser_db) out << *r.oracle_ser_db;
    out << ',' << r.num_spikes << '\n';
  }
  return out.str();
}

}  // namespace shoebox
