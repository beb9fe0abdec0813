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

#ifndef SHOEBOX_METRICS_H_
#define SHOEBOX_METRICS_H_

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "shoebox/basis.h"
#include "shoebox/json_io.h"
#include "shoebox/recovered_room.h"
#include "shoebox/rir.h"
#include "shoebox/scene.h"

namespace shoebox {

inline constexpr double kDefaultSerCapDb = 300.0;
inline constexpr double kDefaultAbsorptionThreshold = 0.3;

struct AxisMatch {
  // Recovered axis i corresponds to ground-truth axis permutation[i] with
  // orientation signs[i] (+1 or -1).
  std::array<int, 3> permutation{0, 1, 2};
  std::array<int, 3> signs{1, 1, 1};
  std::array<double, 3> errors_deg{};
};

// Expresses each recovered axis in the ground-truth room frame and assigns it
// to its largest-magnitude component. Throws MatchingError when two axes land
// on the same ground-truth axis.
AxisMatch MatchAxes(const Basis& recovered, const Rotation& gt_rotation);

// Recovered per-wall values reordered into ground-truth wall order.
std::array<double, 6> MatchWalls(const AxisMatch& match,
                                 const std::array<double, 6>& recovered);
// Recovered per-axis values reordered into ground-truth axis order.
Vec3 MatchDims(const AxisMatch& match, const Vec3& recovered);

struct AbsorptionScore {
  std::array<double, 6> errors{};
  std::array<bool, 6> recalled{};
  double mae = 0.0;  // over recalled walls; 0 when none
  double recall = 0.0;
};

// A wall is recalled when |estimate - truth| < threshold.
AbsorptionScore AbsorptionMetrics(const std::array<double, 6>& estimated,
                                  const std::array<double, 6>& truth,
                                  double threshold = kDefaultAbsorptionThreshold);

// Error energies at or below this fraction of the signal energy are treated
// as floating-point round-off and reported at the cap.
inline constexpr double kSerRoundoffFloor = 1e-24;

// 10 log10(sum x^2 / sum (x_hat - x)^2), capped at `cap_db`. Throws
// ValidationError on shape or sampling-rate mismatch.
double Ser(const MultichannelRir& estimate, const MultichannelRir& reference,
           double cap_db = kDefaultSerCapDb);

// Fraction of errors <= t for each threshold t.
std::vector<double> RecallCurve(const std::vector<double>& errors,
                                const std::vector<double>& thresholds);

struct RoomRecord {
  std::string room_id;
  bool ok = false;
  std::string failure;             // set when the room hard-failed
  std::vector<std::string> flags;  // soft warnings
  std::array<double, 3> axis_errors_deg{};
  std::array<double, 3> dim_errors_m{};
  double center_error_m = 0.0;
  std::array<double, 6> absorption_errors{};
  std::array<bool, 6> absorption_recalled{};
  std::optional<double> ser_db;
  std::optional<double> oracle_ser_db;
  int num_spikes = 0;
};

// Metrics of a recovered room against its ground truth. Throws MatchingError
// when the axes cannot be matched.
RoomRecord EvaluateRoom(const RecoveredRoom& recovered, const Scene& truth,
                        double absorption_threshold = kDefaultAbsorptionThreshold);

struct Summary {
  double mean = 0.0;
  double std = 0.0;
  double median = 0.0;
  int count = 0;
};
Summary Summarize(std::vector<double> values);

struct EvalReport {
  std::vector<RoomRecord> rooms;
  std::vector<double> thresholds_m;
  double absorption_threshold = kDefaultAbsorptionThreshold;

  int num_failed = 0;
  Summary axis_error_deg;
  Summary dim_error_m;
  Summary center_error_m;
  // Over recalled walls of evaluated rooms.
  Summary absorption_error;
  // Recalled walls over all walls of all rooms (failed rooms count as misses).
  double absorption_recall = 0.0;
  Summary ser_db;
  Summary oracle_ser_db;
  // Dimension recall vs threshold over all rooms (failed rooms count as
  // misses).
  std::vector<double> dim_recall;
};

// Aggregates per-room records; the result does not depend on room order.
EvalReport Aggregate(std::vector<RoomRecord> rooms,
                     const std::vector<double>& thresholds_m,
                     double absorption_threshold = kDefaultAbsorptionThreshold);

std::vector<double> DefaultRecallThresholds();

Json ReportToJson(const EvalReport& report);
// One row per room with a fixed column order.
std::string ReportToCsv(const EvalReport& report);
Json RoomRecordToJson(const RoomRecord& record);
RoomRecord RoomRecordFromJson(const Json& j);

}  // namespace shoebox

#endif  // SHOEBOX_METRICS_H_
