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

#ifndef SHOEBOX_STUDY_H_
#define SHOEBOX_STUDY_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "shoebox/json_io.h"
#include "shoebox/metrics.h"
#include "shoebox/orientation.h"
#include "shoebox/recovery.h"
#include "shoebox/rir.h"
#include "shoebox/scene.h"
#include "shoebox/sfw.h"

namespace shoebox {

struct ArraySpec {
  std::string name = "em32";
  double scale = 1.0;
};

struct StudyConfig {
  int n_rooms = 10;
  std::uint64_t seed = 0;
  double fs = 16000.0;
  double duration = 0.05;
  ArraySpec array;
  std::optional<double> psnr_db;
  SceneDistribution scenes;
  SfwConfig sfw;
  OrientationConfig orientation;
  RecoveryConfig recovery;
  // Feed the exact image sources up to this order instead of running SFW.
  bool oracle_cloud = false;
  int oracle_max_order = 2;
  std::vector<double> recall_thresholds_m = DefaultRecallThresholds();
  double absorption_threshold = kDefaultAbsorptionThreshold;
  double ser_cap_db = kDefaultSerCapDb;
  std::string output_dir = "shoebox_out";
  // Rooms processed concurrently; 0 uses every hardware thread.
  int workers = 0;

  void Validate() const;
  MicArray MakeArray() const;
};

// Fields absent from `j` keep the values already in `cfg`.
void ApplyJson(const Json& j, StudyConfig* cfg);
Json StudyConfigToJson(const StudyConfig& cfg);
StudyConfig StudyConfigFromJson(const Json& j);

// Counter-based per-room seed, independent of n_rooms.
std::uint64_t RoomSeed(std::uint64_t master_seed, int room_index);
std::string RoomId(int room_index);

// Ground truth and simulated RIRs of one room.
struct RoomSimulation {
  Scene scene;
  MultichannelRir clean;
  std::optional<MultichannelRir> noisy;
  const MultichannelRir& input() const { return noisy ? *noisy : clean; }
};
RoomSimulation SimulateRoom(const StudyConfig& cfg, int room_index);

struct InversionResult {
  ImageSourceCloud cloud;
  std::optional<RecoveredRoom> recovered;
  std::string failure;
  std::vector<std::string> flags;
  double lambda = 0.0;
  int sfw_iterations = 0;
  double final_certificate = 0.0;
  bool sfw_converged = true;
  RecoveryDiagnostics recovery_diagnostics;
  double runtime_s = 0.0;
};
// Cloud estimation (SFW, or the exact cloud in oracle mode), orientation and
// room recovery. Errors are captured in `failure`, never thrown.
InversionResult InvertRoom(const StudyConfig& cfg, const Scene& scene,
                           const MultichannelRir& input);

struct ExtrapolationResult {
  Placement placement;
  MultichannelRir truth;
  std::optional<MultichannelRir> estimate;
  MultichannelRir oracle;
  std::optional<double> ser_db;
  double oracle_ser_db = 0.0;
  std::string failure;
};
// New random placement in the true room; re-simulates it with the true and
// the recovered parameters.
ExtrapolationResult ExtrapolateRoom(const StudyConfig& cfg, int room_index,
                                    const Scene& scene,
                                    const RecoveredRoom* recovered);

// Evaluation record combining inversion and extrapolation outcomes.
RoomRecord MakeRoomRecord(const StudyConfig& cfg, int room_index,
                          const Scene& scene, const InversionResult& inversion,
                          const ExtrapolationResult* extrapolation);

// Runs the in-memory pipeline on every room and aggregates.
EvalReport RunStudyInMemory(const StudyConfig& cfg);

// File-based stages. Each returns the number of rooms that hard-failed.
int CmdSimulate(const StudyConfig& cfg);
int CmdInvert(const StudyConfig& cfg);
int CmdExtrapolate(const StudyConfig& cfg);
int CmdEvaluate(const StudyConfig& cfg);
int CmdPlot(const StudyConfig& cfg);
int CmdAll(const StudyConfig& cfg);

// Per-room output directory.
std::string RoomDir(const StudyConfig& cfg, int room_index);

}  // namespace shoebox

#endif  // SHOEBOX_STUDY_H_
