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

#ifndef SHOEBOX_RECOVERY_H_
#define SHOEBOX_RECOVERY_H_

#include <array>
#include <numbers>
#include <optional>
#include <vector>

#include "shoebox/basis.h"
#include "shoebox/image_sources.h"
#include "shoebox/recovered_room.h"

namespace shoebox {

struct ConeSearchConfig {
  double initial_half_angle = 15.0 * std::numbers::pi / 180.0;
  double widen_factor = 1.5;
  double max_half_angle = std::numbers::pi / 2.0;

  void Validate() const;
};

struct RecoveryConfig {
  // Fusion radius in meters.
  double mu = 0.05;
  ConeSearchConfig cone;

  void Validate() const;
};

// Index of the source closest to the array center. Throws
// DegenerateInputError when two sources tie within 1e-9 m and ValidationError
// on an empty cloud.
int IdentifyTrueSource(const ImageSourceCloud& cloud);

struct FusedSource {
  ImageSource source;        // summed amplitude, weighted centroid
  std::vector<int> members;  // cloud indices, ascending
};

// Merges every member within `mu` of the candidate (the candidate included).
FusedSource Fuse(int candidate, const ImageSourceCloud& cloud, double mu);

struct ConeHit {
  int index = -1;
  double half_angle = 0.0;  // cone half-angle at which the hit was found
  int widenings = 0;
};

// Closest member of `cloud` inside the cone with apex `origin` around the
// unit `direction`, widening the cone until it is non-empty. Members flagged
// in `excluded` and members at the apex are skipped. Returns nullopt when
// even the widest cone is empty.
std::optional<ConeHit> ClosestInCone(const Vec3& origin, const Vec3& direction,
                                     const ImageSourceCloud& cloud,
                                     const ConeSearchConfig& cfg,
                                     const std::vector<bool>* excluded = nullptr);

struct RecoveryDiagnostics {
  int true_source_index = -1;
  std::vector<int> true_source_members;
  std::array<ConeHit, 6> hits{};
  std::array<int, 6> fused_members{};
};

// Source, first-order images, dimensions, translation and absorptions from
// a cloud and an estimated basis. Throws MissingReflectionError naming the
// wall whose cone stays empty and InconsistentBasisError on a non-positive
// length.
RecoveredRoom RecoverRoom(const ImageSourceCloud& cloud, const Basis& basis,
                          const RecoveryConfig& cfg = {},
                          RecoveryDiagnostics* diagnostics = nullptr);

// Array-frame position of the room-frame point dims / 2.
Vec3 RoomCenterInArrayFrame(const RecoveredRoom& recovered);

}  // namespace shoebox

#endif  // SHOEBOX_RECOVERY_H_
