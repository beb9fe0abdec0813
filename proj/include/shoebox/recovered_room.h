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

#ifndef SHOEBOX_RECOVERED_ROOM_H_
#define SHOEBOX_RECOVERED_ROOM_H_

#include <array>
#include <vector>

#include "shoebox/basis.h"
#include "shoebox/geometry.h"
#include "shoebox/image_sources.h"
#include "shoebox/scene.h"

namespace shoebox {

// Room parameters inferred from an image-source cloud. Wall t- of the
// estimated frame is the near wall (it contains the reference corner).
struct RecoveredRoom {
  Basis basis;
  Vec3 dims = Vec3::Ones();
  Vec3 translation = Vec3::Zero();  // source position in the room frame
  Vec3 source = Vec3::Zero();       // array frame
  std::array<double, 6> absorptions{};      // clamped to [0, 1]
  std::array<double, 6> raw_absorptions{};  // before clamping
  // Fused first-order images, WallIndex order.
  std::array<ImageSource, 6> first_order{};
  // Fused first-order amplitudes before normalization by the direct path.
  std::array<double, 6> raw_amplitudes{};
  double source_amplitude = 1.0;

  void Validate() const;
};

// [e1^T; e2^T; e3^T] (r - r0) + tau.
Vec3 ArrayToRoom(const Vec3& r, const RecoveredRoom& recovered);
// Exact inverse of ArrayToRoom.
Vec3 RoomToArray(const Vec3& r_room, const RecoveredRoom& recovered);

// Scene whose generating parameters are the recovered ones. Corner origin is
// r0 - R tau with R = [e1 e2 e3].
Scene SceneFromRecovered(const RecoveredRoom& recovered, const MicArray& array);

// The recovered-room view of a ground-truth scene (exact parameters).
RecoveredRoom RecoveredFromScene(const Scene& scene);

}  // namespace shoebox

#endif  // SHOEBOX_RECOVERED_ROOM_H_
