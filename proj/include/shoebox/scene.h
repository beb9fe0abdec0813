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

#ifndef SHOEBOX_SCENE_H_
#define SHOEBOX_SCENE_H_

#include <cstdint>
#include <optional>

#include "shoebox/geometry.h"
#include "shoebox/mic_array.h"

namespace shoebox {

// Ground truth for one simulation: the 18 generating parameters plus the
// array. Everything is expressed in the array frame (array center at origin).
struct Scene {
  RoomBox room;
  WallSet walls;
  Vec3 source = Vec3::Zero();       // array frame
  Vec3 source_room = Vec3::Zero();  // room frame, distances to near walls
  MicArray array = MicArray::Em32();

  // kPhysical only requires the source and every microphone to be strictly
  // inside the room; kProtocol adds the separation and wall margins used for
  // randomized scenes.
  enum class Checks { kPhysical, kProtocol };

  // Builds a scene from room-frame source coordinates. Validates.
  static Scene Make(const RoomBox& room, const WallSet& walls,
                    const Vec3& source_room, MicArray array,
                    Checks checks = Checks::kProtocol);

  // Throws ValidationError when any invariant fails.
  void Validate(Checks checks = Checks::kProtocol) const;
};

// Minimum source to array-center distance, in meters.
inline constexpr double kMinSourceArrayDistance = 1.0;
// Minimum array-center to wall distance, in meters.
inline constexpr double kMinArrayWallDistance = 0.25;
// Minimum source to wall distance, in meters.
inline constexpr double kMinSourceWallDistance = 0.01;

struct SceneDistribution {
  Vec3 dims_min{2.0, 2.0, 2.0};
  Vec3 dims_max{10.0, 10.0, 5.0};
  double absorption_min = 0.01;
  double absorption_max = 0.3;
  // Sampling margin between the source and every wall, in meters. Must be at
  // least kMinSourceWallDistance.
  double source_wall_margin = 0.05;
  bool random_rotation = true;
  int max_attempts = 10000;

  void Validate() const;
};

Scene RandomScene(const SceneDistribution& cfg, std::uint64_t seed,
                  const MicArray& array = MicArray::Em32());

// Rigid pose of the array relative to the original array frame.
struct ArrayPose {
  Rotation orientation;
  Vec3 center = Vec3::Zero();
};

// A new source/array placement, both given in the original array frame.
struct Placement {
  Vec3 source = Vec3::Zero();
  ArrayPose array_pose;
};

// Re-expresses `scene` in the frame of an array moved to `placement`, with
// the source moved as well. Validates the result.
Scene PlaceInScene(const Scene& scene, const Placement& placement,
                   Scene::Checks checks = Scene::Checks::kProtocol);

// Draws a placement inside `scene.room` honoring the source/array/wall
// distance constraints and a uniformly random array orientation.
Placement RandomPlacement(const Scene& scene, std::uint64_t seed,
                          int max_attempts = 10000);

// Uniformly distributed rotation from a normalized Gaussian quaternion.
template <typename Rng>
Rotation RandomRotation(Rng& rng);

// splitmix64 finalizer; used to derive independent seeds.
std::uint64_t MixSeed(std::uint64_t seed, std::uint64_t stream);

}  // namespace shoebox

#include "shoebox/scene_inl.h"

#endif  // SHOEBOX_SCENE_H_
