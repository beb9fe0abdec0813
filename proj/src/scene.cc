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

#include "shoebox/scene.h"

#include <cmath>
#include <random>
#include <string>

#include "shoebox/errors.h"

namespace shoebox {
namespace {

Vec3 UniformInBox(std::mt19937_64& rng, const Vec3& lo, const Vec3& hi) {
  Vec3 p;
  for (int i = 0; i < 3; ++i) {
    std::uniform_real_distribution<double> u(lo[i], hi[i]);
    p[i] = u(rng);
  }
  return p;
}

bool MicsInside(const RoomBox& room, const MicArray& array,
                const Mat3& array_orientation, const Vec3& array_center) {
  for (const Vec3& p : array.positions()) {
    const Vec3 q = room.ToRoomFrame(array_center + array_orientation * p);
    if (room.WallClearance(q) <= 0.0) return false;
  }
  return true;
}

}  // namespace

Scene Scene::Make(const RoomBox& room, const WallSet& walls,
                  const Vec3& source_room, MicArray array, Checks checks) {
  Scene s{room, walls, room.ToArrayFrame(source_room), source_room,
          std::move(array)};
  s.Validate(checks);
  return s;
}

void Scene::Validate(Checks checks) const {
  room.Validate();
  if (!IsFinite(source) || !IsFinite(source_room)) {
    throw ValidationError("source position must be finite");
  }
  if ((room.ToArrayFrame(source_room) - source).norm() > 1e-9) {
    throw ValidationError("source and source_room disagree");
  }
  if (room.WallClearance(source_room) <= 0.0) {
    throw ValidationError("source must lie strictly inside the room");
  }
  if (!MicsInside(room, array, Mat3::Identity(), Vec3::Zero())) {
    throw ValidationError("every microphone must lie strictly inside the room");
  }
  for (const Vec3& p : array.positions()) {
    if ((p - source).norm() < 1e-6) {
      throw ValidationError("source coincides with a microphone");
    }
  }
  if (checks == Checks::kPhysical) return;
  if (room.WallClearance(source_room) < kMinSourceWallDistance) {
    throw ValidationError("source must be at least 1 cm inside the room");
  }
  if (source.norm() < kMinSourceArrayDistance) {
    throw ValidationError("source must be at least 1 m from the array center");
  }
  const Vec3 center_room = room.ToRoomFrame(Vec3::Zero());
  if (room.WallClearance(center_room) < kMinArrayWallDistance) {
    throw ValidationError("array center must be at least 25 cm from every wall");
  }
}

void SceneDistribution::Validate() const {
  for (int i = 0; i < 3; ++i) {
    if (!(dims_min[i] > 0.0 && dims_min[i] <= dims_max[i])) {
      throw ValidationError("invalid room dimension range");
    }
  }
  if (!(absorption_min >= 0.0 && absorption_min <= absorption_max &&
        absorption_max < 1.0)) {
    throw ValidationError("invalid absorption range");
  }
  if (!(source_wall_margin >= kMinSourceWallDistance)) {
    throw ValidationError("source_wall_margin below the scene minimum");
  }
  if (max_attempts < 1) throw ValidationError("max_attempts must be >= 1");
}

std::uint64_t MixSeed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Scene RandomScene(const SceneDistribution& cfg, std::uint64_t seed,
                  const MicArray& array) {
  cfg.Validate();
  std::mt19937_64 rng(seed);
  for (int attempt = 0; attempt < cfg.max_attempts; ++attempt) {
    RoomBox room;
    room.dims = UniformInBox(rng, cfg.dims_min, cfg.dims_max);
    room.pose = cfg.random_rotation ? RandomRotation(rng) : Rotation();
    std::array<double, 6> alpha;
    std::uniform_real_distribution<double> ua(cfg.absorption_min,
                                              cfg.absorption_max);
    for (double& a : alpha) a = ua(rng);

    const Vec3 margin_a = Vec3::Constant(kMinArrayWallDistance);
    const Vec3 margin_s = Vec3::Constant(cfg.source_wall_margin);
    if ((room.dims.array() <= 2.0 * margin_a.array()).any()) continue;
    const Vec3 center_room = UniformInBox(rng, margin_a, room.dims - margin_a);
    const Vec3 source_room = UniformInBox(rng, margin_s, room.dims - margin_s);
    if ((source_room - center_room).norm() < kMinSourceArrayDistance) continue;
    room.corner_origin = -(room.pose.matrix() * center_room);
    if (!MicsInside(room, array, Mat3::Identity(), Vec3::Zero())) continue;
    try {
      return Scene::Make(room, WallSet(alpha), source_room, array);
    } catch (const ValidationError&) {
      continue;
    }
  }
  throw GenerationError("could not draw a valid scene after " +
                        std::to_string(cfg.max_attempts) + " attempts");
}

Scene PlaceInScene(const Scene& scene, const Placement& placement,
                   Scene::Checks checks) {
  const Mat3& q = placement.array_pose.orientation.matrix();
  const Vec3& t = placement.array_pose.center;
  RoomBox room = scene.room;
  room.pose = Rotation::FromMatrix(q.transpose() * scene.room.pose.matrix(), 1e-9);
  room.corner_origin = q.transpose() * (scene.room.corner_origin - t);
  const Vec3 source_room = scene.room.ToRoomFrame(placement.source);
  return Scene::Make(room, scene.walls, source_room, scene.array, checks);
}

Placement RandomPlacement(const Scene& scene, std::uint64_t seed,
                          int max_attempts) {
  std::mt19937_64 rng(seed);
  const RoomBox& room = scene.room;
  const Vec3 margin_a = Vec3::Constant(kMinArrayWallDistance);
  const Vec3 margin_s = Vec3::Constant(kMinSourceWallDistance);
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    const Rotation q = RandomRotation(rng);
    const Vec3 center_room = UniformInBox(rng, margin_a, room.dims - margin_a);
    const Vec3 source_room = UniformInBox(rng, margin_s, room.dims - margin_s);
    if ((source_room - center_room).norm() < kMinSourceArrayDistance) continue;
    const Vec3 center = room.ToArrayFrame(center_room);
    if (!MicsInside(room, scene.array, q.matrix(), center)) continue;
    return Placement{room.ToArrayFrame(source_room), ArrayPose{q, center}};
  }
  throw GenerationError("could not draw a valid placement");
}

}  // namespace shoebox
