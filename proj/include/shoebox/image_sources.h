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

#ifndef SHOEBOX_IMAGE_SOURCES_H_
#define SHOEBOX_IMAGE_SOURCES_H_

#include <array>
#include <optional>
#include <vector>

#include "shoebox/geometry.h"
#include "shoebox/scene.h"

namespace shoebox {

// Lattice label (q, eps) of an image source: room-frame position
// eps .* source_room + 2 q .* dims.
struct LatticeIndex {
  std::array<int, 3> q{0, 0, 0};
  std::array<int, 3> eps{1, 1, 1};

  bool operator==(const LatticeIndex&) const = default;

  // Number of bounces on the near (c_near) and far (c_far) wall of `axis`.
  int NearCount(int axis) const;
  int FarCount(int axis) const;
  int Order() const;
};

struct ImageSource {
  Vec3 position = Vec3::Zero();  // array frame
  double amplitude = 1.0;
  std::optional<int> order;
  std::optional<LatticeIndex> lattice;
};

// Weighted point set, always in the array frame.
struct ImageSourceCloud {
  std::vector<ImageSource> sources;

  int size() const { return static_cast<int>(sources.size()); }
  bool empty() const { return sources.empty(); }
  const ImageSource& operator[](int k) const { return sources[k]; }
  // Throws ValidationError on non-positive amplitudes or repeated labels.
  void Validate() const;
};

// Room-frame position of a lattice point.
Vec3 LatticePosition(const LatticeIndex& index, const Vec3& source_room,
                     const Vec3& dims);

// Reflection amplitude prod a_{i-}^{c_near} a_{i+}^{c_far}.
double LatticeAmplitude(const LatticeIndex& index, const WallSet& walls);

// Every image source with order <= max_order and distance to the array center
// <= max_radius. Output is sorted by (order, lattice index).
ImageSourceCloud EnumerateImageSources(const Scene& scene, int max_order,
                                       double max_radius);

}  // namespace shoebox

#endif  // SHOEBOX_IMAGE_SOURCES_H_
