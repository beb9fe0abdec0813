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

#include "shoebox/image_sources.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <set>
#include <tuple>

#include "shoebox/errors.h"

namespace shoebox {
namespace {

struct AxisTerm {
  int q;
  int eps;
  int count;
};

std::vector<AxisTerm> AxisTerms(int max_order) {
  std::vector<AxisTerm> terms;
  for (int q = -max_order; q <= max_order; ++q) {
    for (int eps : {-1, 1}) {
      const int p = (1 - eps) / 2;
      const int count = std::abs(q - p) + std::abs(q);
      if (count <= max_order) terms.push_back({q, eps, count});
    }
  }
  return terms;
}

}  // namespace

int LatticeIndex::NearCount(int axis) const {
  const int p = (1 - eps[axis]) / 2;
  return std::abs(q[axis] - p);
}

int LatticeIndex::FarCount(int axis) const { return std::abs(q[axis]); }

int LatticeIndex::Order() const {
  int order = 0;
  for (int i = 0; i < 3; ++i) order += NearCount(i) + FarCount(i);
  return order;
}

void ImageSourceCloud::Validate() const {
  std::set<std::tuple<int, int, int, int, int, int>> seen;
  for (const ImageSource& s : sources) {
    if (!IsFinite(s.position)) throw ValidationError("non-finite source position");
    if (!(s.amplitude > 0.0)) throw ValidationError("amplitudes must be positive");
    if (s.lattice) {
      const auto& l = *s.lattice;
      if (!seen.emplace(l.q[0], l.q[1], l.q[2], l.eps[0], l.eps[1], l.eps[2])
               .second) {
        throw ValidationError("two image sources share a lattice index");
      }
    }
  }
}

Vec3 LatticePosition(const LatticeIndex& index, const Vec3& source_room,
                     const Vec3& dims) {
  Vec3 r;
  for (int i = 0; i < 3; ++i) {
    r[i] = index.eps[i] * source_room[i] + 2.0 * index.q[i] * dims[i];
  }
  return r;
}

double LatticeAmplitude(const LatticeIndex& index, const WallSet& walls) {
  double a = 1.0;
  for (int i = 0; i < 3; ++i) {
    a *= std::pow(walls.reflection(i, false), index.NearCount(i)) *
         std::pow(walls.reflection(i, true), index.FarCount(i));
  }
  return a;
}

ImageSourceCloud EnumerateImageSources(const Scene& scene, int max_order,
                                       double max_radius) {
  scene.Validate(Scene::Checks::kPhysical);
  if (max_order < 0) throw ValidationError("max_order must be >= 0");
  if (!(max_radius > 0.0)) throw ValidationError("max_radius must be > 0");

  const std::vector<AxisTerm> terms = AxisTerms(max_order);
  ImageSourceCloud cloud;
  for (const AxisTerm& tx : terms) {
    for (const AxisTerm& ty : terms) {
      if (tx.count + ty.count > max_order) continue;
      for (const AxisTerm& tz : terms) {
        if (tx.count + ty.count + tz.count > max_order) continue;
        LatticeIndex index{{tx.q, ty.q, tz.q}, {tx.eps, ty.eps, tz.eps}};
        const Vec3 room_pos =
            LatticePosition(index, scene.source_room, scene.room.dims);
        const Vec3 pos = scene.room.ToArrayFrame(room_pos);
        if (pos.norm() > max_radius) continue;
        cloud.sources.push_back({pos, LatticeAmplitude(index, scene.walls),
                                 index.Order(), index});
      }
    }
  }
  std::stable_sort(cloud.sources.begin(), cloud.sources.end(),
                   [](const ImageSource& a, const ImageSource& b) {
                     return *a.order < *b.order;
                   });
  return cloud;
}

}  // namespace shoebox
