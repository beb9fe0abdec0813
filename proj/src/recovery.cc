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

#include "shoebox/recovery.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "shoebox/errors.h"

namespace shoebox {
namespace {

constexpr double kTieTolerance = 1e-9;

}  // namespace

void ConeSearchConfig::Validate() const {
  if (!(initial_half_angle > 0.0) || !(initial_half_angle <= max_half_angle) ||
      !(max_half_angle <= std::numbers::pi) || !(widen_factor > 1.0)) {
    throw ValidationError("invalid cone search settings");
  }
}

void RecoveryConfig::Validate() const {
  if (!(mu > 0.0)) throw ValidationError("fusion radius must be positive");
  cone.Validate();
}

int IdentifyTrueSource(const ImageSourceCloud& cloud) {
  if (cloud.empty()) throw ValidationError("empty source cloud");
  int best = 0;
  double best_norm = cloud[0].position.norm();
  for (int k = 1; k < cloud.size(); ++k) {
    const double n = cloud[k].position.norm();
    if (n < best_norm) {
      best = k;
      best_norm = n;
    }
  }
  for (int k = 0; k < cloud.size(); ++k) {
    if (k != best && cloud[k].position.norm() - best_norm <= kTieTolerance) {
      throw DegenerateInputError("ambiguous true source: two sources at " +
                                 std::to_string(best_norm) + " m");
    }
  }
  return best;
}

FusedSource Fuse(int candidate, const ImageSourceCloud& cloud, double mu) {
  if (!(mu > 0.0)) throw ValidationError("fusion radius must be positive");
  if (candidate < 0 || candidate >= cloud.size()) {
    throw ValidationError("fusion candidate out of range");
  }
  const Vec3& center = cloud[candidate].position;
  FusedSource out;
  double total = 0.0;
  Vec3 weighted = Vec3::Zero();
  for (int k = 0; k < cloud.size(); ++k) {
    if (k != candidate && (cloud[k].position - center).norm() > mu) continue;
    out.members.push_back(k);
    total += cloud[k].amplitude;
    weighted += cloud[k].amplitude * cloud[k].position;
  }
  out.source.amplitude = total;
  out.source.position = total > 0.0 && out.members.size() > 1
                            ? Vec3(weighted / total)
                            : center;
  return out;
}

std::optional<ConeHit> ClosestInCone(const Vec3& origin, const Vec3& direction,
                                     const ImageSourceCloud& cloud,
                                     const ConeSearchConfig& cfg,
                                     const std::vector<bool>* excluded) {
  cfg.Validate();
  const Vec3 dir = direction.normalized();
  double half = cfg.initial_half_angle;
  for (int widenings = 0;; ++widenings) {
    const double cos_half = std::cos(half);
    int best = -1;
    double best_dist = std::numeric_limits<double>::infinity();
    for (int k = 0; k < cloud.size(); ++k) {
      if (excluded && (*excluded)[k]) continue;
      const Vec3 d = cloud[k].position - origin;
      const double dist = d.norm();
      if (dist == 0.0) continue;
      if (d.dot(dir) < cos_half * dist) continue;
      if (dist < best_dist) {
        best = k;
        best_dist = dist;
      }
    }
    if (best >= 0) return ConeHit{best, half, widenings};
    if (half >= cfg.max_half_angle) return std::nullopt;
    half = std::min(half * cfg.widen_factor, cfg.max_half_angle);
  }
}

RecoveredRoom RecoverRoom(const ImageSourceCloud& cloud, const Basis& basis,
                          const RecoveryConfig& cfg,
                          RecoveryDiagnostics* diagnostics) {
  cfg.Validate();
  if (basis.OrthonormalityError() > 1e-9) {
    throw ValidationError("basis is not orthonormal");
  }
  const int true_index = IdentifyTrueSource(cloud);
  const FusedSource direct = Fuse(true_index, cloud, cfg.mu);
  std::vector<bool> excluded(cloud.size(), false);
  for (int k : direct.members) excluded[k] = true;

  RecoveredRoom out;
  out.basis = basis;
  out.source = direct.source.position;
  out.source_amplitude = direct.source.amplitude;
  if (!(out.source_amplitude > 0.0)) {
    throw DegenerateInputError("true source has no amplitude");
  }
  if (diagnostics) {
    diagnostics->true_source_index = true_index;
    diagnostics->true_source_members = direct.members;
  }
  for (int t = 0; t < 3; ++t) {
    const Vec3& e = basis.axis(t);
    for (int far = 0; far < 2; ++far) {
      const Vec3 dir = far ? e : Vec3(-e);
      const std::optional<ConeHit> hit =
          ClosestInCone(out.source, dir, cloud, cfg.cone, &excluded);
      if (!hit) throw MissingReflectionError(t, far == 1);
      const FusedSource fused = Fuse(hit->index, cloud, cfg.mu);
      const int w = WallIndex(t, far == 1);
      out.first_order[w] = fused.source;
      out.first_order[w].order = 1;
      out.raw_amplitudes[w] = fused.source.amplitude;
      const double a = fused.source.amplitude / out.source_amplitude;
      out.raw_absorptions[w] = 1.0 - a * a;
      out.absorptions[w] = std::clamp(out.raw_absorptions[w], 0.0, 1.0);
      if (diagnostics) {
        diagnostics->hits[w] = *hit;
        diagnostics->fused_members[w] = static_cast<int>(fused.members.size());
      }
    }
    const Vec3& near_image = out.first_order[WallIndex(t, false)].position;
    const Vec3& far_image = out.first_order[WallIndex(t, true)].position;
    out.dims[t] = e.dot(far_image - near_image) / 2.0;
    out.translation[t] = e.dot(out.source - near_image) / 2.0;
    if (!(out.dims[t] > 0.0)) {
      throw InconsistentBasisError("non-positive room length along axis " +
                                   std::to_string(t + 1));
    }
  }
  return out;
}

Vec3 RoomCenterInArrayFrame(const RecoveredRoom& recovered) {
  return RoomToArray(recovered.dims / 2.0, recovered);
}

}  // namespace shoebox
