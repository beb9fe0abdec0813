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

#include <algorithm>
#include <cmath>

#include "shoebox/basis.h"
#include "shoebox/errors.h"
#include "shoebox/recovered_room.h"

namespace shoebox {

Basis Basis::FromTwo(const Vec3& e1, const Vec3& e2) {
  Basis b;
  b.e1 = e1.normalized();
  Vec3 v = e2 - b.e1.dot(e2) * b.e1;
  if (v.norm() < 1e-12) {
    throw DegenerateInputError("second axis is parallel to the first");
  }
  b.e2 = v.normalized();
  b.e3 = b.e1.cross(b.e2);
  return b;
}

Basis Basis::FromRotation(const Rotation& r) {
  return Basis{r.column(0), r.column(1), r.column(2)};
}

Mat3 Basis::AsMatrix() const {
  Mat3 m;
  m.col(0) = e1;
  m.col(1) = e2;
  m.col(2) = e3;
  return m;
}

double Basis::OrthonormalityError() const {
  const Mat3 m = AsMatrix();
  return (m.transpose() * m - Mat3::Identity()).cwiseAbs().maxCoeff();
}

void RecoveredRoom::Validate() const {
  if (basis.OrthonormalityError() > 1e-9) {
    throw ValidationError("recovered basis is not orthonormal");
  }
  if (!IsFinite(dims) || (dims.array() <= 0.0).any()) {
    throw ValidationError("recovered dimensions must be positive");
  }
  if (!IsFinite(translation) || !IsFinite(source)) {
    throw ValidationError("recovered translation/source must be finite");
  }
}

Vec3 ArrayToRoom(const Vec3& r, const RecoveredRoom& recovered) {
  if (recovered.basis.OrthonormalityError() > 1e-9) {
    throw ValidationError("recovered basis is not orthonormal");
  }
  return recovered.basis.AsMatrix().transpose() * (r - recovered.source) +
         recovered.translation;
}

Vec3 RoomToArray(const Vec3& r_room, const RecoveredRoom& recovered) {
  if (recovered.basis.OrthonormalityError() > 1e-9) {
    throw ValidationError("recovered basis is not orthonormal");
  }
  return recovered.basis.AsMatrix() * (r_room - recovered.translation) +
         recovered.source;
}

Scene SceneFromRecovered(const RecoveredRoom& recovered, const MicArray& array) {
  recovered.Validate();
  RoomBox room;
  room.dims = recovered.dims;
  room.pose = Rotation::FromMatrix(recovered.basis.AsMatrix(), 1e-9);
  room.corner_origin =
      recovered.source - room.pose.matrix() * recovered.translation;
  std::array<double, 6> alpha;
  for (int w = 0; w < 6; ++w) {
    alpha[w] = std::clamp(recovered.absorptions[w], 0.0, std::nextafter(1.0, 0.0));
  }
  return Scene::Make(room, WallSet(alpha), recovered.translation, array,
                     Scene::Checks::kPhysical);
}

RecoveredRoom RecoveredFromScene(const Scene& scene) {
  RecoveredRoom r;
  r.basis = Basis::FromRotation(scene.room.pose);
  r.dims = scene.room.dims;
  r.translation = scene.source_room;
  r.source = scene.source;
  r.absorptions = scene.walls.absorptions();
  r.raw_absorptions = r.absorptions;
  for (int w = 0; w < 6; ++w) r.raw_amplitudes[w] = scene.walls.reflection(w);
  return r;
}

}  // namespace shoebox
