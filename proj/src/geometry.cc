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

#include "shoebox/geometry.h"

#include <cmath>
#include <string>

#include "shoebox/errors.h"

namespace shoebox {

bool IsFinite(const Vec3& v) {
  return std::isfinite(v.x()) && std::isfinite(v.y()) && std::isfinite(v.z());
}

Rotation Rotation::FromMatrix(const Mat3& m, double tol) {
  if (!m.allFinite()) throw ValidationError("rotation has non-finite entries");
  const double ortho = (m.transpose() * m - Mat3::Identity()).cwiseAbs().maxCoeff();
  if (ortho > tol) {
    throw ValidationError("rotation is not orthonormal (deviation " +
                          std::to_string(ortho) + ")");
  }
  if (std::abs(m.determinant() - 1.0) > tol) {
    throw ValidationError("rotation has determinant != +1");
  }
  return Rotation(m);
}

Rotation Rotation::FromQuaternion(const Eigen::Quaterniond& q) {
  return Rotation(q.normalized().toRotationMatrix());
}

Rotation Rotation::FromColumns(const Vec3& e1, const Vec3& e2, const Vec3& e3,
                               double tol) {
  Mat3 m;
  m.col(0) = e1;
  m.col(1) = e2;
  m.col(2) = e3;
  return FromMatrix(m, tol);
}

Rotation Rotation::Inverse() const { return Rotation(matrix_.transpose()); }

Rotation Rotation::operator*(const Rotation& other) const {
  return Rotation(matrix_ * other.matrix_);
}

void RoomBox::Validate() const {
  if (!IsFinite(dims) || (dims.array() <= 0.0).any()) {
    throw ValidationError("room dimensions must be finite and positive");
  }
  if (!IsFinite(corner_origin)) {
    throw ValidationError("room corner origin must be finite");
  }
}

Vec3 RoomBox::ToArrayFrame(const Vec3& room_point) const {
  return corner_origin + pose.matrix() * room_point;
}

Vec3 RoomBox::ToRoomFrame(const Vec3& array_point) const {
  return pose.matrix().transpose() * (array_point - corner_origin);
}

double RoomBox::WallClearance(const Vec3& p) const {
  double clearance = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 3; ++i) {
    clearance = std::min({clearance, p[i], dims[i] - p[i]});
  }
  return clearance;
}

WallSet::WallSet(const std::array<double, 6>& absorption)
    : absorption_(absorption) {
  for (double a : absorption_) {
    if (!(a >= 0.0 && a < 1.0)) {
      throw ValidationError("absorption coefficients must lie in [0, 1)");
    }
  }
}

WallSet WallSet::Uniform(double absorption) {
  std::array<double, 6> a;
  a.fill(absorption);
  return WallSet(a);
}

WallSet WallSet::FromReflection(const std::array<double, 6>& reflection) {
  std::array<double, 6> a;
  for (int w = 0; w < 6; ++w) a[w] = 1.0 - reflection[w] * reflection[w];
  return WallSet(a);
}

double WallSet::reflection(int wall) const {
  return std::sqrt(1.0 - absorption_[wall]);
}

}  // namespace shoebox
