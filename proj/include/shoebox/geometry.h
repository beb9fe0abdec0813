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

#ifndef SHOEBOX_GEOMETRY_H_
#define SHOEBOX_GEOMETRY_H_

#include <array>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace shoebox {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Speed of sound in m/s.
inline constexpr double kSpeedOfSound = 343.0;

bool IsFinite(const Vec3& v);

// Proper rotation. Columns are the room basis vectors expressed in the
// array frame.
class Rotation {
 public:
  Rotation() : matrix_(Mat3::Identity()) {}

  // Throws ValidationError unless R^T R = I and det R = +1 within `tol`.
  static Rotation FromMatrix(const Mat3& m, double tol = 1e-10);
  static Rotation FromQuaternion(const Eigen::Quaterniond& q);
  // Columns e1, e2 and e1 x e2.
  static Rotation FromColumns(const Vec3& e1, const Vec3& e2, const Vec3& e3,
                              double tol = 1e-10);

  const Mat3& matrix() const { return matrix_; }
  Vec3 column(int i) const { return matrix_.col(i); }
  Rotation Inverse() const;
  Vec3 operator*(const Vec3& v) const { return matrix_ * v; }
  Rotation operator*(const Rotation& other) const;

 private:
  explicit Rotation(const Mat3& m) : matrix_(m) {}
  Mat3 matrix_;
};

// Cuboid room posed in the array frame: a room-frame point p maps to
// corner_origin + pose * p.
struct RoomBox {
  Vec3 dims = Vec3::Ones();
  Rotation pose;
  Vec3 corner_origin = Vec3::Zero();

  void Validate() const;
  Vec3 ToArrayFrame(const Vec3& room_point) const;
  Vec3 ToRoomFrame(const Vec3& array_point) const;
  // Smallest distance from a room-frame point to any wall (negative outside).
  double WallClearance(const Vec3& room_point) const;
};

// Index of a wall: axis in {0,1,2}, `far` is the wall at coordinate L_axis,
// the near wall contains the corner origin.
inline constexpr int WallIndex(int axis, bool far) {
  return 2 * axis + (far ? 1 : 0);
}

// Absorption coefficients for the six walls, in WallIndex order.
class WallSet {
 public:
  WallSet() { absorption_.fill(0.0); }
  explicit WallSet(const std::array<double, 6>& absorption);
  static WallSet Uniform(double absorption);
  static WallSet FromReflection(const std::array<double, 6>& reflection);

  double absorption(int wall) const { return absorption_[wall]; }
  double absorption(int axis, bool far) const {
    return absorption_[WallIndex(axis, far)];
  }
  // sqrt(1 - alpha).
  double reflection(int wall) const;
  double reflection(int axis, bool far) const {
    return reflection(WallIndex(axis, far));
  }
  const std::array<double, 6>& absorptions() const { return absorption_; }

 private:
  std::array<double, 6> absorption_;
};

}  // namespace shoebox

#endif  // SHOEBOX_GEOMETRY_H_
