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

#ifndef SHOEBOX_BASIS_H_
#define SHOEBOX_BASIS_H_

#include "shoebox/geometry.h"

namespace shoebox {

// Estimated room basis; e3 = e1 x e2 by construction.
struct Basis {
  Vec3 e1 = Vec3::UnitX();
  Vec3 e2 = Vec3::UnitY();
  Vec3 e3 = Vec3::UnitZ();

  // Normalizes e1, projects the e1 component out of e2, renormalizes it and
  // sets e3 = e1 x e2. Throws DegenerateInputError if e2 is parallel to e1.
  static Basis FromTwo(const Vec3& e1, const Vec3& e2);
  static Basis FromRotation(const Rotation& r);

  const Vec3& axis(int t) const { return t == 0 ? e1 : (t == 1 ? e2 : e3); }
  // Columns e1, e2, e3.
  Mat3 AsMatrix() const;
  // Max deviation of the Gram matrix from identity.
  double OrthonormalityError() const;
};

}  // namespace shoebox

#endif  // SHOEBOX_BASIS_H_
