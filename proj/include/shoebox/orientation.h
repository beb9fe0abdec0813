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

#ifndef SHOEBOX_ORIENTATION_H_
#define SHOEBOX_ORIENTATION_H_

#include <string>
#include <vector>

#include "shoebox/basis.h"
#include "shoebox/image_sources.h"

namespace shoebox {

struct OrientationConfig {
  std::vector<double> sigma_schedule{0.01, 0.005, 0.0005};
  // Initialization points on the half-sphere and on the circle.
  int sphere_mesh_size = 2000;
  int circle_mesh_size = 720;
  // Best mesh points refined by local search.
  int num_starts = 16;
  int max_iterations = 200;
  // Angle step tolerance of the local search, radians.
  double angle_tolerance = 1e-10;

  void Validate() const;
};

// u(theta, phi) = (sin phi cos theta, sin phi sin theta, cos phi).
Vec3 SphericalDirection(double theta, double phi);

// Fibonacci lattice on the half-sphere z >= 0.
std::vector<Vec3> FibonacciHalfSphere(int n);
// Colatitude levels 0, ..., pi/2 crossed with evenly spaced azimuths
// (the pole appears once). Contains e1, e2 and e3 when n_azimuth % 4 == 0.
std::vector<Vec3> EquiangularHalfSphere(int n_colatitude, int n_azimuth);

// Pairwise orthogonality scores of a point cloud. Differences are normalized
// once at construction.
class OrthogonalityScore {
 public:
  explicit OrthogonalityScore(const std::vector<Vec3>& points);
  explicit OrthogonalityScore(const ImageSourceCloud& cloud);

  int num_points() const { return num_points_; }

  // J3: sum over ordered pairs of exp(-(u . w)^2 / (2 sigma^2)) with w the
  // normalized difference, plus 1 per point for the diagonal. `u` must be a
  // unit vector; the gradient is with respect to u in R^3.
  double J3(const Vec3& u, double sigma, Vec3* gradient = nullptr) const;
  // J3 at u(theta, phi) with the gradient in (theta, phi).
  double J3Angles(double theta, double phi, double sigma,
                  double* d_theta = nullptr, double* d_phi = nullptr) const;
  // Differences projected on the plane orthogonal to u_fixed, scored against
  // v(theta) = cos(theta) b1 + sin(theta) b2 with (b1, b2) = InPlaneBasis.
  // Differences within about 0.57 degrees of u_fixed (in-plane norm of the
  // unit difference <= 1e-2) contribute 1.
  double J2(const Vec3& u_fixed, double theta, double sigma,
            double* d_theta = nullptr) const;
  // Sigma -> 0 limit of J3: pairs with |u . w| <= tolerance count 1.
  long long CountJ3(const Vec3& u, double tolerance = 1e-12) const;
  // Sigma -> 0 limit of J2.
  long long CountJ2(const Vec3& u_fixed, double theta,
                    double tolerance = 1e-12) const;

 private:
  int num_points_;
  // Unit differences over unordered pairs s < p.
  std::vector<Vec3> unit_diffs_;
  // Pairs whose positions coincide; they score 1 in every direction.
  long long coincident_pairs_ = 0;
};

// Orthonormal (b1, b2) spanning the plane orthogonal to u; b1 x b2 = u.
void InPlaneBasis(const Vec3& u, Vec3* b1, Vec3* b2);

// Exact counting J3 maximized over an equiangular half-sphere mesh with about
// `mesh_size` points.
Vec3 BruteForceArgmaxJ3(const ImageSourceCloud& cloud, int mesh_size = 10000);

struct OrientationDiagnostics {
  // Start direction, refined direction and its J3 at the first sigma.
  std::vector<Vec3> starts;
  std::vector<Vec3> refined;
  std::vector<double> scores;
  int winner = -1;
  double e2_theta = 0.0;
};

// Room basis maximizing J3 then J2 under the annealing schedule. Throws
// DegenerateInputError if the cloud does not span three dimensions.
Basis EstimateOrientation(const ImageSourceCloud& cloud,
                          const OrientationConfig& cfg = {},
                          OrientationDiagnostics* diagnostics = nullptr);

// CSV rows theta,phi,score of J3 at `sigma` over the Fibonacci half-sphere.
void WriteJ3MeshCsv(const ImageSourceCloud& cloud, double sigma, int mesh_size,
                    const std::string& path);

}  // namespace shoebox

#endif  // SHOEBOX_ORIENTATION_H_
