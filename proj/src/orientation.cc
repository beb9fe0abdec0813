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

#include "shoebox/orientation.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>

#include <Eigen/SVD>

#include "shoebox/errors.h"
#include "shoebox/optim.h"
#include "shoebox/parallel.h"

namespace shoebox {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kCoincident = 1e-12;
// In-plane norm below which a projected unit difference counts as parallel.
constexpr double kParallel = 1e-2;

std::vector<Vec3> Positions(const ImageSourceCloud& cloud) {
  std::vector<Vec3> out;
  out.reserve(cloud.size());
  for (const ImageSource& s : cloud.sources) out.push_back(s.position);
  return out;
}

void CheckSpansSpace(const std::vector<Vec3>& points) {
  if (points.size() < 4) {
    throw DegenerateInputError("orientation needs at least 4 sources");
  }
  Vec3 mean = Vec3::Zero();
  for (const Vec3& p : points) mean += p;
  mean /= static_cast<double>(points.size());
  Eigen::MatrixXd centered(points.size(), 3);
  for (size_t i = 0; i < points.size(); ++i) {
    centered.row(i) = (points[i] - mean).transpose();
  }
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered);
  const Vec3 sv = svd.singularValues();
  if (!(sv[2] > 1e-9 * sv[0])) {
    throw DegenerateInputError("source cloud does not span three dimensions");
  }
}

// Orthonormal frame (center, t1, t2) used as a local spherical chart:
// u(theta, phi) = sin(phi) cos(theta) center + sin(phi) sin(theta) t1
//               + cos(phi) t2, so (0, pi/2) maps to center.
struct Chart {
  Vec3 center, t1, t2;

  explicit Chart(const Vec3& c) : center(c.normalized()) {
    InPlaneBasis(center, &t1, &t2);
  }
  Vec3 At(double theta, double phi) const {
    return std::sin(phi) * (std::cos(theta) * center + std::sin(theta) * t1) +
           std::cos(phi) * t2;
  }
  void Tangents(double theta, double phi, Vec3* d_theta, Vec3* d_phi) const {
    *d_theta =
        std::sin(phi) * (-std::sin(theta) * center + std::cos(theta) * t1);
    *d_phi = std::cos(phi) * (std::cos(theta) * center + std::sin(theta) * t1) -
             std::sin(phi) * t2;
  }
};

// Local maximization of J3 at one sigma, starting from `start`.
Vec3 RefineJ3(const OrthogonalityScore& score, const Vec3& start, double sigma,
              const OrientationConfig& cfg) {
  const Chart chart(start);
  const double norm = 1.0 / std::max(1.0, static_cast<double>(score.num_points()) *
                                              score.num_points());
  Objective f = [&](const Eigen::VectorXd& x, Eigen::VectorXd* grad) {
    const Vec3 u = chart.At(x[0], x[1]);
    Vec3 g;
    const double v = score.J3(u, sigma, grad ? &g : nullptr);
    if (grad) {
      Vec3 dt, dp;
      chart.Tangents(x[0], x[1], &dt, &dp);
      grad->resize(2);
      (*grad)[0] = -g.dot(dt) * norm;
      (*grad)[1] = -g.dot(dp) * norm;
    }
    return -v * norm;
  };
  MinimizeOptions opts;
  opts.max_iterations = cfg.max_iterations;
  opts.step_tolerance = cfg.angle_tolerance;
  opts.gradient_tolerance = 0.0;
  opts.max_step = std::max(10.0 * sigma, 1e-3);
  Eigen::VectorXd x0(2);
  x0 << 0.0, kPi / 2.0;
  const MinimizeResult res = MinimizeBfgs(f, x0, opts);
  return chart.At(res.x[0], res.x[1]).normalized();
}

double RefineJ2(const OrthogonalityScore& score, const Vec3& u, double theta0,
                double sigma, const OrientationConfig& cfg) {
  const double norm = 1.0 / std::max(1.0, static_cast<double>(score.num_points()) *
                                              score.num_points());
  Objective f = [&](const Eigen::VectorXd& x, Eigen::VectorXd* grad) {
    double d = 0.0;
    const double v = score.J2(u, x[0], sigma, grad ? &d : nullptr);
    if (grad) {
      grad->resize(1);
      (*grad)[0] = -d * norm;
    }
    return -v * norm;
  };
  MinimizeOptions opts;
  opts.max_iterations = cfg.max_iterations;
  opts.step_tolerance = cfg.angle_tolerance;
  opts.gradient_tolerance = 0.0;
  opts.max_step = std::max(10.0 * sigma, 1e-3);
  Eigen::VectorXd x0(1);
  x0[0] = theta0;
  return MinimizeBfgs(f, x0, opts).x[0];
}

// Indices of the `k` largest values, ties broken by index.
std::vector<int> TopK(const std::vector<double>& values, int k) {
  std::vector<int> idx(values.size());
  std::iota(idx.begin(), idx.end(), 0);
  k = std::min<int>(k, static_cast<int>(idx.size()));
  std::partial_sort(idx.begin(), idx.begin() + k, idx.end(), [&](int a, int b) {
    return values[a] > values[b] || (values[a] == values[b] && a < b);
  });
  idx.resize(k);
  return idx;
}

}  // namespace

void OrientationConfig::Validate() const {
  if (sigma_schedule.empty()) throw ValidationError("empty sigma schedule");
  for (size_t i = 0; i < sigma_schedule.size(); ++i) {
    if (!(sigma_schedule[i] > 0.0)) {
      throw ValidationError("sigma values must be positive");
    }
    if (i > 0 && !(sigma_schedule[i] < sigma_schedule[i - 1])) {
      throw ValidationError("sigma schedule must be strictly decreasing");
    }
  }
  if (sphere_mesh_size < 1 || circle_mesh_size < 1 || num_starts < 1 ||
      max_iterations < 1 || !(angle_tolerance > 0.0)) {
    throw ValidationError("invalid orientation search settings");
  }
}

Vec3 SphericalDirection(double theta, double phi) {
  return {std::sin(phi) * std::cos(theta), std::sin(phi) * std::sin(theta),
          std::cos(phi)};
}

std::vector<Vec3> FibonacciHalfSphere(int n) {
  if (n < 1) throw ValidationError("mesh size must be positive");
  std::vector<Vec3> out;
  out.reserve(n);
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n; ++i) {
    const double z = 1.0 - (i + 0.5) / n;
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    out.emplace_back(rho * std::cos(golden * i), rho * std::sin(golden * i), z);
  }
  return out;
}

std::vector<Vec3> EquiangularHalfSphere(int n_colatitude, int n_azimuth) {
  if (n_colatitude < 1 || n_azimuth < 1) {
    throw ValidationError("mesh size must be positive");
  }
  std::vector<Vec3> out;
  out.push_back(Vec3::UnitZ());
  for (int i = 1; i <= n_colatitude; ++i) {
    const double phi = (kPi / 2.0) * i / n_colatitude;
    for (int j = 0; j < n_azimuth; ++j) {
      // Quadrant azimuths are placed exactly so the axes are on the mesh.
      Vec3 u = SphericalDirection(2.0 * kPi * j / n_azimuth, phi);
      if (i == n_colatitude && (4 * j) % n_azimuth == 0) {
        const int q = 4 * j / n_azimuth;
        const double c[4] = {1.0, 0.0, -1.0, 0.0};
        const double s[4] = {0.0, 1.0, 0.0, -1.0};
        u = Vec3(c[q], s[q], 0.0);
      }
      out.push_back(u);
    }
  }
  return out;
}

void InPlaneBasis(const Vec3& u, Vec3* b1, Vec3* b2) {
  const Vec3 n = u.normalized();
  int k = 0;
  for (int i = 1; i < 3; ++i) {
    if (std::abs(n[i]) < std::abs(n[k])) k = i;
  }
  Vec3 helper = Vec3::Zero();
  helper[k] = 1.0;
  *b1 = (helper - helper.dot(n) * n).normalized();
  *b2 = n.cross(*b1);
}

OrthogonalityScore::OrthogonalityScore(const ImageSourceCloud& cloud)
    : OrthogonalityScore(Positions(cloud)) {}

OrthogonalityScore::OrthogonalityScore(const std::vector<Vec3>& points)
    : num_points_(static_cast<int>(points.size())) {
  for (size_t s = 0; s < points.size(); ++s) {
    for (size_t p = s + 1; p < points.size(); ++p) {
      const Vec3 d = points[s] - points[p];
      const double n = d.norm();
      if (n <= kCoincident) {
        ++coincident_pairs_;
      } else {
        unit_diffs_.push_back(d / n);
      }
    }
  }
}

double OrthogonalityScore::J3(const Vec3& u, double sigma,
                              Vec3* gradient) const {
  const double inv = 1.0 / (2.0 * sigma * sigma);
  double total = 0.0;
  Vec3 grad = Vec3::Zero();
  for (const Vec3& w : unit_diffs_) {
    const double c = u.dot(w);
    const double f = std::exp(-c * c * inv);
    total += f;
    if (gradient) grad += (-2.0 * c * inv * f) * w;
  }
  if (gradient) *gradient = 2.0 * grad;
  return 2.0 * (total + coincident_pairs_) + num_points_;
}

double OrthogonalityScore::J3Angles(double theta, double phi, double sigma,
                                    double* d_theta, double* d_phi) const {
  const Vec3 u = SphericalDirection(theta, phi);
  Vec3 g;
  const double v = J3(u, sigma, (d_theta || d_phi) ? &g : nullptr);
  if (d_theta) {
    *d_theta = g.dot(Vec3(-std::sin(phi) * std::sin(theta),
                          std::sin(phi) * std::cos(theta), 0.0));
  }
  if (d_phi) {
    *d_phi = g.dot(Vec3(std::cos(phi) * std::cos(theta),
                        std::cos(phi) * std::sin(theta), -std::sin(phi)));
  }
  return v;
}

double OrthogonalityScore::J2(const Vec3& u_fixed, double theta, double sigma,
                              double* d_theta) const {
  Vec3 b1, b2;
  InPlaneBasis(u_fixed, &b1, &b2);
  const double inv = 1.0 / (2.0 * sigma * sigma);
  const double ct = std::cos(theta), st = std::sin(theta);
  double total = static_cast<double>(coincident_pairs_);
  double deriv = 0.0;
  for (const Vec3& w : unit_diffs_) {
    const double x = w.dot(b1);
    const double y = w.dot(b2);
    const double n = std::hypot(x, y);
    if (n <= kParallel) {
      total += 1.0;
      continue;
    }
    const double c = (ct * x + st * y) / n;
    const double f = std::exp(-c * c * inv);
    total += f;
    if (d_theta) deriv += -2.0 * c * inv * f * (-st * x + ct * y) / n;
  }
  if (d_theta) *d_theta = 2.0 * deriv;
  return 2.0 * total + num_points_;
}

long long OrthogonalityScore::CountJ3(const Vec3& u, double tolerance) const {
  const Vec3 n = u.normalized();
  long long count = coincident_pairs_;
  for (const Vec3& w : unit_diffs_) {
    if (std::abs(n.dot(w)) <= tolerance) ++count;
  }
  return 2 * count + num_points_;
}

long long OrthogonalityScore::CountJ2(const Vec3& u_fixed, double theta,
                                      double tolerance) const {
  Vec3 b1, b2;
  InPlaneBasis(u_fixed, &b1, &b2);
  const Vec3 v = std::cos(theta) * b1 + std::sin(theta) * b2;
  long long count = coincident_pairs_;
  for (const Vec3& w : unit_diffs_) {
    const Vec3 proj = w - w.dot(u_fixed) * u_fixed;
    const double n = proj.norm();
    if (n <= kParallel || std::abs(v.dot(proj) / n) <= tolerance) ++count;
  }
  return 2 * count + num_points_;
}

Vec3 BruteForceArgmaxJ3(const ImageSourceCloud& cloud, int mesh_size) {
  if (mesh_size < 8) throw ValidationError("mesh size must be at least 8");
  // Azimuth count is a multiple of 8 with about 4x as many azimuths as
  // colatitude levels, so the mesh spacing is uniform in both angles.
  const int n_colat = std::max(1, static_cast<int>(std::lround(
                                      std::sqrt(mesh_size / 4.0))));
  const int n_az =
      std::max(8, static_cast<int>(8 * std::lround(mesh_size / (8.0 * n_colat))));
  const std::vector<Vec3> mesh = EquiangularHalfSphere(n_colat, n_az);
  const OrthogonalityScore score(cloud);
  std::vector<long long> counts(mesh.size());
  ParallelFor(static_cast<int>(mesh.size()),
              [&](int i) { counts[i] = score.CountJ3(mesh[i]); });
  const auto best = std::max_element(counts.begin(), counts.end());
  return mesh[best - counts.begin()];
}

Basis EstimateOrientation(const ImageSourceCloud& cloud,
                          const OrientationConfig& cfg,
                          OrientationDiagnostics* diagnostics) {
  cfg.Validate();
  const std::vector<Vec3> points = Positions(cloud);
  CheckSpansSpace(points);
  const OrthogonalityScore score(points);
  const double sigma0 = cfg.sigma_schedule.front();

  const std::vector<Vec3> mesh = FibonacciHalfSphere(cfg.sphere_mesh_size);
  std::vector<double> mesh_scores(mesh.size());
  ParallelFor(static_cast<int>(mesh.size()),
              [&](int i) { mesh_scores[i] = score.J3(mesh[i], sigma0); });
  const std::vector<int> starts = TopK(mesh_scores, cfg.num_starts);

  std::vector<Vec3> refined(starts.size());
  std::vector<double> refined_scores(starts.size());
  ParallelFor(static_cast<int>(starts.size()), [&](int i) {
    Vec3 u = mesh[starts[i]];
    for (double sigma : cfg.sigma_schedule) u = RefineJ3(score, u, sigma, cfg);
    refined[i] = u;
    refined_scores[i] = score.J3(u, sigma0);
  });
  int winner = 0;
  for (int i = 1; i < static_cast<int>(refined.size()); ++i) {
    if (refined_scores[i] > refined_scores[winner]) winner = i;
  }
  const Vec3 e1 = refined[winner];

  std::vector<double> circle_scores(cfg.circle_mesh_size);
  ParallelFor(cfg.circle_mesh_size, [&](int i) {
    circle_scores[i] =
        score.J2(e1, 2.0 * kPi * i / cfg.circle_mesh_size, sigma0);
  });
  const std::vector<int> circle_starts =
      TopK(circle_scores, std::min(cfg.num_starts, cfg.circle_mesh_size));
  std::vector<double> thetas(circle_starts.size());
  std::vector<double> theta_scores(circle_starts.size());
  ParallelFor(static_cast<int>(circle_starts.size()), [&](int i) {
    double theta = 2.0 * kPi * circle_starts[i] / cfg.circle_mesh_size;
    for (double sigma : cfg.sigma_schedule) {
      theta = RefineJ2(score, e1, theta, sigma, cfg);
    }
    thetas[i] = theta;
    theta_scores[i] = score.J2(e1, theta, sigma0);
  });
  int best_theta = 0;
  for (int i = 1; i < static_cast<int>(thetas.size()); ++i) {
    if (theta_scores[i] > theta_scores[best_theta]) best_theta = i;
  }
  Vec3 b1, b2;
  InPlaneBasis(e1, &b1, &b2);
  const double theta = thetas[best_theta];
  const Vec3 e2 = std::cos(theta) * b1 + std::sin(theta) * b2;

  if (diagnostics) {
    diagnostics->starts.clear();
    for (int i : starts) diagnostics->starts.push_back(mesh[i]);
    diagnostics->refined = refined;
    diagnostics->scores = refined_scores;
    diagnostics->winner = winner;
    diagnostics->e2_theta = theta;
  }
  return Basis::FromTwo(e1, e2);
}

void WriteJ3MeshCsv(const ImageSourceCloud& cloud, double sigma, int mesh_size,
                    const std::string& path) {
  const OrthogonalityScore score(cloud);
  const std::vector<Vec3> mesh = FibonacciHalfSphere(mesh_size);
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << "theta,phi,score\n";
  out.precision(17);
  for (const Vec3& u : mesh) {
    const double phi = std::acos(std::clamp(u.z(), -1.0, 1.0));
    const double theta = std::atan2(u.y(), u.x());
    out << theta << ',' << phi << ',' << score.J3(u, sigma) << '\n';
  }
  if (!out) throw IoError("failed writing " + path);
}

}  // namespace shoebox
