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

#ifndef SHOEBOX_SFW_H_
#define SHOEBOX_SFW_H_

#include <span>
#include <string>
#include <vector>

#include "shoebox/forward_model.h"
#include "shoebox/image_sources.h"
#include "shoebox/mic_array.h"
#include "shoebox/rir.h"

namespace shoebox {

// Candidate grid for the certificate search: spherical shells around the
// array center crossed with a Fibonacci sphere of directions.
struct CandidateGridSpec {
  // Radial step in meters; 0 selects c / (2 fs).
  double radial_step = 0.0;
  // Angular step in radians; 0 selects the step at which neighboring atoms
  // correlate at 0.9.
  double angular_step = 0.0;
  double min_radius = 0.3;
  // Oversampling of the residual interpolation table.
  int upsample = 8;
};

struct SfwConfig {
  // lambda = lambda_rel * max_r <x, gamma(r)> unless `lambda` > 0.
  double lambda_rel = 1e-3;
  double lambda = 0.0;
  int max_spikes = 200;
  CandidateGridSpec grid;
  // Stop once the certificate maximum is <= 1 + certificate_tolerance.
  double certificate_tolerance = 1e-3;
  // Absolute amplitude floors applied after each iteration and after the
  // final refinement.
  double amp_min_pre = 0.01;
  double amp_min_post = 0.02;
  // Stop after this many consecutive iterations whose new spike was pruned.
  int max_stalls = 3;
  // Search radius around the array center; 0 selects c * duration.
  double max_radius = 0.0;
  int ascent_iterations = 60;
  int joint_iterations = 30;
  int final_joint_iterations = 400;
  double joint_tolerance = 1e-8;
  // Amplitude-only sweeps after a spike is inserted.
  int amplitude_sweeps = 5;
  // Re-fit amplitudes without the l1 penalty on the final support.
  bool debias = true;
  // After the first spike, insert where the residual correlation per unit
  // atom norm peaks.
  bool normalized_selection = true;
  // Final spikes whose signature norm times amplitude is below this multiple
  // of the robust residual noise level are dropped. 0 disables.
  double significance = 8.0;

  void Validate() const;
};

struct SfwResult {
  ImageSourceCloud cloud;
  double lambda = 0.0;
  int iterations = 0;
  double final_certificate_max = 0.0;
  // Regularized objective after each outer iteration (entry 0: empty measure).
  std::vector<double> objective_trace;
  // True when the certificate criterion was met.
  bool converged = false;
  std::vector<std::string> warnings;
};

// gamma(r) for a unit Dirac, flattened channel-major. Rejects r farther than
// max_radius from the array center.
std::vector<double> AtomSignature(const Vec3& r, const MicArray& array,
                                  double fs, double duration,
                                  double max_radius);

// <residual, gamma(r)> / lambda.
double Certificate(const ForwardModel& model, std::span<const double> residual,
                   const Vec3& r, double lambda);

// Grid of candidate spike positions.
class CandidateGrid {
 public:
  CandidateGrid(const ForwardModel& model, const CandidateGridSpec& spec,
                double max_radius);

  int num_directions() const { return static_cast<int>(directions_.size()); }
  int num_radii() const { return static_cast<int>(radii_.size()); }
  const std::vector<Vec3>& directions() const { return directions_; }
  const std::vector<double>& radii() const { return radii_; }
  double angular_step() const { return angular_step_; }

  struct Best {
    Vec3 position = Vec3::Zero();
    double value = 0.0;  // approximate <residual, gamma(position)>
  };
  // Grid point with the largest approximate correlation, or with the largest
  // correlation per unit atom norm when `normalized` is set. `value` is the
  // unnormalized correlation at the returned point either way.
  Best Argmax(std::span<const double> residual, bool normalized = false) const;

 private:
  const ForwardModel& model_;
  int upsample_;
  SincInterpolator interpolator_;
  double angular_step_;
  std::vector<Vec3> directions_;
  std::vector<double> radii_;
};

// Unit vectors on a Fibonacci lattice over the full sphere.
std::vector<Vec3> FibonacciSphere(int n);

// 0.5 |x - sum_k a_k gamma(r_k)|^2 + lambda sum_k a_k, with gradients.
double SfwObjective(const ForwardModel& model, std::span<const double> data,
                    const std::vector<Vec3>& positions,
                    const std::vector<double>& amplitudes, double lambda,
                    std::vector<Vec3>* grad_positions = nullptr,
                    std::vector<double>* grad_amplitudes = nullptr);

// Joint descent over positions and amplitudes (amplitudes >= 0) starting from
// `spikes`. Returns the refined spikes and writes the final objective.
ImageSourceCloud JointRefine(const ForwardModel& model,
                             std::span<const double> data,
                             const ImageSourceCloud& spikes, double lambda,
                             int max_iterations, double tolerance,
                             double* objective = nullptr);

// Nonnegative l1-penalized least squares on fixed positions by coordinate
// descent, warm-started from the given amplitudes.
std::vector<double> SolveAmplitudes(const ForwardModel& model,
                                    std::span<const double> data,
                                    const std::vector<Vec3>& positions,
                                    std::vector<double> amplitudes,
                                    double lambda, int max_sweeps);

SfwResult SfwLocalize(const MultichannelRir& rir, const MicArray& array,
                      const SfwConfig& cfg = {});

}  // namespace shoebox

#endif  // SHOEBOX_SFW_H_
