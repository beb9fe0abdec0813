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

#ifndef SHOEBOX_FORWARD_MODEL_H_
#define SHOEBOX_FORWARD_MODEL_H_

#include <complex>
#include <span>
#include <vector>

#include "shoebox/geometry.h"
#include "shoebox/mic_array.h"
#include "shoebox/rir.h"

namespace shoebox {

// The linear observation operator: a unit Dirac at r maps to the channel-major
// signature gamma(r) in R^{MN},
//   gamma_m[n] = sinc(pi (n - fs d_m / c)) / (4 pi d_m),  d_m = |r - p_m|.
// Sinc values are evaluated exactly using sin(pi (n - t)) = -(-1)^n sin(pi t).
class ForwardModel {
 public:
  ForwardModel(const MicArray& array, double fs, int num_samples,
               double speed_of_sound = kSpeedOfSound);

  int channels() const { return static_cast<int>(mics_.size()); }
  int samples() const { return num_samples_; }
  int size() const { return channels() * num_samples_; }
  double fs() const { return fs_; }
  double speed_of_sound() const { return c_; }
  const std::vector<Vec3>& mics() const { return mics_; }

  // out += amplitude * gamma(r). Throws SingularityError if r is within 1 um
  // of a microphone.
  void Accumulate(const Vec3& r, double amplitude, std::span<double> out) const;
  // Same, restricted to one channel (out has `samples()` entries).
  void AccumulateChannel(int m, const Vec3& r, double amplitude,
                         std::span<double> out) const;
  // gamma(r) as a fresh vector.
  std::vector<double> Signature(const Vec3& r) const;

  // <residual, gamma(r)>; when `gradient` is non-null also its gradient in r.
  double Correlate(std::span<const double> residual, const Vec3& r,
                   Vec3* gradient = nullptr) const;

  // Band-limited interpolation of each residual channel on a grid refined by
  // `upsample`: table(m, j) = sum_n residual_m[n] sinc(pi (n - j / upsample)),
  // for j in [0, upsample * max_delay_samples]. Linear interpolation of this
  // table approximates Correlate without the 1/(4 pi d) factor.
  RowMatrix InterpolationTable(std::span<const double> residual, int upsample,
                               int max_delay_samples) const;

 private:
  double Distance(int m, const Vec3& r) const;

  std::vector<Vec3> mics_;
  double fs_;
  int num_samples_;
  double c_;
  // (-1)^n and n as doubles, for branch-free inner loops.
  std::vector<double> sign_;
  std::vector<double> index_;
};

// Computes ForwardModel::InterpolationTable by FFT convolution. The kernel
// spectra depend only on the sizes and are computed once.
class SincInterpolator {
 public:
  SincInterpolator(int channels, int num_samples, int upsample,
                   int max_delay_samples);

  int width() const { return upsample_ * max_delay_ + 1; }
  RowMatrix Table(std::span<const double> residual) const;

 private:
  int channels_;
  int num_samples_;
  int upsample_;
  int max_delay_;
  int fft_size_;
  // Spectrum of the reversed kernel for each fractional offset f >= 1.
  std::vector<std::vector<std::complex<double>>> kernels_;
};

// sinc(pi x) with sinc(0) = 1.
double NormalizedSinc(double x);

}  // namespace shoebox

#endif  // SHOEBOX_FORWARD_MODEL_H_
