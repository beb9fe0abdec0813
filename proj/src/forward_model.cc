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

#include "shoebox/forward_model.h"

#include <cmath>
#include <numbers>
#include <string>

#include <unsupported/Eigen/FFT>

#include "shoebox/errors.h"

namespace shoebox {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSingularDistance = 1e-6;
constexpr double kSmallArgument = 1e-7;

// sin(pi t) and cos(pi t) with the argument reduced to [0, 1).
void SinCosPi(double t, double* s, double* c) {
  const double k = std::floor(t);
  const double f = t - k;
  const double sign = (static_cast<long long>(k) % 2 == 0) ? 1.0 : -1.0;
  *s = sign * std::sin(kPi * f);
  *c = sign * std::cos(kPi * f);
}

}  // namespace

double NormalizedSinc(double x) {
  if (std::abs(x) < kSmallArgument) return 1.0 - kPi * kPi * x * x / 6.0;
  return std::sin(kPi * x) / (kPi * x);
}

ForwardModel::ForwardModel(const MicArray& array, double fs, int num_samples,
                           double speed_of_sound)
    : mics_(array.positions()),
      fs_(fs),
      num_samples_(num_samples),
      c_(speed_of_sound) {
  if (!(fs > 0.0)) throw ValidationError("sampling rate must be positive");
  if (num_samples < 1) throw ValidationError("RIR length must be positive");
  sign_.resize(num_samples);
  index_.resize(num_samples);
  for (int n = 0; n < num_samples; ++n) {
    sign_[n] = (n & 1) ? -1.0 : 1.0;
    index_[n] = n;
  }
}

double ForwardModel::Distance(int m, const Vec3& r) const {
  const double d = (r - mics_[m]).norm();
  if (d < kSingularDistance) {
    throw SingularityError("source coincides with microphone " +
                           std::to_string(m));
  }
  return d;
}

void ForwardModel::AccumulateChannel(int m, const Vec3& r, double amplitude,
                                     std::span<double> out) const {
  const double d = Distance(m, r);
  const double t = fs_ * d / c_;
  double s, c;
  SinCosPi(t, &s, &c);
  const double scale = amplitude / (4.0 * kPi * d);
  // sinc(pi (n - t)) = -(-1)^n s / (pi (n - t))
  const double a = -scale * s / kPi;
  Eigen::Map<Eigen::ArrayXd> y(out.data(), num_samples_);
  const Eigen::Map<const Eigen::ArrayXd> sign(sign_.data(), num_samples_);
  const Eigen::Map<const Eigen::ArrayXd> index(index_.data(), num_samples_);
  auto run = [&](int lo, int hi) {
    if (hi <= lo) return;
    y.segment(lo, hi - lo) +=
        a * sign.segment(lo, hi - lo) / (index.segment(lo, hi - lo) - t);
  };
  const long long n0 = std::llround(t);
  if (n0 >= 0 && n0 < num_samples_ && std::abs(n0 - t) < kSmallArgument) {
    const double x = n0 - t;
    run(0, static_cast<int>(n0));
    y[n0] += scale * (1.0 - kPi * kPi * x * x / 6.0);
    run(static_cast<int>(n0) + 1, num_samples_);
  } else {
    run(0, num_samples_);
  }
}

void ForwardModel::Accumulate(const Vec3& r, double amplitude,
                              std::span<double> out) const {
  for (int m = 0; m < channels(); ++m) {
    AccumulateChannel(m, r, amplitude,
                      out.subspan(static_cast<size_t>(m) * num_samples_,
                                  num_samples_));
  }
}

std::vector<double> ForwardModel::Signature(const Vec3& r) const {
  std::vector<double> out(size(), 0.0);
  Accumulate(r, 1.0, out);
  return out;
}

double ForwardModel::Correlate(std::span<const double> residual, const Vec3& r,
                               Vec3* gradient) const {
  double total = 0.0;
  if (gradient) gradient->setZero();
  const double k_time = fs_ / c_;
  thread_local std::vector<double> scratch;
  scratch.resize(num_samples_);
  for (int m = 0; m < channels(); ++m) {
    const double d = Distance(m, r);
    const double t = k_time * d;
    double s, c;
    SinCosPi(t, &s, &c);
    const double* res = residual.data() + static_cast<size_t>(m) * num_samples_;
    // x_n = n - t, sinc'(x_n) = ((-1)^n cos(pi t) - sinc(x_n)) / x_n. With
    // q_n = (-1)^n res[n] / x_n: sum res sinc = a sum q and
    // sum res sinc' = c sum q - a sum q / x.
    double acc = 0.0;
    double acc_d = 0.0;
    const double a = -s / kPi;
    const Eigen::Map<const Eigen::ArrayXd> r_m(res, num_samples_);
    const Eigen::Map<const Eigen::ArrayXd> sign(sign_.data(), num_samples_);
    const Eigen::Map<const Eigen::ArrayXd> index(index_.data(), num_samples_);
    Eigen::Map<Eigen::ArrayXd> inv(scratch.data(), num_samples_);
    auto run = [&](int lo, int hi) {
      if (hi <= lo) return;
      const int len = hi - lo;
      inv.segment(lo, len) = (index.segment(lo, len) - t).inverse();
      const double q = (r_m.segment(lo, len) * sign.segment(lo, len) *
                        inv.segment(lo, len))
                           .sum();
      const double q2 = (r_m.segment(lo, len) * sign.segment(lo, len) *
                         inv.segment(lo, len).square())
                            .sum();
      acc += a * q;
      acc_d += c * q - a * q2;
    };
    const long long n0 = std::llround(t);
    if (n0 >= 0 && n0 < num_samples_ && std::abs(n0 - t) < kSmallArgument) {
      const double x = n0 - t;
      run(0, static_cast<int>(n0));
      acc += res[n0] * (1.0 - kPi * kPi * x * x / 6.0);
      acc_d += res[n0] * (-kPi * kPi * x / 3.0);
      run(static_cast<int>(n0) + 1, num_samples_);
    } else {
      run(0, num_samples_);
    }
    const double g = 1.0 / (4.0 * kPi * d);
    total += acc * g;
    if (gradient) {
      // d/dd [sinc(n - k d) g(d)] = -k sinc'(.) g - sinc(.) g / d
      const double dd = -k_time * acc_d * g - acc * g / d;
      *gradient += dd * (r - mics_[m]) / d;
    }
  }
  return total;
}

RowMatrix ForwardModel::InterpolationTable(std::span<const double> residual,
                                           int upsample,
                                           int max_delay_samples) const {
  const int width = upsample * max_delay_samples + 1;
  RowMatrix table = RowMatrix::Zero(channels(), width);
  // Kernel for fractional offset f/upsample: k_f[delta] = sinc(delta - f/U),
  // delta = n - j0 with n in [0, N), j0 in [0, max_delay].
  const int lo = -max_delay_samples;
  const int hi = num_samples_;
  std::vector<double> kernel(hi - lo);
  for (int f = 0; f < upsample; ++f) {
    const double frac = static_cast<double>(f) / upsample;
    for (int delta = lo; delta < hi; ++delta) {
      kernel[delta - lo] = NormalizedSinc(delta - frac);
    }
    for (int m = 0; m < channels(); ++m) {
      const double* res =
          residual.data() + static_cast<size_t>(m) * num_samples_;
      for (int j0 = 0; j0 * upsample + f < width; ++j0) {
        if (f == 0) {
          table(m, j0 * upsample) = j0 < num_samples_ ? res[j0] : 0.0;
          continue;
        }
        const double* k = kernel.data() - lo - j0;
        double acc = 0.0;
        for (int n = 0; n < num_samples_; ++n) acc += res[n] * k[n];
        table(m, j0 * upsample + f) = acc;
      }
    }
  }
  return table;
}

SincInterpolator::SincInterpolator(int channels, int num_samples,
                                   int upsample, int max_delay_samples)
    : channels_(channels),
      num_samples_(num_samples),
      upsample_(upsample),
      max_delay_(max_delay_samples) {
  if (channels < 1 || num_samples < 1 || upsample < 1 ||
      max_delay_samples < 0) {
    throw ValidationError("invalid interpolator size");
  }
  // Linear correlation of a length-N signal with a length-(N + D) kernel.
  const int span = 2 * num_samples + max_delay_samples;
  fft_size_ = 1;
  while (fft_size_ < span) fft_size_ *= 2;
  Eigen::FFT<double> fft;
  // table[j0] = sum_n res[n] k[n - j0]. With h[N - 1 - delta] = k[delta] the
  // linear convolution (res * h) holds table[j0] at index N - 1 + j0.
  kernels_.resize(upsample);
  std::vector<double> h(fft_size_);
  for (int f = 1; f < upsample; ++f) {
    std::fill(h.begin(), h.end(), 0.0);
    const double frac = static_cast<double>(f) / upsample;
    for (int delta = -max_delay_samples; delta < num_samples; ++delta) {
      h[num_samples - 1 - delta] = NormalizedSinc(delta - frac);
    }
    fft.fwd(kernels_[f], h);
  }
}

RowMatrix SincInterpolator::Table(std::span<const double> residual) const {
  if (residual.size() != static_cast<size_t>(channels_) * num_samples_) {
    throw ValidationError("residual size does not match the interpolator");
  }
  RowMatrix table = RowMatrix::Zero(channels_, width());
  Eigen::FFT<double> fft;
  std::vector<double> buf(fft_size_);
  std::vector<std::complex<double>> spec, prod(fft_size_);
  std::vector<double> out;
  for (int m = 0; m < channels_; ++m) {
    const double* res = residual.data() + static_cast<size_t>(m) * num_samples_;
    std::fill(buf.begin(), buf.end(), 0.0);
    std::copy(res, res + num_samples_, buf.begin());
    fft.fwd(spec, buf);
    for (int j0 = 0; j0 <= max_delay_; ++j0) {
      table(m, j0 * upsample_) = j0 < num_samples_ ? res[j0] : 0.0;
    }
    for (int f = 1; f < upsample_; ++f) {
      for (int i = 0; i < fft_size_; ++i) prod[i] = spec[i] * kernels_[f][i];
      fft.inv(out, prod);
      for (int j0 = 0; j0 * upsample_ + f < width(); ++j0) {
        table(m, j0 * upsample_ + f) =
            out[num_samples_ - 1 + j0];
      }
    }
  }
  return table;
}

}  // namespace shoebox
