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

#include "shoebox/sfw.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <Eigen/Cholesky>

#include "shoebox/errors.h"
#include "shoebox/optim.h"
#include "shoebox/parallel.h"

namespace shoebox {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Neighboring atoms correlate at >= 0.9 when the rms delay change across the
// array stays below sqrt(0.6) / pi samples.
constexpr double kMaxRmsDelaySamples = 0.24656;

double MeanSquaredRadius(const std::vector<Vec3>& mics) {
  double acc = 0.0;
  for (const Vec3& p : mics) acc += p.squaredNorm();
  return acc / static_cast<double>(mics.size());
}

std::vector<double> Residual(const ForwardModel& model,
                             std::span<const double> data,
                             const ImageSourceCloud& cloud) {
  std::vector<double> res(data.begin(), data.end());
  for (const ImageSource& s : cloud.sources) {
    if (s.amplitude != 0.0) model.Accumulate(s.position, -s.amplitude, res);
  }
  return res;
}

double HalfSquaredNorm(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return 0.5 * acc;
}

double L1(const ImageSourceCloud& cloud) {
  double acc = 0.0;
  for (const ImageSource& s : cloud.sources) acc += s.amplitude;
  return acc;
}

// Median absolute value scaled to a Gaussian standard deviation.
double RobustSigma(std::vector<double> v) {
  if (v.empty()) return 0.0;
  for (double& x : v) x = std::abs(x);
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid / 0.6744897501960817;
}

void Debias(const ForwardModel& model, std::span<const double> data,
            ImageSourceCloud* cloud) {
  std::vector<Vec3> pos;
  std::vector<double> amp;
  for (const ImageSource& s : cloud->sources) {
    pos.push_back(s.position);
    amp.push_back(s.amplitude);
  }
  amp = SolveAmplitudes(model, data, pos, amp, 0.0, 500);
  for (int i = 0; i < cloud->size(); ++i) cloud->sources[i].amplitude = amp[i];
}

void Prune(ImageSourceCloud* cloud, double floor) {
  std::erase_if(cloud->sources, [&](const ImageSource& s) {
    return !(s.amplitude > 0.0) || s.amplitude < floor;
  });
}

// Maximizes <residual, gamma(r)> near `start` by BFGS in units of c / fs.
CandidateGrid::Best AscendCertificate(const ForwardModel& model,
                                      std::span<const double> residual,
                                      const Vec3& start, double scale,
                                      int max_iterations) {
  const double unit = model.speed_of_sound() / model.fs();
  const double inv_scale = 1.0 / std::max(scale, 1e-300);
  Objective f = [&](const Eigen::VectorXd& y, Eigen::VectorXd* grad) {
    const Vec3 r = start + unit * y.head<3>();
    try {
      Vec3 g;
      const double v = model.Correlate(residual, r, grad ? &g : nullptr);
      if (grad) *grad = -g * unit * inv_scale;
      return -v * inv_scale;
    } catch (const SingularityError&) {
      return kInf;
    }
  };
  MinimizeOptions opts;
  opts.max_iterations = max_iterations;
  opts.step_tolerance = 1e-7;
  opts.max_step = 1.0;
  const MinimizeResult res = MinimizeBfgs(f, Eigen::VectorXd::Zero(3), opts);
  CandidateGrid::Best best;
  best.position = start + unit * res.x.head<3>();
  best.value = -res.value * scale;
  return best;
}

}  // namespace

void SfwConfig::Validate() const {
  if (!(lambda_rel > 0.0) && !(lambda > 0.0)) {
    throw ValidationError("SFW needs a positive regularization weight");
  }
  if (lambda < 0.0 || lambda_rel < 0.0) {
    throw ValidationError("regularization weights must be nonnegative");
  }
  if (max_spikes < 1) throw ValidationError("max_spikes must be >= 1");
  if (grid.radial_step < 0.0 || grid.angular_step < 0.0 ||
      grid.min_radius < 0.0 || grid.upsample < 1) {
    throw ValidationError("invalid candidate grid");
  }
  if (certificate_tolerance < 0.0 || amp_min_pre < 0.0 ||
      amp_min_post < 0.0 || max_radius < 0.0 || max_stalls < 1 ||
      !(significance >= 0.0)) {
    throw ValidationError("invalid SFW tolerances");
  }
}

std::vector<Vec3> FibonacciSphere(int n) {
  if (n < 1) throw ValidationError("Fibonacci lattice needs n >= 1");
  std::vector<Vec3> out;
  out.reserve(n);
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / n;
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * i;
    out.emplace_back(rho * std::cos(phi), rho * std::sin(phi), z);
  }
  return out;
}

std::vector<double> AtomSignature(const Vec3& r, const MicArray& array,
                                  double fs, double duration,
                                  double max_radius) {
  if (!IsFinite(r)) throw ValidationError("non-finite atom position");
  if (r.norm() > max_radius) {
    throw ValidationError("atom position outside the search radius");
  }
  ForwardModel model(array, fs, NumSamples(fs, duration));
  return model.Signature(r);
}

double Certificate(const ForwardModel& model, std::span<const double> residual,
                   const Vec3& r, double lambda) {
  if (!(lambda > 0.0)) throw ValidationError("lambda must be positive");
  return model.Correlate(residual, r) / lambda;
}

namespace {

int MaxDelaySamples(const ForwardModel& model, double max_radius) {
  double array_radius = 0.0;
  for (const Vec3& p : model.mics()) {
    array_radius = std::max(array_radius, p.norm());
  }
  return static_cast<int>(std::ceil(model.fs() * (max_radius + array_radius) /
                                    model.speed_of_sound())) +
         2;
}

}  // namespace

CandidateGrid::CandidateGrid(const ForwardModel& model,
                             const CandidateGridSpec& spec, double max_radius)
    : model_(model),
      upsample_(spec.upsample),
      interpolator_(model.channels(), model.samples(), spec.upsample,
                    MaxDelaySamples(model, max_radius)) {
  const double unit = model.speed_of_sound() / model.fs();
  const double radial = spec.radial_step > 0.0 ? spec.radial_step : unit / 2.0;
  angular_step_ = spec.angular_step;
  if (angular_step_ == 0.0) {
    const double rms_radius = std::sqrt(MeanSquaredRadius(model.mics()) / 3.0);
    angular_step_ = kMaxRmsDelaySamples * unit / rms_radius;
  }
  angular_step_ = std::min(angular_step_, 0.5);
  const int n_dir = std::max(
      12, static_cast<int>(std::ceil(4.0 * kPi / (angular_step_ * angular_step_))));
  directions_ = FibonacciSphere(n_dir);
  for (double r = spec.min_radius; r <= max_radius; r += radial) {
    radii_.push_back(r);
  }
  if (radii_.empty()) throw ValidationError("empty candidate grid");
}

CandidateGrid::Best CandidateGrid::Argmax(std::span<const double> residual,
                                          bool normalized) const {
  const RowMatrix table = interpolator_.Table(residual);
  const int width = static_cast<int>(table.cols());
  const int n_dir = num_directions();
  const int n_rad = num_radii();
  const double k_index = model_.fs() / model_.speed_of_sound() * upsample_;
  const auto& mics = model_.mics();
  std::vector<double> best_score(n_dir, -kInf);
  std::vector<double> best_val(n_dir, -kInf);
  std::vector<int> best_rad(n_dir, 0);
  ParallelFor(n_dir, [&](int i) {
    const Vec3& u = directions_[i];
    std::vector<double> acc(n_rad, 0.0);
    std::vector<double> energy(n_rad, 0.0);
    for (size_t m = 0; m < mics.size(); ++m) {
      const double proj = u.dot(mics[m]);
      const double pp = mics[m].squaredNorm();
      const double* row = table.row(m).data();
      for (int j = 0; j < n_rad; ++j) {
        const double rho = radii_[j];
        const double d =
            std::sqrt(std::max(rho * rho - 2.0 * rho * proj + pp, 1e-12));
        const double pos = d * k_index;
        const int idx = static_cast<int>(pos);
        if (idx + 1 >= width) continue;
        const double w = pos - idx;
        const double g = 1.0 / (4.0 * kPi * d);
        acc[j] += ((1.0 - w) * row[idx] + w * row[idx + 1]) * g;
        energy[j] += g * g;
      }
    }
    for (int j = 0; j < n_rad; ++j) {
      const double score =
          normalized ? (energy[j] > 0.0 ? acc[j] / std::sqrt(energy[j]) : -kInf)
                     : acc[j];
      if (score > best_score[i]) {
        best_score[i] = score;
        best_val[i] = acc[j];
        best_rad[i] = j;
      }
    }
  });
  Best best;
  best.value = -kInf;
  double best_overall = -kInf;
  for (int i = 0; i < n_dir; ++i) {
    if (best_score[i] > best_overall) {
      best_overall = best_score[i];
      best.value = best_val[i];
      best.position = radii_[best_rad[i]] * directions_[i];
    }
  }
  return best;
}

double SfwObjective(const ForwardModel& model, std::span<const double> data,
                    const std::vector<Vec3>& positions,
                    const std::vector<double>& amplitudes, double lambda,
                    std::vector<Vec3>* grad_positions,
                    std::vector<double>* grad_amplitudes) {
  if (positions.size() != amplitudes.size()) {
    throw ValidationError("positions and amplitudes differ in length");
  }
  const int k = static_cast<int>(positions.size());
  std::vector<double> res(data.begin(), data.end());
  double l1 = 0.0;
  for (int i = 0; i < k; ++i) {
    if (amplitudes[i] != 0.0) model.Accumulate(positions[i], -amplitudes[i], res);
    l1 += amplitudes[i];
  }
  const double value = HalfSquaredNorm(res) + lambda * l1;
  if (grad_positions || grad_amplitudes) {
    std::vector<Vec3> gp(k);
    std::vector<double> ga(k);
    ParallelFor(k, [&](int i) {
      Vec3 g;
      const double corr = model.Correlate(res, positions[i], &g);
      ga[i] = -corr + lambda;
      gp[i] = -amplitudes[i] * g;
    });
    if (grad_positions) *grad_positions = std::move(gp);
    if (grad_amplitudes) *grad_amplitudes = std::move(ga);
  }
  return value;
}

ImageSourceCloud JointRefine(const ForwardModel& model,
                             std::span<const double> data,
                             const ImageSourceCloud& spikes, double lambda,
                             int max_iterations, double tolerance,
                             double* objective) {
  const int k = spikes.size();
  std::vector<Vec3> pos(k);
  std::vector<double> amp(k);
  double amax = 0.0;
  for (int i = 0; i < k; ++i) {
    pos[i] = spikes[i].position;
    amp[i] = spikes[i].amplitude;
    amax = std::max(amax, amp[i]);
  }
  if (k == 0 || max_iterations <= 0) {
    if (objective) *objective = SfwObjective(model, data, pos, amp, lambda);
    return spikes;
  }
  // Per-spike change of variables z = L^T r with L L^T the Gauss-Newton
  // block of the position Hessian, so each block is close to the identity.
  const double k2 = std::pow(kPi * model.fs() / model.speed_of_sound(), 2) / 3.0;
  std::vector<Mat3> chol(k);
  std::vector<double> s_amp(k);
  for (int i = 0; i < k; ++i) {
    Mat3 h = Mat3::Zero();
    double energy = 0.0;
    for (const Vec3& p : model.mics()) {
      const Vec3 diff = pos[i] - p;
      const double d = std::max(diff.norm(), 1e-6);
      const double w = 1.0 / (16.0 * kPi * kPi * d * d);
      const Vec3 u = diff / d;
      h += w * (k2 + 1.0 / (d * d)) * u * u.transpose();
      energy += w;
    }
    const double a = std::max(amp[i], 1e-3 * amax);
    h *= (a > 0.0 ? a * a : 1.0);
    h += 1e-9 * h.trace() * Mat3::Identity();
    chol[i] = Eigen::LLT<Mat3>(h).matrixL();
    s_amp[i] = std::sqrt(energy);
  }
  Eigen::VectorXd z(4 * k), lower(4 * k);
  for (int i = 0; i < k; ++i) {
    z.segment<3>(4 * i) = chol[i].transpose() * pos[i];
    z[4 * i + 3] = amp[i] * s_amp[i];
    lower.segment<3>(4 * i).setConstant(-kInf);
    lower[4 * i + 3] = 0.0;
  }
  auto position_of = [&](const Eigen::VectorXd& zz, int i) -> Vec3 {
    return chol[i].transpose().triangularView<Eigen::Upper>().solve(
        Vec3(zz.segment<3>(4 * i)));
  };
  Objective f = [&](const Eigen::VectorXd& zz, Eigen::VectorXd* grad) {
    std::vector<Vec3> p(k);
    std::vector<double> a(k);
    for (int i = 0; i < k; ++i) {
      p[i] = position_of(zz, i);
      a[i] = zz[4 * i + 3] / s_amp[i];
    }
    try {
      if (!grad) return SfwObjective(model, data, p, a, lambda);
      std::vector<Vec3> gp;
      std::vector<double> ga;
      const double v = SfwObjective(model, data, p, a, lambda, &gp, &ga);
      grad->resize(4 * k);
      for (int i = 0; i < k; ++i) {
        grad->segment<3>(4 * i) =
            chol[i].triangularView<Eigen::Lower>().solve(gp[i]);
        (*grad)[4 * i + 3] = ga[i] / s_amp[i];
      }
      return v;
    } catch (const SingularityError&) {
      return kInf;
    }
  };
  MinimizeOptions opts;
  opts.max_iterations = max_iterations;
  opts.relative_tolerance = tolerance;
  opts.step_tolerance = 1e-9;
  opts.max_step = std::sqrt(static_cast<double>(k));
  opts.history = 10;
  const MinimizeResult res = MinimizeLbfgsBounded(f, z, lower, opts);
  ImageSourceCloud out;
  out.sources.reserve(k);
  for (int i = 0; i < k; ++i) {
    ImageSource s;
    s.position = position_of(res.x, i);
    s.amplitude = std::max(0.0, res.x[4 * i + 3] / s_amp[i]);
    out.sources.push_back(s);
  }
  if (objective) *objective = res.value;
  return out;
}

std::vector<double> SolveAmplitudes(const ForwardModel& model,
                                    std::span<const double> data,
                                    const std::vector<Vec3>& positions,
                                    std::vector<double> amplitudes,
                                    double lambda, int max_sweeps) {
  const int k = static_cast<int>(positions.size());
  if (static_cast<int>(amplitudes.size()) != k) {
    throw ValidationError("positions and amplitudes differ in length");
  }
  if (k == 0) return amplitudes;
  const size_t n = data.size();
  std::vector<std::vector<double>> atoms(k);
  std::vector<double> sq(k);
  ParallelFor(k, [&](int i) {
    atoms[i] = model.Signature(positions[i]);
    double acc = 0.0;
    for (double v : atoms[i]) acc += v * v;
    sq[i] = acc;
  });
  std::vector<double> res(data.begin(), data.end());
  for (int i = 0; i < k; ++i) {
    amplitudes[i] = std::max(0.0, amplitudes[i]);
    if (amplitudes[i] == 0.0) continue;
    for (size_t j = 0; j < n; ++j) res[j] -= amplitudes[i] * atoms[i][j];
  }
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double max_change = 0.0;
    double max_amp = 0.0;
    for (int i = 0; i < k; ++i) {
      if (!(sq[i] > 0.0)) continue;
      const double* a = atoms[i].data();
      double corr = 0.0;
      for (size_t j = 0; j < n; ++j) corr += res[j] * a[j];
      const double updated =
          std::max(0.0, amplitudes[i] + (corr - lambda) / sq[i]);
      const double delta = updated - amplitudes[i];
      if (delta != 0.0) {
        for (size_t j = 0; j < n; ++j) res[j] -= delta * a[j];
        amplitudes[i] = updated;
      }
      max_change = std::max(max_change, std::abs(delta));
      max_amp = std::max(max_amp, updated);
    }
    if (max_change <= 1e-9 * max_amp) break;
  }
  return amplitudes;
}

SfwResult SfwLocalize(const MultichannelRir& rir, const MicArray& array,
                      const SfwConfig& cfg) {
  cfg.Validate();
  if (rir.channels() != array.size()) {
    throw ValidationError("RIR channel count does not match the array");
  }
  SfwResult result;
  if (rir.length() == 0 || rir.IsZero()) {
    result.converged = true;
    result.warnings.push_back("all-zero RIR: empty reconstruction");
    return result;
  }
  const ForwardModel model(array, rir.fs, rir.length());
  const std::span<const double> data(rir.samples.data(),
                                     static_cast<size_t>(rir.samples.size()));
  const double max_radius = cfg.max_radius > 0.0
                                ? cfg.max_radius
                                : model.speed_of_sound() * rir.duration;
  const CandidateGrid grid(model, cfg.grid, max_radius);

  ImageSourceCloud cloud;
  std::vector<double> residual(data.begin(), data.end());
  result.objective_trace.push_back(HalfSquaredNorm(residual));
  const int max_outer = 2 * cfg.max_spikes + 10;
  int stalls = 0;
  for (int iter = 0; iter < max_outer; ++iter) {
    const CandidateGrid::Best coarse =
        grid.Argmax(residual, cfg.normalized_selection && iter > 0);
    CandidateGrid::Best best = coarse;
    if (coarse.value > 0.0) {
      best = AscendCertificate(model, residual, coarse.position, coarse.value,
                               cfg.ascent_iterations);
      if (!(best.value >= coarse.value)) best = coarse;
    }
    if (iter == 0) {
      result.lambda = cfg.lambda > 0.0 ? cfg.lambda : cfg.lambda_rel * best.value;
      if (!(result.lambda > 0.0)) {
        result.converged = true;
        result.warnings.push_back("no positive correlation with any atom");
        break;
      }
    }
    result.final_certificate_max = best.value / result.lambda;
    if (result.final_certificate_max <= 1.0 + cfg.certificate_tolerance) {
      result.converged = true;
      break;
    }
    if (cloud.size() >= cfg.max_spikes) break;
    result.iterations = iter + 1;

    ImageSource spike;
    spike.position = best.position;
    spike.amplitude = 0.0;
    cloud.sources.push_back(spike);

    std::vector<Vec3> pos;
    std::vector<double> amp;
    for (const ImageSource& s : cloud.sources) {
      pos.push_back(s.position);
      amp.push_back(s.amplitude);
    }
    amp = SolveAmplitudes(model, data, pos, amp, result.lambda,
                          cfg.amplitude_sweeps);
    for (int i = 0; i < cloud.size(); ++i) cloud.sources[i].amplitude = amp[i];
    cloud = JointRefine(model, data, cloud, result.lambda, cfg.joint_iterations,
                        cfg.joint_tolerance);
    // JointRefine preserves order, so the new spike is the last one.
    const bool new_spike_dropped =
        !(cloud.sources.back().amplitude >= cfg.amp_min_pre);
    Prune(&cloud, cfg.amp_min_pre);
    stalls = new_spike_dropped ? stalls + 1 : 0;
    residual = Residual(model, data, cloud);
    result.objective_trace.push_back(HalfSquaredNorm(residual) +
                                     result.lambda * L1(cloud));
    if (stalls >= cfg.max_stalls) {
      result.warnings.push_back("stopped: new spikes fall below the floor");
      break;
    }
  }
  if (!result.converged) {
    std::ostringstream msg;
    msg << "certificate criterion not met after " << result.iterations
        << " iterations (max certificate " << result.final_certificate_max
        << ", " << cloud.size() << " spikes)";
    result.warnings.push_back(msg.str());
  }

  if (!cloud.empty()) {
    cloud = JointRefine(model, data, cloud, result.lambda,
                        cfg.final_joint_iterations, cfg.joint_tolerance);
    Prune(&cloud, cfg.amp_min_post);
    if (cfg.debias && !cloud.empty()) {
      Debias(model, data, &cloud);
      Prune(&cloud, 0.0);
    }
    if (cfg.significance > 0.0 && !cloud.empty()) {
      const double sigma = RobustSigma(Residual(model, data, cloud));
      const int before = cloud.size();
      std::erase_if(cloud.sources, [&](const ImageSource& s) {
        const std::vector<double> g = model.Signature(s.position);
        double norm2 = 0.0;
        for (double v : g) norm2 += v * v;
        return s.amplitude * std::sqrt(norm2) < cfg.significance * sigma;
      });
      if (cloud.size() < before) {
        std::ostringstream msg;
        msg << "dropped " << before - cloud.size()
            << " spikes below the noise significance threshold";
        result.warnings.push_back(msg.str());
        if (cfg.debias && !cloud.empty()) {
          Debias(model, data, &cloud);
          Prune(&cloud, 0.0);
        }
      }
    }
  }
  std::stable_sort(cloud.sources.begin(), cloud.sources.end(),
                   [](const ImageSource& a, const ImageSource& b) {
                     return a.position.squaredNorm() < b.position.squaredNorm();
                   });
  result.cloud = std::move(cloud);
  return result;
}

}  // namespace shoebox
