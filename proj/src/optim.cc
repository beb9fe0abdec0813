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

#include "shoebox/optim.h"

#include <cmath>
#include <deque>
#include <limits>

#include <Eigen/Dense>

namespace shoebox {
namespace {

constexpr double kArmijo = 1e-4;
constexpr int kMaxBacktracks = 60;

bool SmallDecrease(double f_prev, double f, double tol) {
  if (tol <= 0.0) return false;
  return f_prev - f <= tol * std::max(std::abs(f), 1e-300);
}

}  // namespace

MinimizeResult MinimizeBfgs(const Objective& f, const Eigen::VectorXd& x0,
                            const MinimizeOptions& opts) {
  const int n = static_cast<int>(x0.size());
  MinimizeResult res;
  res.x = x0;
  Eigen::VectorXd g(n), g_new(n);
  res.value = f(res.x, &g);
  res.evaluations = 1;
  Eigen::MatrixXd h = Eigen::MatrixXd::Identity(n, n);
  bool scaled = false;
  for (int it = 0; it < opts.max_iterations; ++it) {
    res.iterations = it + 1;
    if (g.lpNorm<Eigen::Infinity>() <= opts.gradient_tolerance) {
      res.converged = true;
      break;
    }
    Eigen::VectorXd p = -h * g;
    if (g.dot(p) >= 0.0) {
      h.setIdentity();
      p = -g;
    }
    if (opts.max_step > 0.0 && p.norm() > opts.max_step) {
      p *= opts.max_step / p.norm();
    }
    const double slope = g.dot(p);
    double t = 1.0;
    double f_new = 0.0;
    Eigen::VectorXd x_new;
    bool accepted = false;
    for (int bt = 0; bt < kMaxBacktracks; ++bt) {
      x_new = res.x + t * p;
      f_new = f(x_new, &g_new);
      ++res.evaluations;
      if (std::isfinite(f_new) && f_new <= res.value + kArmijo * t * slope) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      res.converged = true;
      break;
    }
    const Eigen::VectorXd s = x_new - res.x;
    const Eigen::VectorXd y = g_new - g;
    const double f_prev = res.value;
    res.x = x_new;
    res.value = f_new;
    g = g_new;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (!scaled) {
        h *= sy / y.dot(y);
        scaled = true;
      }
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd v =
          Eigen::MatrixXd::Identity(n, n) - rho * s * y.transpose();
      h = v * h * v.transpose() + rho * s * s.transpose();
    }
    if (s.lpNorm<Eigen::Infinity>() <= opts.step_tolerance ||
        SmallDecrease(f_prev, f_new, opts.relative_tolerance)) {
      res.converged = true;
      break;
    }
  }
  return res;
}

MinimizeResult MinimizeLbfgsBounded(const Objective& f,
                                    const Eigen::VectorXd& x0,
                                    const Eigen::VectorXd& lower,
                                    const MinimizeOptions& opts) {
  const int n = static_cast<int>(x0.size());
  MinimizeResult res;
  res.x = x0.cwiseMax(lower);
  Eigen::VectorXd g(n), g_new(n);
  res.value = f(res.x, &g);
  res.evaluations = 1;
  std::deque<Eigen::VectorXd> s_hist, y_hist;
  std::deque<double> rho_hist;

  auto free_mask = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& grad) {
    Eigen::VectorXd mask = Eigen::VectorXd::Ones(n);
    for (int i = 0; i < n; ++i) {
      if (x[i] <= lower[i] && grad[i] > 0.0) mask[i] = 0.0;
    }
    return mask;
  };

  for (int it = 0; it < opts.max_iterations; ++it) {
    res.iterations = it + 1;
    const Eigen::VectorXd mask = free_mask(res.x, g);
    const Eigen::VectorXd g_free = g.cwiseProduct(mask);
    if (g_free.lpNorm<Eigen::Infinity>() <= opts.gradient_tolerance) {
      res.converged = true;
      break;
    }
    // Two-loop recursion on the free subspace.
    Eigen::VectorXd q = g_free;
    const int k = static_cast<int>(s_hist.size());
    std::vector<double> alpha(k);
    for (int i = k - 1; i >= 0; --i) {
      alpha[i] = rho_hist[i] * s_hist[i].cwiseProduct(mask).dot(q);
      q -= alpha[i] * y_hist[i].cwiseProduct(mask);
    }
    if (k > 0) {
      const Eigen::VectorXd& sl = s_hist.back();
      const Eigen::VectorXd& yl = y_hist.back();
      q *= sl.dot(yl) / yl.dot(yl);
    }
    for (int i = 0; i < k; ++i) {
      const double beta = rho_hist[i] * y_hist[i].cwiseProduct(mask).dot(q);
      q += (alpha[i] - beta) * s_hist[i].cwiseProduct(mask);
    }
    Eigen::VectorXd d = -q.cwiseProduct(mask);
    if (g.dot(d) >= 0.0) {
      d = -g_free;
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
    }
    if (opts.max_step > 0.0 && d.norm() > opts.max_step) {
      d *= opts.max_step / d.norm();
    }
    double t = 1.0;
    double f_new = 0.0;
    Eigen::VectorXd x_new;
    bool accepted = false;
    for (int bt = 0; bt < kMaxBacktracks; ++bt) {
      x_new = (res.x + t * d).cwiseMax(lower);
      f_new = f(x_new, &g_new);
      ++res.evaluations;
      if (std::isfinite(f_new) &&
          f_new <= res.value + kArmijo * g.dot(x_new - res.x)) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      res.converged = true;
      break;
    }
    const Eigen::VectorXd s = x_new - res.x;
    const Eigen::VectorXd y = g_new - g;
    const double f_prev = res.value;
    res.x = x_new;
    res.value = f_new;
    g = g_new;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      s_hist.push_back(s);
      y_hist.push_back(y);
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > opts.history) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    if (s.lpNorm<Eigen::Infinity>() <= opts.step_tolerance ||
        SmallDecrease(f_prev, f_new, opts.relative_tolerance)) {
      res.converged = true;
      break;
    }
  }
  return res;
}

}  // namespace shoebox
