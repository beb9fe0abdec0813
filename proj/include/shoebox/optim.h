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

#ifndef SHOEBOX_OPTIM_H_
#define SHOEBOX_OPTIM_H_

#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Core>

namespace shoebox {

// f(x, grad): returns the objective and writes the gradient when grad != null.
using Objective =
    std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd* grad)>;

struct MinimizeOptions {
  int max_iterations = 200;
  // Stop when the step infinity norm falls below this.
  double step_tolerance = 1e-10;
  double gradient_tolerance = 1e-14;
  // Stop when (f_prev - f) <= tol * max(|f|, tiny).
  double relative_tolerance = 0.0;
  // Largest step norm tried by the line search; 0 disables the cap.
  double max_step = 0.0;
  int history = 8;
};

struct MinimizeResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
};

// Dense BFGS with backtracking Armijo line search, for small problems.
MinimizeResult MinimizeBfgs(const Objective& f, const Eigen::VectorXd& x0,
                            const MinimizeOptions& opts = {});

// Projected L-BFGS with per-variable lower bounds (use -inf for free
// variables). x0 is projected onto the feasible set first.
MinimizeResult MinimizeLbfgsBounded(const Objective& f,
                                    const Eigen::VectorXd& x0,
                                    const Eigen::VectorXd& lower,
                                    const MinimizeOptions& opts = {});

}  // namespace shoebox

#endif  // SHOEBOX_OPTIM_H_
