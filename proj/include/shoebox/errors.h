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

#ifndef SHOEBOX_ERRORS_H_
#define SHOEBOX_ERRORS_H_

#include <stdexcept>
#include <string>

namespace shoebox {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid input: out-of-range parameters, malformed geometry, bad shapes.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A source sits on top of a microphone (1/r blows up).
class SingularityError : public Error {
 public:
  using Error::Error;
};

// Rejection sampling could not satisfy the scene constraints.
class GenerationError : public Error {
 public:
  using Error::Error;
};

// Input cloud lacks the structure an estimator needs (rank, ties).
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

// No first-order candidate was found for a wall, even at the widest cone.
class MissingReflectionError : public Error {
 public:
  MissingReflectionError(int axis, bool positive_side)
      : Error("no first-order reflection found for wall " +
              std::to_string(axis + 1) + (positive_side ? "+" : "-")),
        axis_(axis),
        positive_side_(positive_side) {}
  int axis() const { return axis_; }
  bool positive_side() const { return positive_side_; }

 private:
  int axis_;
  bool positive_side_;
};

// Recovered geometry contradicts the basis (non-positive room length).
class InconsistentBasisError : public Error {
 public:
  using Error::Error;
};

// Recovered axes do not map one-to-one onto the ground-truth axes.
class MatchingError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace shoebox

#endif  // SHOEBOX_ERRORS_H_
