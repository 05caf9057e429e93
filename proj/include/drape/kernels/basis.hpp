// Copyright 2026 the drape-sim authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>

namespace drape::kernels {

// cosh(t) - 1 without cancellation near t = 0.
inline double cosh_m1(double t) {
  const double a = std::abs(t);
  if (a < 0.1) {
    const double t2 = t * t;
    return t2 * (0.5 + t2 * (1.0 / 24.0 +
                             t2 * (1.0 / 720.0 + t2 * (1.0 / 40320.0))));
  }
  return 0.5 * (std::expm1(a) + std::expm1(-a));
}

// sinh(t) - t without cancellation near t = 0. Odd in t.
inline double sinh_mt(double t) {
  const double a = std::abs(t);
  const double sign = (t < 0.0) ? -1.0 : 1.0;
  if (a < 0.1) {
    const double t2 = t * t;
    return t * t2 *
           (1.0 / 6.0 +
            t2 * (1.0 / 120.0 + t2 * (1.0 / 5040.0 + t2 * (1.0 / 362880.0))));
  }
  return sign * (0.5 * (std::expm1(a) - std::expm1(-a)) - a);
}

}  // namespace drape::kernels
