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

#include <cmath>

#include "drape/kernels/basis.hpp"
#include "drape/kernels/kernels.hpp"

namespace drape::kernels {
namespace {

void eval_profile_scalar(const Profile& p, double* y, int n) {
  const double inv = 1.0 / static_cast<double>(n - 1);
  if (p.basis == Basis::CoshShifted) {
    for (int i = 0; i < n; ++i) {
      const double x = p.span * (static_cast<double>(i) * inv);
      const double t = p.lambda * x;
      y[i] = p.d0 + x * (p.d1 + x * p.qq) + p.c3 * cosh_m1(t) +
             p.c4 * sinh_mt(t);
    }
  } else {
    for (int i = 0; i < n; ++i) {
      const double x = p.span * (static_cast<double>(i) * inv);
      y[i] = p.d0 + x * (p.d1 + x * p.qq) + p.c3 * std::exp(-p.lambda * x) +
             p.c4 * std::exp(-p.lambda * (p.span - x));
    }
  }
}

double profile_length_scalar(const double* y, int n, double dx) {
  const double dx2 = dx * dx;
  double sum = 0.0;
  for (int i = 1; i < n; ++i) {
    const double d = y[i] - y[i - 1];
    sum += std::sqrt(dx2 + d * d);
  }
  return sum;
}

}  // namespace

const Ops& scalar_ops() {
  static const Ops ops = {"scalar", eval_profile_scalar,
                          profile_length_scalar};
  return ops;
}

}  // namespace drape::kernels
