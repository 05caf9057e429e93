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

namespace drape::kernels {

// The two conditioned representations of the closed-form catenary profile.
//   CoshShifted (lambda*span <= 1):
//     w(x) = d0 + d1*x + qq*x^2 + c3*(cosh(l*x) - 1) + c4*(sinh(l*x) - l*x)
//   ExpPair (lambda*span > 1):
//     w(x) = d0 + d1*x + qq*x^2 + c3*exp(-l*x) + c4*exp(-l*(span - x))
enum class Basis : int { CoshShifted = 0, ExpPair = 1 };

struct Profile {
  Basis basis = Basis::CoshShifted;
  double span = 0.0;
  double lambda = 0.0;
  double d0 = 0.0;
  double d1 = 0.0;
  double qq = 0.0;
  double c3 = 0.0;
  double c4 = 0.0;
};

// One kernel family. eval_profile fills y[i] = w(span * i/(n-1)) for
// i = 0..n-1 (n >= 2). profile_length returns
// sum_i sqrt(dx^2 + (y[i] - y[i-1])^2) over the n-1 segments.
struct Ops {
  const char* name;
  void (*eval_profile)(const Profile& p, double* y, int n);
  double (*profile_length)(const double* y, int n, double dx);
};

// Scalar reference kernels; always available.
const Ops& scalar_ops();

// AVX2+FMA kernels, or nullptr when unsupported by the build or the CPU.
const Ops* avx2_ops();

// Kernels selected at startup: AVX2 when the CPU supports it, else scalar.
// DRAPE_KERNEL=scalar|avx2 in the environment forces a variant.
const Ops& active_ops();

}  // namespace drape::kernels
