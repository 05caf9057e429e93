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

#include "drape/error.hpp"

namespace drape {

// Ply strip properties. mass_per_length may be zero (weightless test
// strips); the remaining quantities must be positive, second_moment may be
// zero only at the type level (solving needs E*I > 0).
struct Material {
  double mass_per_length = 0.0;  // kg/m
  double gravity = 9.81;         // m/s^2
  double elastic_modulus = 0.0;  // Pa
  double second_moment = 0.0;    // m^4

  double weight_per_length() const { return mass_per_length * gravity; }
  double flexural_rigidity() const { return elastic_modulus * second_moment; }

  void validate() const {
    if (!(mass_per_length >= 0.0))
      throw Error(ErrorCode::InvalidArgument, "material: m must be >= 0");
    if (!(gravity > 0.0))
      throw Error(ErrorCode::InvalidArgument, "material: g must be > 0");
    if (!(elastic_modulus > 0.0))
      throw Error(ErrorCode::InvalidArgument, "material: E must be > 0");
    if (!(second_moment >= 0.0))
      throw Error(ErrorCode::InvalidArgument, "material: I must be >= 0");
  }
};

}  // namespace drape
