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

#include "drape/geometry.hpp"

namespace drape {

double polyline_length(const Polyline& p) {
  double sum = 0.0;
  for (std::size_t i = 1; i < p.points.size(); ++i) {
    sum += distance(p.points[i - 1], p.points[i]);
  }
  return sum;
}

}  // namespace drape
