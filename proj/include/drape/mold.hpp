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

#include <string>
#include <vector>

#include "drape/error.hpp"
#include "drape/geometry.hpp"

namespace drape {

enum class MoldKind { AnalyticShearedPlane, Heightfield };

// Mold surface with height/clearance/slope queries. The analytic plane is a
// flat parallelogram domain (height z0 everywhere, shear angle used for
// target-lattice generation). The heightfield is a rectilinear grid with
// bilinear interpolation, strictly monotone in both axes.
class MoldSurface {
 public:
  static MoldSurface plane(double base_height, double shear_rad);
  // CSV with header x,y,z; rows ordered y-major (x varies fastest).
  static MoldSurface heightfield_from_csv(const std::string& path);
  static MoldSurface heightfield(std::vector<double> xs, std::vector<double> ys,
                                 std::vector<double> zs);

  MoldKind kind() const { return kind_; }
  double shear_angle() const { return shear_; }

  // Surface height; throws OutOfDomain outside a heightfield's grid.
  double height(double x, double y) const;

  // p.z - height(p.x, p.y); negative means penetration.
  double vertical_clearance(const Vec3& p) const;

  // Surface slope dz/dt along the horizontal unit direction (ux, uy).
  double slope_along(double x, double y, double ux, double uy) const;

 private:
  MoldKind kind_ = MoldKind::AnalyticShearedPlane;
  double z0_ = 0.0;
  double shear_ = 0.0;  // rad, plane only
  std::vector<double> xs_, ys_;  // heightfield axes
  std::vector<double> zs_;       // row-major, zs_[iy * nx + ix]

  std::size_t cell_index(const std::vector<double>& axis, double v,
                         const char* name) const;
};

// Gripper target lattice for the ideal kinematic drape on the mold: a
// parallelogram of side cell_length and in-plane shear equal to the mold's,
// centered on the origin, row-major (row r, column c).
std::vector<Vec3> target_points(const MoldSurface& mold, int rows, int cols,
                                double cell_length);

}  // namespace drape
