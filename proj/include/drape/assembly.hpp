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

#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "drape/catenary.hpp"
#include "drape/error.hpp"
#include "drape/geometry.hpp"

namespace drape {

// Grid of movable grippers, row-major positions. slope_limit is the tangent
// of the maximum ball-joint rotation (default 40 deg).
struct GripperGrid {
  int n_rows = 0;
  int n_cols = 0;
  std::vector<Vec3> positions;
  double slope_limit = std::tan(40.0 * M_PI / 180.0);

  int index(int r, int c) const { return r * n_cols + c; }
  void validate() const;
};

enum class CatenaryKind { Edge, Diagonal };

// Lifecycle of a member across a trajectory. Shearing and Taut members are
// rendered as straight lines and carry no reaction-force variable; OverSlack
// members hold more length than the bending-stiff span can absorb even at
// the reaction floor and are rendered at maximum sag (excess material is
// wrinkle input); SplitParent and FullyFrozen members have left the member
// set.
enum class MemberStatus {
  Active,
  Shearing,
  Taut,
  OverSlack,
  SplitParent,
  FullyFrozen
};

struct AnchorRef {
  enum class Kind { Gripper, Fixed };
  Kind kind = Kind::Gripper;
  int gripper = -1;
  Vec3 fixed;

  static AnchorRef at_gripper(int g) { return {Kind::Gripper, g, {}}; }
  static AnchorRef at_point(const Vec3& p) { return {Kind::Fixed, -1, p}; }
};

enum class BindingKind { Free, SharedVariable, DerivedValue };

// Boundary-condition binding of one catenary end. derived_slope (and a
// governance override) hold the physical slope dz/dx along the member's +u
// direction; the chord-relative conversion happens at NLP assembly.
struct EndBinding {
  BindingKind kind = BindingKind::Free;
  int shared_index = -1;
  double derived_slope = 0.0;
  bool governed = false;
  double governed_slope = 0.0;

  static EndBinding free_end() { return {}; }
  static EndBinding shared(int j) {
    return {BindingKind::SharedVariable, j, 0.0, false, 0.0};
  }
  static EndBinding derived() {
    return {BindingKind::DerivedValue, -1, 0.0, false, 0.0};
  }
};

struct CatenarySpec {
  int id = -1;
  CatenaryKind kind = CatenaryKind::Edge;
  AnchorRef anchor_a, anchor_b;
  double set_length = 0.0;
  EndBinding bc_a, bc_b;
  MemberStatus status = MemberStatus::Active;
  int parent = -1;
  std::string name;
};

enum class ShearState { None, Shearing };

// Quadrilateral between four grippers: corners ordered (r,c), (r,c+1),
// (r+1,c+1), (r+1,c); edges ordered bottom, right, top, left; diagonals
// main (corner0 -> corner2) then anti (corner1 -> corner3).
struct UnitCell {
  std::array<int, 4> corners{};
  std::array<int, 4> edges{};
  std::array<int, 2> diagonals{};
  ShearState shear = ShearState::None;
  int shearing_slot = -1;  // 0 = main, 1 = anti
  double gamma = 0.0;      // rad
  double side = 0.0;       // nominal cell side a
};

// Empirical shear reaction: polynomial in gamma with user coefficients,
// F = sum_k coefficients[k] * gamma^(k+1). Default linear 1 N/rad stands in
// for unpublished shear-test data.
struct ShearModel {
  std::vector<double> coefficients{1.0};

  double reaction(double gamma) const {
    double f = 0.0;
    for (std::size_t k = coefficients.size(); k-- > 0;) {
      f = (f + coefficients[k]) * gamma;
    }
    return f;
  }
};

struct CatenaryNetwork {
  GripperGrid grid;
  double cell_length = 0.0;
  std::vector<CatenarySpec> catenaries;
  std::vector<UnitCell> cells;
  int n_shared_slopes = 0;
  int n_base = 0;  // members of the pristine lattice (before splits)
  ShearModel shear_model;

  CatenarySpec& spec(int id) { return catenaries[static_cast<std::size_t>(id)]; }
  const CatenarySpec& spec(int id) const {
    return catenaries[static_cast<std::size_t>(id)];
  }
  Vec3 anchor_position(const AnchorRef& a,
                       const std::vector<Vec3>& positions) const {
    return a.kind == AnchorRef::Kind::Gripper
               ? positions[static_cast<std::size_t>(a.gripper)]
               : a.fixed;
  }
};

// Lattice construction: edges between 4-neighbours with L_set = cell_length,
// two diagonals per cell with L_set = cell_length * sqrt(2), slope-rule
// bindings assigned (free boundary ends, shared colinear interior pairs,
// derived diagonal ends).
CatenaryNetwork build_network(const GripperGrid& grid, double cell_length,
                              ShearModel shear_model = {});

struct ShearDecision {
  ShearState state = ShearState::None;
  int slot = -1;
  double gamma = 0.0;
};

// Shear test for one cell from current gripper distances: a diagonal whose
// gripper distance exceeds its prescribed length marks the cell shearing;
// if both exceed, the larger relative excess wins (tie -> lower slot).
// gamma = 2 asin(d / 2a) - pi/2 from the extended diagonal.
ShearDecision detect_shear(const CatenaryNetwork& net, const UnitCell& cell,
                           const std::vector<Vec3>& positions);

// Parallelogram diagonals at shear angle gamma:
// d_long = 2 a sin((pi/2 + gamma)/2), d_short = 2 a sin((pi/2 - gamma)/2).
std::pair<double, double> shear_kinematics(double side, double gamma);

// (slope at A, slope at B), physical dz/dx along the edge's +u direction.
// Empty optional marks an unsolved edge.
using EdgeSlopeProvider =
    std::function<std::optional<std::pair<double, double>>(int edge_id)>;

struct DiagonalSlopes {
  // Physical slope along each diagonal's +u at its A and B ends.
  std::array<double, 2> main{};
  std::array<double, 2> anti{};
};

// Derived diagonal end slopes: at each corner, the mean of the two adjacent
// cell edges' end slopes (taken pointing away from the corner), projected
// onto the diagonal direction by the cosine of the horizontal angle.
// Throws UnsolvedEdges when the provider has no slopes for a cell edge.
DiagonalSlopes diagonal_slopes(const CatenaryNetwork& net, const UnitCell& cell,
                               const std::vector<Vec3>& positions,
                               const EdgeSlopeProvider& edge_slopes);

// Slope governance of a shearing cell: every edge end anchored at one of the
// shearing diagonal's grippers receives a prescribed slope equal to the
// diagonal's chord slope (oriented away from the shared gripper).
void apply_shear_governance(CatenaryNetwork& net, const UnitCell& cell,
                            const std::vector<Vec3>& positions);

// Clears per-iteration governance overrides.
void reset_governance(CatenaryNetwork& net);

}  // namespace drape
