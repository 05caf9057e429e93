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

#include <map>
#include <optional>
#include <vector>

#include "drape/assembly.hpp"
#include "drape/catenary.hpp"
#include "drape/contact.hpp"
#include "drape/mold.hpp"
#include "drape/solver.hpp"

namespace drape {

struct Trajectory {
  std::vector<Vec3> start;
  std::vector<Vec3> target;
  int n_steps = 1;
};

// Gripper positions at 1-based iteration k: linear interpolation with k = 1
// at the start and k = n_steps at the target.
std::vector<Vec3> linear_trajectory(const Trajectory& t, int k);

struct IterationFlags {
  bool slack_present = false;
  bool shear_active = false;
  bool contact_established = false;
  bool wrinkle_indicated = false;
  bool bridging_indicated = false;
  bool solver_failed = false;
};

enum class RenderMode { Catenary, Straight };

struct MemberState {
  int id = -1;
  std::string name;
  CatenaryKind kind = CatenaryKind::Edge;
  RenderMode mode = RenderMode::Catenary;
  double set_length = 0.0;
  double chord = 0.0;
  Polyline polyline;
  std::optional<CatenarySolution> solution;
};

struct CellState {
  ShearState shear = ShearState::None;
  int shearing_slot = -1;
  double gamma = 0.0;
  double reaction = 0.0;  // N, empirical shear reaction of the straight diagonal
  double diagonal_separation = 0.0;  // m, center z gap after reconciliation
  bool has_contact = false;          // any member of the cell has frozen points
};

struct SolveSummary {
  SqpStatus status = SqpStatus::Converged;
  int iterations = 0;
  double objective = 0.0;
  double max_constraint_residual = 0.0;
  double kkt_residual = 0.0;
  int n_variables = 0;
  int n_constraints = 0;
};

struct FabricState {
  int iteration = 0;
  std::vector<Vec3> gripper_positions;
  std::vector<MemberState> members;
  std::vector<CellState> cells;
  ContactRegistry registry;                  // snapshot
  std::vector<ContactSegment> new_segments;  // frozen this iteration
  SolveSummary solve;
  IterationFlags flags;
};

struct DrapeTrace {
  std::vector<FabricState> states;
  std::vector<double> seconds;  // wall time per iteration
};

struct SimulationSetup {
  GripperGrid grid;  // positions = start configuration
  double cell_length = 0.0;
  Trajectory trajectory;
  Material material;
  MoldSurface mold = MoldSurface::plane(0.0, 0.0);
  ShearModel shear_model;
  SqpOptions sqp;
  double contact_tol = kDefaultContactTol;
  double wrinkle_separation_tol = 2e-3;  // m
  double slack_ratio_tol = 0.02;
  double reconcile_tol = 1e-4;  // m, diagonal center coincidence
  int n_points = kDefaultSamples;
};

// Trajectory executor; owns the evolving network, contact registry and
// warm-start state. Flags latch across the produced states.
class Simulator {
 public:
  explicit Simulator(const SimulationSetup& setup);

  FabricState step(const std::vector<Vec3>& new_positions);

  const CatenaryNetwork& network() const { return net_; }
  const ContactRegistry& registry() const { return registry_; }

 private:
  SimulationSetup setup_;
  CatenaryNetwork net_;
  ContactRegistry registry_;
  std::vector<Vec3> positions_;
  std::map<int, double> h_prev_;
  std::map<int, double> s_prev_;
  std::map<int, CatenarySolution> prev_solutions_;
  IterationFlags latched_;
  int iteration_ = 0;

  int root_id(int id) const;
  std::optional<std::pair<double, double>> member_end_slopes(
      int id, const std::map<int, CatenarySolution>& solutions) const;
  std::optional<std::pair<double, double>> edge_reference_slopes(int edge_id);
  void refresh_diagonal_bindings();
  void update_shear_state();
  void screen_members();
  std::pair<BoundaryCondition, BoundaryCondition> resolve_bcs(
      const CatenarySpec& s, const LocalFrame& frame) const;
  Polyline straight_polyline(const CatenarySpec& s) const;
  void commit_contact(FabricState& state,
                      std::map<int, CatenarySolution>& solutions);
  void reconcile_cells(FabricState& state);
  bool cell_has_contact(const UnitCell& cell) const;
};

// Runs all iterations; diagnostic flags never abort the run.
DrapeTrace run(const SimulationSetup& setup);

struct DiagonalReconcile {
  bool changed = false;
  Polyline adjusted;  // replacement for the lower diagonal when changed
};

// Post-processing of a non-shearing cell whose diagonals miss each other at
// the center: the lower diagonal is re-evaluated as two half spans (each
// carrying half the set length) meeting the upper diagonal's center point.
// No change when the centers already coincide within eps.
DiagonalReconcile reconcile_diagonals(const Vec3& lower_a, const Vec3& lower_b,
                                      double lower_set_length,
                                      double slope_a_phys, double slope_b_phys,
                                      const Polyline& upper,
                                      const Polyline& lower,
                                      const Material& material, double eps,
                                      int n_points);

// Wrinkle proxy: a contacted cell whose diagonal centers stay separated
// beyond w_tol, or a slack member (ratio above r_tol) with both ends
// committed to the mold region.
bool wrinkle_indicator(const FabricState& state, const MoldSurface& mold,
                       double w_tol, double r_tol, double contact_tol);

}  // namespace drape
