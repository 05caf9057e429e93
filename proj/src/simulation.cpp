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

#include "drape/simulation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace drape {
namespace {

constexpr double kTautMargin = 1e-12;   // m
constexpr double kSlackFlagTol = 1e-9;  // m

Polyline straight_line(const Vec3& a, const Vec3& b, int n) {
  Polyline p;
  p.points.resize(static_cast<std::size_t>(n));
  const double inv = 1.0 / static_cast<double>(n - 1);
  for (int i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * inv;
    p.points[static_cast<std::size_t>(i)] = a + t * (b - a);
  }
  p.points.front() = a;
  p.points.back() = b;
  return p;
}

}  // namespace

std::vector<Vec3> linear_trajectory(const Trajectory& t, int k) {
  if (t.start.size() != t.target.size())
    throw Error(ErrorCode::MismatchedGrippers,
                "trajectory start/target gripper counts differ");
  if (t.n_steps < 1)
    throw Error(ErrorCode::InvalidArgument, "trajectory needs n_steps >= 1");
  const double s =
      t.n_steps == 1 ? 0.0
                     : static_cast<double>(k - 1) /
                           static_cast<double>(t.n_steps - 1);
  std::vector<Vec3> out(t.start.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = t.start[i] + s * (t.target[i] - t.start[i]);
  }
  // Exact endpoints; the degenerate single-step case sits at the start.
  if (k == t.n_steps && t.n_steps > 1) out = t.target;
  if (k == 1) out = t.start;
  return out;
}

Simulator::Simulator(const SimulationSetup& setup)
    : setup_(setup),
      net_(build_network(setup.grid, setup.cell_length, setup.shear_model)),
      positions_(setup.grid.positions) {
  setup.material.validate();
}

int Simulator::root_id(int id) const {
  int cur = id;
  while (net_.spec(cur).parent >= 0) cur = net_.spec(cur).parent;
  return cur;
}

Polyline Simulator::straight_polyline(const CatenarySpec& s) const {
  return straight_line(net_.anchor_position(s.anchor_a, positions_),
                       net_.anchor_position(s.anchor_b, positions_),
                       setup_.n_points);
}

// Physical end slopes (dz/dx along +u) of a live member, from a solution
// when one exists, from the chord for straight members, or from a bootstrap
// solve at the warm-start variables.
// Chord-relative boundary conditions of a member at the warm-start variable
// values (shared slopes from the previous iteration, governed and derived
// values as bound).
std::pair<BoundaryCondition, BoundaryCondition> Simulator::resolve_bcs(
    const CatenarySpec& s, const LocalFrame& frame) const {
  const double chord = frame.chord_slope();
  auto bc_of = [&](const EndBinding& bc) {
    if (bc.governed)
      return BoundaryCondition::slope(bc.governed_slope - chord);
    switch (bc.kind) {
      case BindingKind::Free:
        return BoundaryCondition::free();
      case BindingKind::SharedVariable: {
        auto sit = s_prev_.find(bc.shared_index);
        const double sv = sit == s_prev_.end() ? 0.0 : sit->second;
        return BoundaryCondition::slope(sv - chord);
      }
      case BindingKind::DerivedValue:
      default:
        return BoundaryCondition::slope(bc.derived_slope - chord);
    }
  };
  return {bc_of(s.bc_a), bc_of(s.bc_b)};
}

std::optional<std::pair<double, double>> Simulator::member_end_slopes(
    int id, const std::map<int, CatenarySolution>& solutions) const {
  const CatenarySpec& s = net_.spec(id);
  if (s.status == MemberStatus::Taut || s.status == MemberStatus::Shearing) {
    const Vec3 a = net_.anchor_position(s.anchor_a, positions_);
    const Vec3 b = net_.anchor_position(s.anchor_b, positions_);
    const double h = (b - a).horizontal_norm();
    if (h < kSpanEpsilon) return std::pair<double, double>{0.0, 0.0};
    const double m = (b.z - a.z) / h;
    return std::pair<double, double>{m, m};
  }
  auto it = solutions.find(id);
  if (it == solutions.end()) return std::nullopt;
  const CatenarySolution& sol = it->second;
  const double chord = sol.frame.chord_slope();
  return std::pair<double, double>{end_values(sol, End::A).first + chord,
                                   end_values(sol, End::B).first + chord};
}

// Reference slopes of a pristine-lattice edge at its two gripper ends,
// descending the split tree to the live gripper-side member. A side whose
// fabric froze down to the gripper reports the mold slope.
std::optional<std::pair<double, double>> Simulator::edge_reference_slopes(
    int edge_id) {
  const CatenarySpec& root = net_.spec(edge_id);
  double out[2];
  for (int side = 0; side < 2; ++side) {
    int cur = edge_id;
    while (true) {
      auto it = registry_.splits.find(cur);
      if (it == registry_.splits.end()) break;
      const int child = (side == 0) ? it->second.first : it->second.second;
      if (child < 0) {
        cur = -1;
        break;
      }
      cur = child;
    }
    if (cur < 0) {
      // Frozen at this gripper; the ply follows the mold there.
      const AnchorRef& anchor = (side == 0) ? root.anchor_a : root.anchor_b;
      const Vec3 g = net_.anchor_position(anchor, positions_);
      const Vec3 a = net_.anchor_position(root.anchor_a, positions_);
      const Vec3 b = net_.anchor_position(root.anchor_b, positions_);
      const double h = (b - a).horizontal_norm();
      if (h < kSpanEpsilon) {
        out[side] = 0.0;
      } else {
        double ux = (b.x - a.x) / h, uy = (b.y - a.y) / h;
        try {
          out[side] = setup_.mold.slope_along(g.x, g.y, ux, uy);
        } catch (const Error&) {
          out[side] = 0.0;
        }
      }
      continue;
    }
    auto slopes = member_end_slopes(cur, prev_solutions_);
    if (!slopes) {
      // Bootstrap: solve the member at its warm-start variables.
      const CatenarySpec& s = net_.spec(cur);
      try {
        const LocalFrame frame =
            LocalFrame::between(net_.anchor_position(s.anchor_a, positions_),
                                net_.anchor_position(s.anchor_b, positions_));
        const auto [bc_a, bc_b] = resolve_bcs(s, frame);
        auto hit = h_prev_.find(cur);
        const double H =
            hit != h_prev_.end()
                ? hit->second
                : initial_reaction_estimate(frame, s.set_length,
                                            setup_.material);
        const CatenarySolution sol =
            solve_catenary(frame, H, bc_a, bc_b, setup_.material);
        const double cs = frame.chord_slope();
        slopes = std::pair<double, double>{
            end_values(sol, End::A).first + cs,
            end_values(sol, End::B).first + cs};
      } catch (const Error&) {
        return std::nullopt;
      }
    }
    // The chain member at this side shares the root's orientation; its
    // end at the gripper is end A for side 0, end B for side 1.
    out[side] = (side == 0) ? slopes->first : slopes->second;
  }
  return std::pair<double, double>{out[0], out[1]};
}

void Simulator::update_shear_state() {
  for (std::size_t ci = 0; ci < net_.cells.size(); ++ci) {
    UnitCell& cell = net_.cells[ci];
    if (cell.shear == ShearState::None) {
      const ShearDecision d = detect_shear(net_, cell, positions_);
      if (d.state == ShearState::Shearing) {
        cell.shear = ShearState::Shearing;
        cell.shearing_slot = d.slot;
        cell.gamma = d.gamma;
        net_.spec(cell.diagonals[static_cast<std::size_t>(d.slot)]).status =
            MemberStatus::Shearing;
      }
      continue;
    }
    // Latched: recompute gamma from the latched diagonal's current extension.
    const CatenarySpec& d =
        net_.spec(cell.diagonals[static_cast<std::size_t>(cell.shearing_slot)]);
    const double dist =
        distance(net_.anchor_position(d.anchor_a, positions_),
                 net_.anchor_position(d.anchor_b, positions_));
    const double arg = std::clamp(dist / (2.0 * cell.side), -1.0, 1.0);
    cell.gamma = 2.0 * std::asin(arg) - M_PI / 2.0;
  }

  // Parallelogram kinematics: the non-shearing diagonal of a shearing cell
  // keeps the shortened effective length, unless it was already split.
  for (const UnitCell& cell : net_.cells) {
    if (cell.shear != ShearState::Shearing) continue;
    const int other_slot = 1 - cell.shearing_slot;
    const int other_id = cell.diagonals[static_cast<std::size_t>(other_slot)];
    CatenarySpec& other = net_.spec(other_id);
    if (other.status == MemberStatus::SplitParent ||
        other.status == MemberStatus::FullyFrozen)
      continue;
    if (registry_.splits.count(other_id) > 0) continue;
    other.set_length = shear_kinematics(cell.side, cell.gamma).second;
  }
}

void Simulator::screen_members() {
  for (CatenarySpec& s : net_.catenaries) {
    if (s.status == MemberStatus::SplitParent ||
        s.status == MemberStatus::FullyFrozen ||
        s.status == MemberStatus::Shearing)
      continue;
    const Vec3 a = net_.anchor_position(s.anchor_a, positions_);
    const Vec3 b = net_.anchor_position(s.anchor_b, positions_);
    const double chord = distance(a, b);
    const bool degenerate = (b - a).horizontal_norm() < kSpanEpsilon;
    if (degenerate || s.set_length <= chord + kTautMargin) {
      s.status = MemberStatus::Taut;
      continue;
    }
    // A bending-stiff span cannot absorb arbitrary slack: the attainable
    // length peaks at the reaction floor. Members holding more are excluded
    // from the length-constraint set and rendered at maximum sag.
    try {
      const LocalFrame frame = LocalFrame::between(a, b);
      const auto [bc_a, bc_b] = resolve_bcs(s, frame);
      const double l_max = catenary_length(
          solve_catenary(frame, kHMin, bc_a, bc_b, setup_.material),
          setup_.n_points);
      s.status = (s.set_length > l_max) ? MemberStatus::OverSlack
                                        : MemberStatus::Active;
    } catch (const Error&) {
      s.status = MemberStatus::Taut;
    }
  }
}

void Simulator::refresh_diagonal_bindings() {
  for (const UnitCell& cell : net_.cells) {
    // Collect reference slopes of the four (possibly split) cell edges.
    bool have_all = true;
    std::array<std::optional<std::pair<double, double>>, 4> cache;
    for (int k = 0; k < 4 && have_all; ++k) {
      cache[static_cast<std::size_t>(k)] =
          edge_reference_slopes(cell.edges[static_cast<std::size_t>(k)]);
      if (!cache[static_cast<std::size_t>(k)]) have_all = false;
    }
    if (!have_all) continue;  // keep previous derived values

    DiagonalSlopes ds;
    try {
      ds = diagonal_slopes(net_, cell, positions_,
                           [&cache, &cell](int edge_id)
                               -> std::optional<std::pair<double, double>> {
                             for (int k = 0; k < 4; ++k) {
                               if (cell.edges[static_cast<std::size_t>(k)] ==
                                   edge_id)
                                 return cache[static_cast<std::size_t>(k)];
                             }
                             return std::nullopt;
                           });
    } catch (const Error&) {
      continue;
    }
    for (int slot = 0; slot < 2; ++slot) {
      const int id = cell.diagonals[static_cast<std::size_t>(slot)];
      CatenarySpec& d = net_.spec(id);
      if (d.status != MemberStatus::Active &&
          d.status != MemberStatus::Taut &&
          d.status != MemberStatus::OverSlack)
        continue;
      if (registry_.splits.count(id) > 0) continue;
      const auto& phys = (slot == 0) ? ds.main : ds.anti;
      d.bc_a.derived_slope = phys[0];
      d.bc_b.derived_slope = phys[1];
    }
  }
}

bool Simulator::cell_has_contact(const UnitCell& cell) const {
  for (const ContactSegment& seg : registry_.segments) {
    const int root = root_id(seg.catenary_id);
    for (int e : cell.edges)
      if (root == e) return true;
    for (int d : cell.diagonals)
      if (root == d) return true;
  }
  return false;
}

void Simulator::commit_contact(FabricState& state,
                               std::map<int, CatenarySolution>& solutions) {
  // Snapshot ids first: commits append new members. Shearing diagonals do
  // not take part in contact.
  std::vector<int> ids;
  for (const CatenarySpec& s : net_.catenaries) {
    if (s.status == MemberStatus::Active || s.status == MemberStatus::Taut ||
        s.status == MemberStatus::OverSlack)
      ids.push_back(s.id);
  }
  for (int id : ids) {
    const CatenarySpec& spec = net_.spec(id);
    const MemberState* member = nullptr;
    for (const MemberState& ms : state.members) {
      if (ms.id == id) {
        member = &ms;
        break;
      }
    }
    if (member == nullptr) continue;

    ContactScan scan;
    try {
      scan = detect_contact(member->polyline, setup_.mold, setup_.contact_tol);
    } catch (const Error&) {
      continue;  // polyline left the mold domain; no contact statement
    }
    if (scan.multiple) state.flags.bridging_indicated = true;
    if (!scan.range) continue;
    IndexRange range = *scan.range;
    const int n = static_cast<int>(member->polyline.size());

    // A single-sample range sitting on an already-frozen anchor carries no
    // new contact.
    if (range.first == range.last) {
      if (range.first == 0 && spec.anchor_a.kind == AnchorRef::Kind::Fixed)
        continue;
      if (range.last == n - 1 && spec.anchor_b.kind == AnchorRef::Kind::Fixed)
        continue;
    }

    SplitOutcome outcome =
        split_catenary(spec, member->polyline, range, setup_.mold);
    outcome.segment.iteration = state.iteration;

    CatenarySpec& parent = net_.spec(id);
    parent.status = (outcome.kind == SplitOutcome::Kind::Full)
                        ? MemberStatus::FullyFrozen
                        : MemberStatus::SplitParent;
    int left_id = -1, right_id = -1;
    const double h_seed = h_prev_.count(id) ? h_prev_.at(id) : -1.0;
    if (outcome.left) {
      outcome.left->id = static_cast<int>(net_.catenaries.size());
      left_id = outcome.left->id;
      net_.catenaries.push_back(*outcome.left);
      if (h_seed > 0.0) h_prev_[left_id] = h_seed;
    }
    if (outcome.right) {
      outcome.right->id = static_cast<int>(net_.catenaries.size());
      right_id = outcome.right->id;
      net_.catenaries.push_back(*outcome.right);
      if (h_seed > 0.0) h_prev_[right_id] = h_seed;
    }
    registry_.splits[id] = {left_id, right_id};
    registry_.segments.push_back(outcome.segment);
    state.new_segments.push_back(outcome.segment);
    solutions.erase(id);
    h_prev_.erase(id);
    state.flags.contact_established = true;
  }
}

DiagonalReconcile reconcile_diagonals(const Vec3& lower_a, const Vec3& lower_b,
                                      double lower_set_length,
                                      double slope_a_phys, double slope_b_phys,
                                      const Polyline& upper,
                                      const Polyline& lower,
                                      const Material& material, double eps,
                                      int n_points) {
  DiagonalReconcile out;
  const Vec3 upper_center = upper[upper.size() / 2];
  const Vec3 lower_center = lower[lower.size() / 2];
  if (std::abs(upper_center.z - lower_center.z) <= eps) return out;

  // Half sample counts chosen so the joined polyline keeps n_points.
  const int n_first = (n_points + 1) / 2;
  const int n_second = n_points - n_first + 1;
  const double l_half = 0.5 * lower_set_length;

  auto solve_half = [&](const Vec3& from, const Vec3& to,
                        double slope_phys_at_end, bool slope_at_from,
                        int n_half) -> Polyline {
    const double h = (to - from).horizontal_norm();
    const double chord = distance(from, to);
    if (h < kSpanEpsilon || l_half <= chord + kTautMargin)
      return straight_line(from, to, n_half);
    const LocalFrame frame = LocalFrame::between(from, to);
    const double cslope = frame.chord_slope();
    const BoundaryCondition bc_from =
        slope_at_from ? BoundaryCondition::slope(slope_phys_at_end - cslope)
                      : BoundaryCondition::free();
    const BoundaryCondition bc_to =
        slope_at_from ? BoundaryCondition::free()
                      : BoundaryCondition::slope(slope_phys_at_end - cslope);
    // Bisection on the monotone length-reaction relation.
    auto len = [&](double H) {
      return catenary_length(solve_catenary(frame, H, bc_from, bc_to, material),
                             n_half);
    };
    double lo = kHMin;
    if (len(lo) < l_half) return straight_line(from, to, n_half);
    double hi =
        std::max(2.0 * initial_reaction_estimate(frame, l_half, material), 1.0);
    int guard = 0;
    while (len(hi) > l_half && guard++ < 60) hi *= 4.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (len(mid) > l_half)
        lo = mid;
      else
        hi = mid;
      if (hi - lo <= 1e-12 * std::max(1.0, hi)) break;
    }
    return sample(
        solve_catenary(frame, 0.5 * (lo + hi), bc_from, bc_to, material),
        n_half);
  };

  const Polyline first_half =
      solve_half(lower_a, upper_center, slope_a_phys, true, n_first);
  const Polyline second_half =
      solve_half(upper_center, lower_b, slope_b_phys, false, n_second);
  out.changed = true;
  out.adjusted.points = first_half.points;
  out.adjusted.points.insert(out.adjusted.points.end(),
                             second_half.points.begin() + 1,
                             second_half.points.end());
  return out;
}

void Simulator::reconcile_cells(FabricState& state) {
  auto member_of = [&state](int id) -> MemberState* {
    for (MemberState& ms : state.members)
      if (ms.id == id) return &ms;
    return nullptr;
  };

  for (std::size_t ci = 0; ci < net_.cells.size(); ++ci) {
    const UnitCell& cell = net_.cells[ci];
    CellState& cs = state.cells[ci];
    MemberState* main = member_of(cell.diagonals[0]);
    MemberState* anti = member_of(cell.diagonals[1]);
    if (main == nullptr || anti == nullptr) {
      cs.diagonal_separation = 0.0;
      continue;  // a diagonal was split/frozen; contact tracks the gap
    }
    const double dz = main->polyline[main->polyline.size() / 2].z -
                      anti->polyline[anti->polyline.size() / 2].z;
    cs.diagonal_separation = std::abs(dz);
    if (cell.shear == ShearState::Shearing) continue;  // no reconciliation
    if (cs.diagonal_separation <= setup_.reconcile_tol) continue;

    MemberState* lower = (dz < 0.0) ? main : anti;
    MemberState* upper = (dz < 0.0) ? anti : main;
    const CatenarySpec& spec = net_.spec(lower->id);
    const DiagonalReconcile rec = reconcile_diagonals(
        net_.anchor_position(spec.anchor_a, positions_),
        net_.anchor_position(spec.anchor_b, positions_), spec.set_length,
        spec.bc_a.derived_slope, spec.bc_b.derived_slope, upper->polyline,
        lower->polyline, setup_.material, setup_.reconcile_tol,
        setup_.n_points);
    if (rec.changed) {
      lower->polyline = rec.adjusted;
      cs.diagonal_separation = 0.0;
    }
  }
}

FabricState Simulator::step(const std::vector<Vec3>& new_positions) {
  if (new_positions.size() != positions_.size())
    throw Error(ErrorCode::MismatchedGrippers,
                "step: gripper count changed");
  ++iteration_;
  positions_ = new_positions;
  net_.grid.positions = new_positions;

  FabricState state;
  state.iteration = iteration_;
  state.gripper_positions = positions_;
  state.flags = latched_;
  state.flags.slack_present = false;
  state.flags.shear_active = false;
  state.flags.solver_failed = false;

  update_shear_state();
  reset_governance(net_);
  for (const UnitCell& cell : net_.cells)
    apply_shear_governance(net_, cell, positions_);
  refresh_diagonal_bindings();
  screen_members();

  // Assemble and solve the reaction-force problem.
  std::map<int, CatenarySolution> solutions;
  std::optional<NlpProblem> problem;
  try {
    problem = assemble_nlp(net_, positions_, setup_.material, setup_.n_points);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::EmptyProblem) throw;
  }
  if (problem) {
    const int m = problem->n_constraints();
    Eigen::VectorXd x0(problem->n_vars());
    for (int i = 0; i < m; ++i) {
      const auto& con = problem->constraints[static_cast<std::size_t>(i)];
      auto it = h_prev_.find(con.catenary_id);
      x0(i) = it != h_prev_.end()
                  ? it->second
                  : initial_reaction_estimate(con.frame, con.set_length,
                                              setup_.material);
    }
    for (std::size_t v = 0; v < problem->shared_variable_ids.size(); ++v) {
      auto it = s_prev_.find(problem->shared_variable_ids[v]);
      x0(m + static_cast<int>(v)) = it != s_prev_.end() ? it->second : 0.0;
    }

    const SqpResult result = sqp_solve(*problem, x0, setup_.sqp);
    state.solve.status = result.status;
    state.solve.iterations = result.iterations;
    state.solve.objective = result.objective;
    state.solve.max_constraint_residual = result.max_constraint_residual;
    state.solve.kkt_residual = result.kkt_residual;
    state.solve.n_variables = problem->n_vars();
    state.solve.n_constraints = m;
    if (result.status != SqpStatus::Converged)
      state.flags.solver_failed = true;

    // On failure the previous iteration's variables are carried forward.
    const Eigen::VectorXd& x =
        result.status == SqpStatus::Converged ? result.x : x0;
    for (int i = 0; i < m; ++i) {
      const auto& con = problem->constraints[static_cast<std::size_t>(i)];
      h_prev_[con.catenary_id] = x(i);
      solutions.emplace(con.catenary_id, problem->member_solution(i, x));
    }
    for (std::size_t v = 0; v < problem->shared_variable_ids.size(); ++v) {
      s_prev_[problem->shared_variable_ids[v]] = x(m + static_cast<int>(v));
    }
  }

  // Sample every live member.
  for (const CatenarySpec& s : net_.catenaries) {
    if (s.status == MemberStatus::SplitParent ||
        s.status == MemberStatus::FullyFrozen)
      continue;
    MemberState ms;
    ms.id = s.id;
    ms.name = s.name;
    ms.kind = s.kind;
    ms.set_length = s.set_length;
    ms.chord = distance(net_.anchor_position(s.anchor_a, positions_),
                        net_.anchor_position(s.anchor_b, positions_));
    if (s.status == MemberStatus::OverSlack) {
      // Maximum-sag shape at the reaction floor; the residual slack is
      // wrinkled material the model cannot place.
      try {
        const LocalFrame frame =
            LocalFrame::between(net_.anchor_position(s.anchor_a, positions_),
                                net_.anchor_position(s.anchor_b, positions_));
        const auto [bc_a, bc_b] = resolve_bcs(s, frame);
        solutions.emplace(s.id, solve_catenary(frame, kHMin, bc_a, bc_b,
                                               setup_.material));
      } catch (const Error&) {
      }
    }
    auto it = solutions.find(s.id);
    if ((s.status == MemberStatus::Active ||
         s.status == MemberStatus::OverSlack) &&
        it != solutions.end()) {
      ms.mode = RenderMode::Catenary;
      ms.solution = it->second;
      ms.polyline = sample(it->second, setup_.n_points);
      if (s.set_length - ms.chord > kSlackFlagTol)
        state.flags.slack_present = true;
    } else {
      ms.mode = RenderMode::Straight;
      ms.polyline = straight_polyline(s);
    }
    state.members.push_back(std::move(ms));
  }

  // Cell diagnostics before contact/reconciliation.
  state.cells.resize(net_.cells.size());
  for (std::size_t ci = 0; ci < net_.cells.size(); ++ci) {
    const UnitCell& cell = net_.cells[ci];
    CellState& cs = state.cells[ci];
    cs.shear = cell.shear;
    cs.shearing_slot = cell.shearing_slot;
    cs.gamma = cell.gamma;
    cs.reaction = cell.shear == ShearState::Shearing
                      ? net_.shear_model.reaction(cell.gamma)
                      : 0.0;
    if (cell.shear == ShearState::Shearing) state.flags.shear_active = true;
  }

  commit_contact(state, solutions);
  reconcile_cells(state);

  for (std::size_t ci = 0; ci < net_.cells.size(); ++ci) {
    state.cells[ci].has_contact = cell_has_contact(net_.cells[ci]);
  }
  state.registry = registry_;

  if (wrinkle_indicator(state, setup_.mold, setup_.wrinkle_separation_tol,
                        setup_.slack_ratio_tol, setup_.contact_tol)) {
    state.flags.wrinkle_indicated = true;
  }

  // Latch the monotone flags.
  latched_.contact_established |= state.flags.contact_established;
  latched_.wrinkle_indicated |= state.flags.wrinkle_indicated;
  latched_.bridging_indicated |= state.flags.bridging_indicated;
  state.flags.contact_established = latched_.contact_established;
  state.flags.wrinkle_indicated = latched_.wrinkle_indicated;
  state.flags.bridging_indicated = latched_.bridging_indicated;

  prev_solutions_ = solutions;
  return state;
}

bool wrinkle_indicator(const FabricState& state, const MoldSurface& mold,
                       double w_tol, double r_tol, double contact_tol) {
  // Contacted cells with non-coincident diagonal centers.
  for (std::size_t ci = 0; ci < state.cells.size(); ++ci) {
    const CellState& cs = state.cells[ci];
    if (cs.has_contact && cs.diagonal_separation > w_tol) return true;
  }
  // Slack members whose whole span is committed to the mold region.
  for (const MemberState& ms : state.members) {
    if (ms.chord <= 0.0) continue;
    const double ratio = (ms.set_length - ms.chord) / ms.chord;
    if (ratio <= r_tol) continue;
    bool committed = true;
    for (const Vec3* p : {&ms.polyline.points.front(),
                          &ms.polyline.points.back()}) {
      try {
        if (mold.vertical_clearance(*p) > contact_tol) committed = false;
      } catch (const Error&) {
        committed = false;
      }
    }
    if (committed) return true;
  }
  return false;
}

DrapeTrace run(const SimulationSetup& setup) {
  if (setup.trajectory.start.size() != setup.grid.positions.size() ||
      setup.trajectory.target.size() != setup.grid.positions.size())
    throw Error(ErrorCode::MismatchedGrippers,
                "run: trajectory gripper count mismatch");
  Simulator sim(setup);
  DrapeTrace trace;
  trace.states.reserve(static_cast<std::size_t>(setup.trajectory.n_steps));
  for (int k = 1; k <= setup.trajectory.n_steps; ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    trace.states.push_back(sim.step(linear_trajectory(setup.trajectory, k)));
    const auto t1 = std::chrono::steady_clock::now();
    trace.seconds.push_back(
        std::chrono::duration<double>(t1 - t0).count());
  }
  return trace;
}

}  // namespace drape
