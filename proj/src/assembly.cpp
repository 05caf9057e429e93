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

#include "drape/assembly.hpp"

#include <algorithm>
#include <cmath>

namespace drape {

void GripperGrid::validate() const {
  if (n_rows < 1 || n_cols < 1 || n_rows * n_cols < 2)
    throw Error(ErrorCode::InvalidGrid, "grid needs at least 2 grippers");
  if (positions.size() != static_cast<std::size_t>(n_rows * n_cols))
    throw Error(ErrorCode::InvalidGrid, "grid position count mismatch");
  for (const Vec3& p : positions) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z))
      throw Error(ErrorCode::InvalidGrid, "grid positions must be finite");
  }
  if (!(slope_limit > 0.0))
    throw Error(ErrorCode::InvalidGrid, "slope_limit must be > 0");
}

CatenaryNetwork build_network(const GripperGrid& grid, double cell_length,
                              ShearModel shear_model) {
  grid.validate();
  if (!(cell_length > 0.0))
    throw Error(ErrorCode::InvalidGrid, "cell_length must be > 0");

  CatenaryNetwork net;
  net.grid = grid;
  net.cell_length = cell_length;
  net.shear_model = std::move(shear_model);
  const int R = grid.n_rows, C = grid.n_cols;

  auto add_member = [&net](CatenaryKind kind, AnchorRef a, AnchorRef b,
                           double L, const std::string& name) {
    CatenarySpec s;
    s.id = static_cast<int>(net.catenaries.size());
    s.kind = kind;
    s.anchor_a = a;
    s.anchor_b = b;
    s.set_length = L;
    s.name = name;
    net.catenaries.push_back(std::move(s));
    return net.catenaries.back().id;
  };

  // Row edges (along +c), then column edges (along +r).
  std::vector<std::vector<int>> row_edge(R, std::vector<int>(std::max(C - 1, 0)));
  std::vector<std::vector<int>> col_edge(std::max(R - 1, 0),
                                         std::vector<int>(C));
  for (int r = 0; r < R; ++r) {
    for (int c = 0; c + 1 < C; ++c) {
      row_edge[r][c] = add_member(
          CatenaryKind::Edge, AnchorRef::at_gripper(grid.index(r, c)),
          AnchorRef::at_gripper(grid.index(r, c + 1)), cell_length,
          "edge_r" + std::to_string(r) + "_c" + std::to_string(c) + "-c" +
              std::to_string(c + 1));
    }
  }
  for (int r = 0; r + 1 < R; ++r) {
    for (int c = 0; c < C; ++c) {
      col_edge[r][c] = add_member(
          CatenaryKind::Edge, AnchorRef::at_gripper(grid.index(r, c)),
          AnchorRef::at_gripper(grid.index(r + 1, c)), cell_length,
          "edge_c" + std::to_string(c) + "_r" + std::to_string(r) + "-r" +
              std::to_string(r + 1));
    }
  }

  // Shared slopes: colinear edge pairs across interior grippers, rows first.
  int n_shared = 0;
  for (int r = 0; r < R; ++r) {
    for (int c = 1; c + 1 < C; ++c) {
      const int j = n_shared++;
      net.catenaries[row_edge[r][c - 1]].bc_b = EndBinding::shared(j);
      net.catenaries[row_edge[r][c]].bc_a = EndBinding::shared(j);
    }
  }
  for (int c = 0; c < C; ++c) {
    for (int r = 1; r + 1 < R; ++r) {
      const int j = n_shared++;
      net.catenaries[col_edge[r - 1][c]].bc_b = EndBinding::shared(j);
      net.catenaries[col_edge[r][c]].bc_a = EndBinding::shared(j);
    }
  }
  net.n_shared_slopes = n_shared;

  // Unit cells with two diagonals each.
  const double diag_length = cell_length * std::sqrt(2.0);
  for (int r = 0; r + 1 < R; ++r) {
    for (int c = 0; c + 1 < C; ++c) {
      UnitCell cell;
      cell.corners = {grid.index(r, c), grid.index(r, c + 1),
                      grid.index(r + 1, c + 1), grid.index(r + 1, c)};
      cell.edges = {row_edge[r][c], col_edge[r][c + 1], row_edge[r + 1][c],
                    col_edge[r][c]};
      cell.side = cell_length;
      const std::string tag =
          "_r" + std::to_string(r) + "c" + std::to_string(c);
      const int d_main = add_member(
          CatenaryKind::Diagonal, AnchorRef::at_gripper(cell.corners[0]),
          AnchorRef::at_gripper(cell.corners[2]), diag_length, "diag" + tag);
      const int d_anti = add_member(
          CatenaryKind::Diagonal, AnchorRef::at_gripper(cell.corners[1]),
          AnchorRef::at_gripper(cell.corners[3]), diag_length,
          "anti" + tag);
      net.catenaries[d_main].bc_a = EndBinding::derived();
      net.catenaries[d_main].bc_b = EndBinding::derived();
      net.catenaries[d_anti].bc_a = EndBinding::derived();
      net.catenaries[d_anti].bc_b = EndBinding::derived();
      cell.diagonals = {d_main, d_anti};
      net.cells.push_back(cell);
    }
  }
  net.n_base = static_cast<int>(net.catenaries.size());
  return net;
}

ShearDecision detect_shear(const CatenaryNetwork& net, const UnitCell& cell,
                           const std::vector<Vec3>& positions) {
  ShearDecision decision;
  double best_excess = 0.0;
  for (int slot = 0; slot < 2; ++slot) {
    const CatenarySpec& d = net.spec(cell.diagonals[static_cast<std::size_t>(slot)]);
    const double dist = distance(net.anchor_position(d.anchor_a, positions),
                                 net.anchor_position(d.anchor_b, positions));
    const double excess = (dist - d.set_length) / d.set_length;
    if (dist > d.set_length && excess > best_excess) {
      best_excess = excess;
      decision.state = ShearState::Shearing;
      decision.slot = slot;
    }
  }
  if (decision.state == ShearState::Shearing) {
    const CatenarySpec& d =
        net.spec(cell.diagonals[static_cast<std::size_t>(decision.slot)]);
    const double dist = distance(net.anchor_position(d.anchor_a, positions),
                                 net.anchor_position(d.anchor_b, positions));
    const double s = std::clamp(dist / (2.0 * cell.side), -1.0, 1.0);
    decision.gamma = 2.0 * std::asin(s) - M_PI / 2.0;
  }
  return decision;
}

std::pair<double, double> shear_kinematics(double side, double gamma) {
  const double d_long = 2.0 * side * std::sin((M_PI / 2.0 + gamma) / 2.0);
  const double d_short = 2.0 * side * std::sin((M_PI / 2.0 - gamma) / 2.0);
  return {d_long, d_short};
}

namespace {

// Horizontal unit direction of a member, from anchor A to anchor B.
Vec3 horizontal_direction(const CatenaryNetwork& net, const CatenarySpec& s,
                          const std::vector<Vec3>& positions) {
  const Vec3 a = net.anchor_position(s.anchor_a, positions);
  const Vec3 b = net.anchor_position(s.anchor_b, positions);
  const Vec3 d = b - a;
  const double h = d.horizontal_norm();
  if (h < kSpanEpsilon)
    throw Error(ErrorCode::DegenerateSpan, "member with degenerate span: " +
                                               s.name);
  return {d.x / h, d.y / h, 0.0};
}

double chord_slope(const CatenaryNetwork& net, const CatenarySpec& s,
                   const std::vector<Vec3>& positions) {
  const Vec3 a = net.anchor_position(s.anchor_a, positions);
  const Vec3 b = net.anchor_position(s.anchor_b, positions);
  const Vec3 d = b - a;
  return d.z / d.horizontal_norm();
}

// Physical slope of an edge at a corner gripper, oriented away from the
// corner, together with the away-pointing horizontal direction.
struct AwaySlope {
  double slope;
  Vec3 dir;
};

AwaySlope edge_away_slope(const CatenaryNetwork& net, const CatenarySpec& e,
                          int corner_gripper,
                          const std::vector<Vec3>& positions,
                          const std::pair<double, double>& end_slopes) {
  const Vec3 u = horizontal_direction(net, e, positions);
  const bool at_a = (e.anchor_a.kind == AnchorRef::Kind::Gripper &&
                     e.anchor_a.gripper == corner_gripper);
  if (at_a) return {end_slopes.first, u};
  return {-end_slopes.second, {-u.x, -u.y, 0.0}};
}

}  // namespace

DiagonalSlopes diagonal_slopes(const CatenaryNetwork& net, const UnitCell& cell,
                               const std::vector<Vec3>& positions,
                               const EdgeSlopeProvider& edge_slopes) {
  // Adjacent cell edges at each corner slot: (bottom,left), (bottom,right),
  // (right,top), (top,left).
  static constexpr int kCornerEdges[4][2] = {{0, 3}, {0, 1}, {1, 2}, {2, 3}};

  std::array<std::optional<std::pair<double, double>>, 4> slopes;
  for (int k = 0; k < 4; ++k) {
    slopes[static_cast<std::size_t>(k)] =
        edge_slopes(cell.edges[static_cast<std::size_t>(k)]);
    if (!slopes[static_cast<std::size_t>(k)])
      throw Error(ErrorCode::UnsolvedEdges,
                  "diagonal_slopes: unsolved cell edge " +
                      net.spec(cell.edges[static_cast<std::size_t>(k)]).name);
  }

  DiagonalSlopes out;
  for (int slot = 0; slot < 2; ++slot) {
    const CatenarySpec& d =
        net.spec(cell.diagonals[static_cast<std::size_t>(slot)]);
    const Vec3 u_d = horizontal_direction(net, d, positions);
    const int corner_a = (slot == 0) ? 0 : 1;
    const int corner_b = (slot == 0) ? 2 : 3;
    std::array<double, 2> phys{};
    for (int which = 0; which < 2; ++which) {
      const int corner = (which == 0) ? corner_a : corner_b;
      const int g = cell.corners[static_cast<std::size_t>(corner)];
      // Away direction of this diagonal at the corner.
      const Vec3 v = (which == 0) ? u_d : Vec3{-u_d.x, -u_d.y, 0.0};
      double mean = 0.0;
      for (int e = 0; e < 2; ++e) {
        const int edge_id =
            cell.edges[static_cast<std::size_t>(kCornerEdges[corner][e])];
        const AwaySlope as = edge_away_slope(
            net, net.spec(edge_id), g, positions,
            *slopes[static_cast<std::size_t>(kCornerEdges[corner][e])]);
        mean += 0.5 * as.slope * as.dir.dot(v);
      }
      // Convert away-slope back to the diagonal's +u convention.
      phys[static_cast<std::size_t>(which)] = (which == 0) ? mean : -mean;
    }
    if (slot == 0)
      out.main = phys;
    else
      out.anti = phys;
  }
  return out;
}

void apply_shear_governance(CatenaryNetwork& net, const UnitCell& cell,
                            const std::vector<Vec3>& positions) {
  if (cell.shear != ShearState::Shearing || cell.shearing_slot < 0) return;
  const CatenarySpec& d =
      net.spec(cell.diagonals[static_cast<std::size_t>(cell.shearing_slot)]);
  if (d.anchor_a.kind != AnchorRef::Kind::Gripper ||
      d.anchor_b.kind != AnchorRef::Kind::Gripper)
    return;
  const double m_d = chord_slope(net, d, positions);
  const int ga = d.anchor_a.gripper;
  const int gb = d.anchor_b.gripper;

  for (CatenarySpec& e : net.catenaries) {
    if (e.kind != CatenaryKind::Edge) continue;
    if (e.status == MemberStatus::SplitParent ||
        e.status == MemberStatus::FullyFrozen)
      continue;
    for (int side = 0; side < 2; ++side) {
      const AnchorRef& anchor = (side == 0) ? e.anchor_a : e.anchor_b;
      EndBinding& bc = (side == 0) ? e.bc_a : e.bc_b;
      if (anchor.kind != AnchorRef::Kind::Gripper) continue;
      double away;
      if (anchor.gripper == ga)
        away = m_d;  // diagonal leaves A toward B
      else if (anchor.gripper == gb)
        away = -m_d;
      else
        continue;
      // The edge's prescribed physical slope along its own +u direction.
      bc.governed = true;
      bc.governed_slope = (side == 0) ? away : -away;
    }
  }
}

void reset_governance(CatenaryNetwork& net) {
  for (CatenarySpec& s : net.catenaries) {
    s.bc_a.governed = false;
    s.bc_b.governed = false;
  }
}

}  // namespace drape
