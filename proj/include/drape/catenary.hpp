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
#include <utility>

#include "drape/error.hpp"
#include "drape/geometry.hpp"
#include "drape/kernels/kernels.hpp"
#include "drape/material.hpp"

namespace drape {

inline constexpr double kHMin = 1e-6;         // N, floor on the reaction force
inline constexpr double kSpanEpsilon = 1e-9;  // m, minimum horizontal span
inline constexpr int kDefaultSamples = 101;

// Vertical plane of one catenary: origin at anchor A, horizontal unit
// direction u toward anchor B's projection, horizontal span and vertical
// offset dz = z_B - z_A. The plane is spanned by u and the global vertical.
struct LocalFrame {
  Vec3 origin;
  Vec3 u;          // horizontal, unit norm
  double span = 0.0;
  double dz = 0.0;

  double chord_slope() const { return dz / span; }
  double theta() const { return std::atan2(dz, span); }

  Vec3 anchor_b() const { return {origin.x + u.x * span,
                                  origin.y + u.y * span, origin.z + dz}; }

  // Global position of local (x, w) where w is height above the anchor-A
  // horizontal plane.
  Vec3 at(double x, double w) const {
    return {origin.x + u.x * x, origin.y + u.y * x, origin.z + w};
  }

  // Throws DegenerateSpan when the anchors' horizontal projections coincide.
  static LocalFrame between(const Vec3& a, const Vec3& b);
};

enum class SlopeKind { FreeSlope, PrescribedSlope };

// End condition of one catenary: either a zero-moment end (y'' = 0) or a
// prescribed slope y' = s_pre in the local chord-relative convention.
struct BoundaryCondition {
  SlopeKind kind = SlopeKind::FreeSlope;
  double s_pre = 0.0;

  static BoundaryCondition free() { return {SlopeKind::FreeSlope, 0.0}; }
  static BoundaryCondition slope(double s) {
    return {SlopeKind::PrescribedSlope, s};
  }
};

enum class End { A, B };

struct SagInfo {
  double sag = 0.0;        // m, max dip below the chord
  double ratio = 0.0;      // sag / span
  bool over_eighth = false;   // linearization note threshold
  bool over_quarter = false;  // linearization warning threshold
};

// Closed-form solution of H y'' - EI y'''' = q on [0, span] with
// q = m g sec(theta), y chord-relative. Stored in one of two conditioned
// bases (see kernels::Basis); coefficients are (c1, c2, c3, c4) where c1 + c2
// x is the affine part and c3, c4 weight the basis pair.
struct CatenarySolution {
  LocalFrame frame;
  Material material;
  BoundaryCondition bc_a, bc_b;
  double H = 0.0;       // N, horizontal reaction
  double q = 0.0;       // N/m, m g sec(theta)
  double lambda = 0.0;  // 1/m, sqrt(H / EI)
  kernels::Basis basis = kernels::Basis::CoshShifted;
  std::array<double, 4> coeffs{};  // c1, c2, c3, c4
  SagInfo sag;

  // Chord-relative y and derivatives (order 0..4) at local x.
  double eval_local(double x) const;
  double derivative(double x, int order) const;

  // Profile forms for the kernels: local is chord-relative, global folds the
  // chord slope into the linear term (height above anchor A).
  kernels::Profile local_profile() const;
  kernels::Profile global_profile() const;
};

// Solves the linearized bending-stiff catenary boundary-value problem.
// Throws DegenerateSpan / SingularSystem.
CatenarySolution solve_catenary(const LocalFrame& frame, double H,
                                const BoundaryCondition& bc_a,
                                const BoundaryCondition& bc_b,
                                const Material& material);

// n_points equispaced in local x, mapped to global 3D; endpoints snap to the
// frame anchors.
Polyline sample(const CatenarySolution& sol, int n_points);

// Length of the sampled solution (sum of segment distances), via the active
// kernel without materializing the 3D points.
double catenary_length(const CatenarySolution& sol, int n_points);

// (slope, moment) = (y', EI y'') at an end, local convention.
std::pair<double, double> end_values(const CatenarySolution& sol, End end);

// H y''(x) - EI y''''(x) - q from the analytic derivatives.
double ode_residual(const CatenarySolution& sol, double x);

enum class CatenaryVar { H, SlopeA, SlopeB };

// Semi-analytical length sensitivity: re-solve the closed form at a
// perturbed variable, sample, measure, forward-difference. Slope variables
// require that end to be PrescribedSlope (else InactiveVariable).
double length_sensitivity(const CatenarySolution& sol, CatenaryVar var,
                          int n_points);

}  // namespace drape
