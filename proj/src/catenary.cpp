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

#include "drape/catenary.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "drape/kernels/basis.hpp"

namespace drape {
namespace {

// Forward-difference steps for the semi-analytical sensitivities.
constexpr double kFdStepH = 1e-6;      // relative to max(|H|, 1 N)
constexpr double kFdStepSlope = 1e-6;  // absolute, dimensionless

// Basis pair switch: below this value of lambda*span the shifted
// cosh/sinh pair conditions the 4x4 system, above it the exponential pair
// keeps every column O(1) and the boundary layers separated.
constexpr double kBasisSwitch = 1.0;

constexpr double kSagNoteRatio = 1.0 / 8.0;
constexpr double kSagWarnRatio = 1.0 / 4.0;

// Value and first/second derivatives of the basis pair at local x.
struct BasisEval {
  double b3, b4;      // values
  double b3p, b4p;    // first derivatives
  double b3pp, b4pp;  // second derivatives
};

BasisEval eval_basis(kernels::Basis basis, double lambda, double span,
                     double x) {
  BasisEval e{};
  if (basis == kernels::Basis::CoshShifted) {
    const double t = lambda * x;
    const double ch1 = kernels::cosh_m1(t);
    const double sh = std::sinh(t);
    e.b3 = ch1;
    e.b4 = kernels::sinh_mt(t);
    e.b3p = lambda * sh;
    e.b4p = lambda * ch1;
    e.b3pp = lambda * lambda * (ch1 + 1.0);
    e.b4pp = lambda * lambda * sh;
  } else {
    const double e1 = std::exp(-lambda * x);
    const double e2 = std::exp(-lambda * (span - x));
    e.b3 = e1;
    e.b4 = e2;
    e.b3p = -lambda * e1;
    e.b4p = lambda * e2;
    e.b3pp = lambda * lambda * e1;
    e.b4pp = lambda * lambda * e2;
  }
  return e;
}

std::vector<double>& scratch_buffer() {
  thread_local std::vector<double> buf;
  return buf;
}

}  // namespace

LocalFrame LocalFrame::between(const Vec3& a, const Vec3& b) {
  const Vec3 d = b - a;
  const double span = d.horizontal_norm();
  if (!(span >= kSpanEpsilon)) {
    throw Error(ErrorCode::DegenerateSpan,
                "catenary span below epsilon: " + std::to_string(span));
  }
  LocalFrame f;
  f.origin = a;
  f.u = {d.x / span, d.y / span, 0.0};
  f.span = span;
  f.dz = d.z;
  return f;
}

CatenarySolution solve_catenary(const LocalFrame& frame, double H,
                                const BoundaryCondition& bc_a,
                                const BoundaryCondition& bc_b,
                                const Material& material) {
  if (!(frame.span >= kSpanEpsilon)) {
    throw Error(ErrorCode::DegenerateSpan, "solve_catenary: degenerate span");
  }
  const double EI = material.flexural_rigidity();
  if (!(EI > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "solve_catenary: EI must be > 0");
  }
  if (H < kHMin) H = kHMin;

  CatenarySolution sol;
  sol.frame = frame;
  sol.material = material;
  sol.bc_a = bc_a;
  sol.bc_b = bc_b;
  sol.H = H;
  // Load per horizontal length, m g sec(theta); the sec factor re-weights
  // the uniform self-weight onto the horizontal coordinate of an inclined
  // chord.
  const double span = frame.span;
  sol.q = material.weight_per_length() * std::hypot(span, frame.dz) / span;
  sol.lambda = std::sqrt(H / EI);
  sol.basis = (sol.lambda * span <= kBasisSwitch) ? kernels::Basis::CoshShifted
                                                  : kernels::Basis::ExpPair;

  const double qq = sol.q / (2.0 * H);
  const BasisEval at_a = eval_basis(sol.basis, sol.lambda, span, 0.0);
  const BasisEval at_b = eval_basis(sol.basis, sol.lambda, span, span);

  Eigen::Matrix4d A;
  Eigen::Vector4d rhs;
  // y(0) = 0 and y(span) = 0: the profile is chord-relative.
  A.row(0) << 1.0, 0.0, at_a.b3, at_a.b4;
  rhs(0) = 0.0;
  A.row(1) << 1.0, span, at_b.b3, at_b.b4;
  rhs(1) = -qq * span * span;
  if (bc_a.kind == SlopeKind::FreeSlope) {
    A.row(2) << 0.0, 0.0, at_a.b3pp, at_a.b4pp;
    rhs(2) = -2.0 * qq;
  } else {
    A.row(2) << 0.0, 1.0, at_a.b3p, at_a.b4p;
    rhs(2) = bc_a.s_pre;
  }
  if (bc_b.kind == SlopeKind::FreeSlope) {
    A.row(3) << 0.0, 0.0, at_b.b3pp, at_b.b4pp;
    rhs(3) = -2.0 * qq;
  } else {
    A.row(3) << 0.0, 1.0, at_b.b3p, at_b.b4p;
    rhs(3) = bc_b.s_pre - 2.0 * qq * span;
  }

  // Row equilibration: slope/moment rows carry lambda and lambda^2 scales.
  for (int r = 0; r < 4; ++r) {
    const double m = A.row(r).cwiseAbs().maxCoeff();
    if (m > 0.0) {
      A.row(r) /= m;
      rhs(r) /= m;
    }
  }

  Eigen::FullPivLU<Eigen::Matrix4d> lu(A);
  if (!lu.isInvertible()) {
    throw Error(ErrorCode::SingularSystem,
                "solve_catenary: singular coefficient system");
  }
  const Eigen::Vector4d c = lu.solve(rhs);
  if (!c.allFinite()) {
    throw Error(ErrorCode::SingularSystem,
                "solve_catenary: non-finite coefficients");
  }
  sol.coeffs = {c(0), c(1), c(2), c(3)};

  // Sag diagnostics on the default sampling grid.
  auto& buf = scratch_buffer();
  buf.resize(kDefaultSamples);
  kernels::active_ops().eval_profile(sol.local_profile(), buf.data(),
                                     kDefaultSamples);
  double min_y = 0.0;
  for (int i = 0; i < kDefaultSamples; ++i) min_y = std::min(min_y, buf[i]);
  sol.sag.sag = std::max(0.0, -min_y);
  sol.sag.ratio = sol.sag.sag / span;
  sol.sag.over_eighth = sol.sag.ratio > kSagNoteRatio;
  sol.sag.over_quarter = sol.sag.ratio > kSagWarnRatio;
  return sol;
}

kernels::Profile CatenarySolution::local_profile() const {
  kernels::Profile p;
  p.basis = basis;
  p.span = frame.span;
  p.lambda = lambda;
  p.d0 = coeffs[0];
  p.d1 = coeffs[1];
  p.qq = q / (2.0 * H);
  p.c3 = coeffs[2];
  p.c4 = coeffs[3];
  return p;
}

kernels::Profile CatenarySolution::global_profile() const {
  kernels::Profile p = local_profile();
  p.d1 += frame.chord_slope();
  return p;
}

double CatenarySolution::eval_local(double x) const {
  const BasisEval e = eval_basis(basis, lambda, frame.span, x);
  const double qq = q / (2.0 * H);
  return coeffs[0] + x * (coeffs[1] + x * qq) + coeffs[2] * e.b3 +
         coeffs[3] * e.b4;
}

double CatenarySolution::derivative(double x, int order) const {
  const double qq = q / (2.0 * H);
  if (order == 0) return eval_local(x);
  const BasisEval e = eval_basis(basis, lambda, frame.span, x);
  switch (order) {
    case 1:
      return coeffs[1] + 2.0 * qq * x + coeffs[2] * e.b3p + coeffs[3] * e.b4p;
    case 2:
      return 2.0 * qq + coeffs[2] * e.b3pp + coeffs[3] * e.b4pp;
    case 3: {
      const double l3 = lambda * lambda * lambda;
      if (basis == kernels::Basis::CoshShifted) {
        const double t = lambda * x;
        return l3 * (coeffs[2] * std::sinh(t) + coeffs[3] * std::cosh(t));
      }
      return l3 * (-coeffs[2] * e.b3 + coeffs[3] * e.b4);
    }
    case 4: {
      const double l2 = lambda * lambda;
      return l2 * (coeffs[2] * e.b3pp + coeffs[3] * e.b4pp);
    }
    default:
      throw Error(ErrorCode::InvalidArgument, "derivative: order must be 0-4");
  }
}

Polyline sample(const CatenarySolution& sol, int n_points) {
  if (n_points < 2) {
    throw Error(ErrorCode::InvalidArgument, "sample: n_points must be >= 2");
  }
  auto& buf = scratch_buffer();
  buf.resize(static_cast<std::size_t>(n_points));
  kernels::active_ops().eval_profile(sol.global_profile(), buf.data(),
                                     n_points);
  Polyline p;
  p.points.resize(static_cast<std::size_t>(n_points));
  const double inv = 1.0 / static_cast<double>(n_points - 1);
  for (int i = 0; i < n_points; ++i) {
    const double x = sol.frame.span * (static_cast<double>(i) * inv);
    p.points[static_cast<std::size_t>(i)] = sol.frame.at(x, buf[i]);
  }
  p.points.front() = sol.frame.origin;
  p.points.back() = sol.frame.anchor_b();
  return p;
}

double catenary_length(const CatenarySolution& sol, int n_points) {
  if (n_points < 2) {
    throw Error(ErrorCode::InvalidArgument,
                "catenary_length: n_points must be >= 2");
  }
  auto& buf = scratch_buffer();
  buf.resize(static_cast<std::size_t>(n_points));
  const auto& ops = kernels::active_ops();
  ops.eval_profile(sol.global_profile(), buf.data(), n_points);
  const double dx = sol.frame.span / static_cast<double>(n_points - 1);
  return ops.profile_length(buf.data(), n_points, dx);
}

std::pair<double, double> end_values(const CatenarySolution& sol, End end) {
  const double x = (end == End::A) ? 0.0 : sol.frame.span;
  const double slope = sol.derivative(x, 1);
  const double moment = sol.material.flexural_rigidity() *
                        sol.derivative(x, 2);
  return {slope, moment};
}

double ode_residual(const CatenarySolution& sol, double x) {
  const double d2 = sol.derivative(x, 2);
  const double d4 = sol.derivative(x, 4);
  return sol.H * d2 - sol.material.flexural_rigidity() * d4 - sol.q;
}

double length_sensitivity(const CatenarySolution& sol, CatenaryVar var,
                          int n_points) {
  const double base_length = catenary_length(sol, n_points);
  double h = 0.0;
  CatenarySolution perturbed;
  switch (var) {
    case CatenaryVar::H: {
      h = kFdStepH * std::max(std::abs(sol.H), 1.0);
      perturbed = solve_catenary(sol.frame, sol.H + h, sol.bc_a, sol.bc_b,
                                 sol.material);
      break;
    }
    case CatenaryVar::SlopeA: {
      if (sol.bc_a.kind != SlopeKind::PrescribedSlope) {
        throw Error(ErrorCode::InactiveVariable,
                    "length_sensitivity: end A has no slope variable");
      }
      h = kFdStepSlope;
      perturbed = solve_catenary(
          sol.frame, sol.H, BoundaryCondition::slope(sol.bc_a.s_pre + h),
          sol.bc_b, sol.material);
      break;
    }
    case CatenaryVar::SlopeB: {
      if (sol.bc_b.kind != SlopeKind::PrescribedSlope) {
        throw Error(ErrorCode::InactiveVariable,
                    "length_sensitivity: end B has no slope variable");
      }
      h = kFdStepSlope;
      perturbed = solve_catenary(
          sol.frame, sol.H, sol.bc_a,
          BoundaryCondition::slope(sol.bc_b.s_pre + h), sol.material);
      break;
    }
  }
  return (catenary_length(perturbed, n_points) - base_length) / h;
}

}  // namespace drape
