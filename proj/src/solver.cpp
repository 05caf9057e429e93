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

#include "drape/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace drape {
namespace {

constexpr double kInfinity = std::numeric_limits<double>::infinity();
constexpr double kBoundTol = 1e-12;
constexpr double kMultiplierTol = 1e-10;

NlpProblem::EndSpec resolve_end(const EndBinding& bc, double chord_slope,
                                const std::map<int, int>& shared_to_var) {
  NlpProblem::EndSpec end;
  if (bc.governed) {
    end.kind = NlpProblem::EndSpec::Kind::Fixed;
    end.local_slope = bc.governed_slope - chord_slope;
    return end;
  }
  switch (bc.kind) {
    case BindingKind::Free:
      end.kind = NlpProblem::EndSpec::Kind::Free;
      break;
    case BindingKind::SharedVariable:
      end.kind = NlpProblem::EndSpec::Kind::Variable;
      end.var_index = shared_to_var.at(bc.shared_index);
      break;
    case BindingKind::DerivedValue:
      end.kind = NlpProblem::EndSpec::Kind::Fixed;
      end.local_slope = bc.derived_slope - chord_slope;
      break;
  }
  return end;
}

BoundaryCondition to_bc(const NlpProblem::EndSpec& end,
                        const Eigen::VectorXd& x, double chord_slope) {
  switch (end.kind) {
    case NlpProblem::EndSpec::Kind::Free:
      return BoundaryCondition::free();
    case NlpProblem::EndSpec::Kind::Variable:
      return BoundaryCondition::slope(x(end.var_index) - chord_slope);
    case NlpProblem::EndSpec::Kind::Fixed:
    default:
      return BoundaryCondition::slope(end.local_slope);
  }
}

}  // namespace

CatenarySolution NlpProblem::member_solution(int i,
                                             const Eigen::VectorXd& x) const {
  const Constraint& con = constraints[static_cast<std::size_t>(i)];
  const double chord = con.frame.chord_slope();
  return solve_catenary(con.frame, x(i), to_bc(con.end_a, x, chord),
                        to_bc(con.end_b, x, chord), material);
}

NlpProblem assemble_nlp(const CatenaryNetwork& net,
                        const std::vector<Vec3>& positions,
                        const Material& material, int n_points) {
  NlpProblem problem;
  problem.material = material;
  problem.n_points = n_points;

  std::vector<const CatenarySpec*> active;
  for (const CatenarySpec& s : net.catenaries) {
    if (s.status == MemberStatus::Active) active.push_back(&s);
  }
  if (active.empty())
    throw Error(ErrorCode::EmptyProblem, "assemble_nlp: no active catenaries");

  // Shared-slope variables referenced by at least one active, ungoverned end.
  std::map<int, int> shared_to_var;
  for (const CatenarySpec* s : active) {
    for (const EndBinding* bc : {&s->bc_a, &s->bc_b}) {
      if (!bc->governed && bc->kind == BindingKind::SharedVariable)
        shared_to_var.emplace(bc->shared_index, 0);
    }
  }
  const int m = static_cast<int>(active.size());
  int next_var = m;
  for (auto& [shared_index, var] : shared_to_var) {
    var = next_var++;
    problem.shared_variable_ids.push_back(shared_index);
  }

  problem.lower.assign(static_cast<std::size_t>(next_var), kHMin);
  problem.upper.assign(static_cast<std::size_t>(next_var), kInfinity);
  const double s_lim = net.grid.slope_limit;
  for (int v = m; v < next_var; ++v) {
    problem.lower[static_cast<std::size_t>(v)] = -s_lim;
    problem.upper[static_cast<std::size_t>(v)] = s_lim;
  }

  for (int i = 0; i < m; ++i) {
    const CatenarySpec& s = *active[static_cast<std::size_t>(i)];
    NlpProblem::Constraint con;
    con.catenary_id = s.id;
    con.set_length = s.set_length;
    con.frame = LocalFrame::between(net.anchor_position(s.anchor_a, positions),
                                    net.anchor_position(s.anchor_b, positions));
    const double chord = con.frame.chord_slope();
    con.end_a = resolve_end(s.bc_a, chord, shared_to_var);
    con.end_b = resolve_end(s.bc_b, chord, shared_to_var);
    con.pattern = {i,
                   con.end_a.kind == NlpProblem::EndSpec::Kind::Variable
                       ? con.end_a.var_index
                       : -1,
                   con.end_b.kind == NlpProblem::EndSpec::Kind::Variable
                       ? con.end_b.var_index
                       : -1};
    problem.constraints.push_back(std::move(con));
  }
  return problem;
}

void objective_and_gradient(const NlpProblem& problem,
                            const Eigen::VectorXd& x, double* value,
                            Eigen::VectorXd* gradient) {
  const int m = problem.n_constraints();
  const double norm = x.head(m).norm();
  *value = norm;
  if (gradient != nullptr) {
    gradient->setZero(problem.n_vars());
    if (norm > 0.0) gradient->head(m) = x.head(m) / norm;
  }
}

void constraints_only(const NlpProblem& problem, const Eigen::VectorXd& x,
                      Eigen::VectorXd* residuals) {
  const int m = problem.n_constraints();
  residuals->resize(m);
  for (int i = 0; i < m; ++i) {
    const CatenarySolution sol = problem.member_solution(i, x);
    (*residuals)(i) = catenary_length(sol, problem.n_points) -
                      problem.constraints[static_cast<std::size_t>(i)].set_length;
  }
}

void constraints_and_jacobian(const NlpProblem& problem,
                              const Eigen::VectorXd& x,
                              Eigen::VectorXd* residuals,
                              Eigen::MatrixXd* jacobian) {
  const int m = problem.n_constraints();
  residuals->resize(m);
  jacobian->setZero(m, problem.n_vars());
  for (int i = 0; i < m; ++i) {
    const NlpProblem::Constraint& con =
        problem.constraints[static_cast<std::size_t>(i)];
    CatenarySolution sol;
    try {
      sol = problem.member_solution(i, x);
    } catch (const Error& e) {
      throw Error(e.code(), "constraint " + std::to_string(i) + " (catenary " +
                                std::to_string(con.catenary_id) +
                                "): " + e.what());
    }
    (*residuals)(i) = catenary_length(sol, problem.n_points) - con.set_length;
    (*jacobian)(i, i) =
        length_sensitivity(sol, CatenaryVar::H, problem.n_points);
    if (con.pattern[1] >= 0)
      (*jacobian)(i, con.pattern[1]) =
          length_sensitivity(sol, CatenaryVar::SlopeA, problem.n_points);
    if (con.pattern[2] >= 0)
      (*jacobian)(i, con.pattern[2]) =
          length_sensitivity(sol, CatenaryVar::SlopeB, problem.n_points);
  }
}

double initial_reaction_estimate(const LocalFrame& frame, double set_length,
                                 const Material& material) {
  const double span = frame.span;
  const double chord = std::hypot(span, frame.dz);
  const double q =
      material.weight_per_length() * chord / span;  // m g sec(theta)
  const double slack = std::max(set_length - chord, 1e-12);
  const double d0 =
      std::max(span * 0.05, std::sqrt(3.0 * span * slack / 8.0));
  return std::max(kHMin, q * span * span / (8.0 * d0));
}

namespace {

struct QpSolution {
  Eigen::VectorXd d;
  Eigen::VectorXd lambda;
};

// Equality-constrained QP with simple bounds, primal active set on the
// bounds. B must be positive definite. Falls back to a penalized system
// when the KKT matrix is singular (bound-clamped constraint rows).
QpSolution solve_qp(const Eigen::MatrixXd& B, const Eigen::VectorXd& g,
                    const Eigen::MatrixXd& J, const Eigen::VectorXd& c,
                    const Eigen::VectorXd& x, const std::vector<double>& lower,
                    const std::vector<double>& upper) {
  const int n = static_cast<int>(x.size());
  const int m = static_cast<int>(c.size());
  std::vector<int> active(static_cast<std::size_t>(n), 0);  // -1 lo, +1 up

  QpSolution best;
  best.d = Eigen::VectorXd::Zero(n);
  best.lambda = Eigen::VectorXd::Zero(m);

  const int max_pass = 3 * n + 10;
  for (int pass = 0; pass < max_pass; ++pass) {
    std::vector<int> free_idx;
    for (int j = 0; j < n; ++j)
      if (active[static_cast<std::size_t>(j)] == 0) free_idx.push_back(j);
    const int nf = static_cast<int>(free_idx.size());

    Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
    for (int j = 0; j < n; ++j) {
      if (active[static_cast<std::size_t>(j)] < 0)
        d(j) = lower[static_cast<std::size_t>(j)] - x(j);
      else if (active[static_cast<std::size_t>(j)] > 0)
        d(j) = upper[static_cast<std::size_t>(j)] - x(j);
    }

    Eigen::VectorXd lambda = Eigen::VectorXd::Zero(m);
    if (nf > 0) {
      Eigen::MatrixXd Bff(nf, nf);
      Eigen::MatrixXd Jf(m, nf);
      for (int a = 0; a < nf; ++a) {
        for (int b = 0; b < nf; ++b) Bff(a, b) = B(free_idx[a], free_idx[b]);
        Jf.col(a) = J.col(free_idx[a]);
      }
      // Right-hand sides with the clamped block folded in.
      Eigen::VectorXd gf(nf);
      for (int a = 0; a < nf; ++a) {
        gf(a) = g(free_idx[a]) + B.row(free_idx[a]).dot(d);
      }
      Eigen::VectorXd cf = c + J * d;  // d currently holds only clamped part

      Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(nf + m, nf + m);
      kkt.topLeftCorner(nf, nf) = Bff;
      kkt.topRightCorner(nf, m) = -Jf.transpose();
      kkt.bottomLeftCorner(m, nf) = Jf;
      Eigen::VectorXd rhs(nf + m);
      rhs.head(nf) = -gf;
      rhs.tail(m) = -cf;

      Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
      Eigen::VectorXd z;
      if (lu.isInvertible()) {
        z = lu.solve(rhs);
        for (int a = 0; a < nf; ++a) d(free_idx[a]) = z(a);
        lambda = z.tail(m);
      } else {
        // Penalized fallback: least-squares constraint satisfaction.
        const double rho = 1e8;
        Eigen::MatrixXd A = Bff + rho * Jf.transpose() * Jf;
        Eigen::VectorXd b = -gf - rho * Jf.transpose() * cf;
        Eigen::VectorXd df = A.ldlt().solve(b);
        for (int a = 0; a < nf; ++a) d(free_idx[a]) = df(a);
        lambda = -rho * (Jf * df + cf);
      }
    }

    // Most violated bound among free variables.
    int worst = -1, worst_side = 0;
    double worst_violation = kBoundTol;
    for (int j : free_idx) {
      const double xn = x(j) + d(j);
      if (xn < lower[static_cast<std::size_t>(j)] - worst_violation) {
        worst = j;
        worst_side = -1;
        worst_violation = lower[static_cast<std::size_t>(j)] - xn;
      } else if (xn > upper[static_cast<std::size_t>(j)] + worst_violation) {
        worst = j;
        worst_side = 1;
        worst_violation = xn - upper[static_cast<std::size_t>(j)];
      }
    }
    if (worst >= 0) {
      active[static_cast<std::size_t>(worst)] = worst_side;
      continue;
    }

    // Release a clamped variable whose multiplier has the wrong sign.
    const Eigen::VectorXd grad_lag = B * d + g - J.transpose() * lambda;
    int release = -1;
    double worst_mu = -kMultiplierTol;
    for (int j = 0; j < n; ++j) {
      const int side = active[static_cast<std::size_t>(j)];
      if (side == 0) continue;
      const double mu = side < 0 ? grad_lag(j) : -grad_lag(j);
      if (mu < worst_mu) {
        worst_mu = mu;
        release = j;
      }
    }
    if (release >= 0) {
      active[static_cast<std::size_t>(release)] = 0;
      continue;
    }

    best.d = d;
    best.lambda = lambda;
    return best;
  }
  return best;
}

double stationarity_residual(const Eigen::VectorXd& g,
                             const Eigen::MatrixXd& J,
                             const Eigen::VectorXd& x,
                             const std::vector<double>& lower,
                             const std::vector<double>& upper,
                             Eigen::VectorXd* lambda_out) {
  const int n = static_cast<int>(x.size());
  std::vector<int> free_idx;
  for (int j = 0; j < n; ++j) {
    const bool at_lo = x(j) <= lower[static_cast<std::size_t>(j)] + kBoundTol;
    const bool at_up = x(j) >= upper[static_cast<std::size_t>(j)] - kBoundTol;
    if (!at_lo && !at_up) free_idx.push_back(j);
  }
  const int nf = static_cast<int>(free_idx.size());
  const int m = static_cast<int>(J.rows());

  Eigen::MatrixXd Jft(nf, m);
  Eigen::VectorXd gf(nf);
  for (int a = 0; a < nf; ++a) {
    Jft.row(a) = J.col(free_idx[a]).transpose();
    gf(a) = g(free_idx[a]);
  }
  Eigen::VectorXd lambda =
      nf > 0 ? Jft.completeOrthogonalDecomposition().solve(gf).eval()
             : Eigen::VectorXd::Zero(m);
  if (lambda_out != nullptr) *lambda_out = lambda;

  const Eigen::VectorXd r = g - J.transpose() * lambda;
  double res = 0.0;
  for (int a = 0; a < nf; ++a) res = std::max(res, std::abs(r(free_idx[a])));
  for (int j = 0; j < n; ++j) {
    const bool at_lo = x(j) <= lower[static_cast<std::size_t>(j)] + kBoundTol;
    const bool at_up = x(j) >= upper[static_cast<std::size_t>(j)] - kBoundTol;
    if (at_lo) res = std::max(res, std::max(0.0, -r(j)));
    if (at_up) res = std::max(res, std::max(0.0, r(j)));
  }
  return res;
}

}  // namespace

SqpResult sqp_solve(const NlpProblem& problem, const Eigen::VectorXd& x0,
                    const SqpOptions& opts) {
  const int n = problem.n_vars();
  const int m = problem.n_constraints();
  SqpResult result;

  Eigen::VectorXd x = x0;
  for (int j = 0; j < n; ++j) {
    x(j) = std::clamp(x(j), problem.lower[static_cast<std::size_t>(j)],
                      problem.upper[static_cast<std::size_t>(j)]);
  }

  double f = 0.0;
  Eigen::VectorXd g, c;
  Eigen::MatrixXd J;
  objective_and_gradient(problem, x, &f, &g);
  constraints_and_jacobian(problem, x, &c, &J);

  Eigen::MatrixXd B = Eigen::MatrixXd::Identity(n, n);
  double mu = 1.0;
  bool reset_once = false;

  result.merit_history.push_back(f + mu * c.lpNorm<1>());

  for (int iter = 0; iter <= opts.max_iter; ++iter) {
    Eigen::VectorXd lambda_ls;
    const double kkt =
        stationarity_residual(g, J, x, problem.lower, problem.upper,
                              &lambda_ls);
    const double c_inf = m > 0 ? c.lpNorm<Eigen::Infinity>() : 0.0;
    result.x = x;
    result.objective = f;
    result.constraint_residuals = c;
    result.max_constraint_residual = c_inf;
    result.kkt_residual = kkt;
    result.iterations = iter;
    if (c_inf <= opts.constraint_tol &&
        kkt <= opts.kkt_tol * std::max(1.0, g.lpNorm<Eigen::Infinity>())) {
      result.status = SqpStatus::Converged;
      return result;
    }
    if (iter == opts.max_iter) break;

    const QpSolution qp =
        solve_qp(B, g, J, c, x, problem.lower, problem.upper);

    // Merit parameter: dominate the multipliers.
    mu = std::max(mu, 1.5 * qp.lambda.lpNorm<Eigen::Infinity>() + 0.1);
    const double merit0 = f + mu * c.lpNorm<1>();
    double dphi = g.dot(qp.d) - mu * c.lpNorm<1>();
    if (dphi > -1e-16) {
      if (!reset_once) {
        reset_once = true;
        B = Eigen::MatrixXd::Identity(n, n);
        continue;
      }
      result.status = c_inf <= opts.constraint_tol ? SqpStatus::MaxIter
                                                   : SqpStatus::Infeasible;
      return result;
    }

    double alpha = 1.0;
    Eigen::VectorXd x_trial, c_trial;
    double f_trial = 0.0;
    bool accepted = false;
    while (alpha >= opts.min_step) {
      x_trial = x + alpha * qp.d;
      for (int j = 0; j < n; ++j) {
        x_trial(j) =
            std::clamp(x_trial(j), problem.lower[static_cast<std::size_t>(j)],
                       problem.upper[static_cast<std::size_t>(j)]);
      }
      objective_and_gradient(problem, x_trial, &f_trial, nullptr);
      constraints_only(problem, x_trial, &c_trial);
      const double merit_trial = f_trial + mu * c_trial.lpNorm<1>();
      if (merit_trial <= merit0 + opts.armijo_c * alpha * dphi) {
        accepted = true;
        break;
      }
      alpha *= opts.backtrack;
    }
    if (!accepted) {
      result.status = c_inf <= opts.constraint_tol ? SqpStatus::MaxIter
                                                   : SqpStatus::Infeasible;
      return result;
    }

    const Eigen::VectorXd s = x_trial - x;
    const Eigen::VectorXd grad_lag_old = g - J.transpose() * qp.lambda;

    x = x_trial;
    f = f_trial;
    objective_and_gradient(problem, x, &f, &g);
    constraints_and_jacobian(problem, x, &c, &J);
    result.merit_history.push_back(f + mu * c.lpNorm<1>());

    // Damped BFGS (keeps B positive definite).
    const Eigen::VectorXd grad_lag_new = g - J.transpose() * qp.lambda;
    const Eigen::VectorXd y = grad_lag_new - grad_lag_old;
    const double sts = s.dot(s);
    if (sts > 1e-30) {
      const Eigen::VectorXd Bs = B * s;
      const double sBs = s.dot(Bs);
      const double sy = s.dot(y);
      Eigen::VectorXd r;
      if (sy < 0.2 * sBs) {
        const double theta = 0.8 * sBs / (sBs - sy);
        r = theta * y + (1.0 - theta) * Bs;
      } else {
        r = y;
      }
      const double sr = s.dot(r);
      if (sr > 1e-30 && sBs > 1e-30) {
        B += (r * r.transpose()) / sr - (Bs * Bs.transpose()) / sBs;
      }
    }
  }

  result.status = result.max_constraint_residual <= opts.constraint_tol
                      ? SqpStatus::MaxIter
                      : SqpStatus::Infeasible;
  return result;
}

GradCheckReport check_gradients(const NlpProblem& problem,
                                const Eigen::VectorXd& x,
                                const std::string& mode,
                                const GradCheckHooks& hooks) {
  GradCheckReport report;
  report.mode = mode;
  const int n = problem.n_vars();

  auto record = [&report](int row, int col, double analytic, double fd,
                          double rel) {
    report.max_rel = std::max(report.max_rel, rel);
    GradCheckEntry e{row, col, analytic, fd, rel};
    report.worst.push_back(e);
    std::sort(report.worst.begin(), report.worst.end(),
              [](const GradCheckEntry& a, const GradCheckEntry& b) {
                return a.rel > b.rel;
              });
    if (report.worst.size() > 8) report.worst.resize(8);
  };

  if (mode == "objective") {
    report.tolerance = 1e-8;
    double f = 0.0;
    Eigen::VectorXd g;
    objective_and_gradient(problem, x, &f, &g);
    Eigen::VectorXd g_fd(n);
    for (int j = 0; j < n; ++j) {
      // Roundoff-optimal central step for the smooth norm objective.
      const double h = 1e-5 * std::max(std::abs(x(j)), 1.0);
      Eigen::VectorXd xp = x, xm = x;
      xp(j) += h;
      xm(j) -= h;
      double fp = 0.0, fm = 0.0;
      objective_and_gradient(problem, xp, &fp, nullptr);
      objective_and_gradient(problem, xm, &fm, nullptr);
      g_fd(j) = (fp - fm) / (2.0 * h);
    }
    const double scale = std::max(g.lpNorm<Eigen::Infinity>(), 1e-30);
    for (int j = 0; j < n; ++j) {
      const double rel = std::abs(g(j) - g_fd(j)) / scale;
      ++report.n_checked;
      record(0, j, g(j), g_fd(j), rel);
    }
    report.pass = report.max_rel <= report.tolerance;
    return report;
  }

  // Jacobian mode: semi-analytic entries vs central overall finite
  // differences of the assembled constraint function.
  report.tolerance = 1e-4;
  const int m = problem.n_constraints();
  Eigen::VectorXd c;
  Eigen::MatrixXd J;
  constraints_and_jacobian(problem, x, &c, &J);
  if (hooks.corrupt_entry) {
    J((*hooks.corrupt_entry)[0], (*hooks.corrupt_entry)[1]) +=
        hooks.corrupt_delta;
  }

  Eigen::MatrixXd J_fd(m, n);
  for (int j = 0; j < n; ++j) {
    const double h = 1e-6 * std::max(std::abs(x(j)), 1.0);
    Eigen::VectorXd xp = x, xm = x;
    xp(j) += h;
    xm(j) -= h;
    Eigen::VectorXd cp, cm;
    constraints_only(problem, xp, &cp);
    constraints_only(problem, xm, &cm);
    J_fd.col(j) = (cp - cm) / (2.0 * h);
  }

  for (int i = 0; i < m; ++i) {
    const auto& pattern = problem.constraints[static_cast<std::size_t>(i)].pattern;
    for (int j = 0; j < n; ++j) {
      const bool on_pattern =
          j == pattern[0] || j == pattern[1] || j == pattern[2];
      if (on_pattern) {
        const double denom =
            std::max(std::max(std::abs(J(i, j)), std::abs(J_fd(i, j))), 1e-8);
        const double rel = std::abs(J(i, j) - J_fd(i, j)) / denom;
        ++report.n_checked;
        record(i, j, J(i, j), J_fd(i, j), rel);
      } else {
        report.max_off_pattern =
            std::max(report.max_off_pattern, std::abs(J_fd(i, j)));
      }
    }
  }
  report.pass =
      report.max_rel <= report.tolerance && report.max_off_pattern <= 1e-10;
  return report;
}

}  // namespace drape
