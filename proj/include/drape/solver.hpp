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

#include <Eigen/Dense>
#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "drape/assembly.hpp"
#include "drape/catenary.hpp"
#include "drape/contact.hpp"

namespace drape {

// Minimize ||H||_2 subject to L_i = L_set,i per active catenary, with
// H >= H_min and shared slopes bounded by the ball-joint limit. Variables
// are ordered [H_0..H_{m-1}, s_0..s_{p-1}] and constraint i owns H_i, so the
// Jacobian is diagonal in the reaction block plus at most two slope columns
// per row.
struct NlpProblem {
  struct EndSpec {
    enum class Kind { Free, Variable, Fixed };
    Kind kind = Kind::Free;
    int var_index = -1;    // Variable: index of the shared-slope variable
    double local_slope = 0.0;  // Fixed: chord-relative prescribed slope
  };

  struct Constraint {
    int catenary_id = -1;
    double set_length = 0.0;
    LocalFrame frame;
    EndSpec end_a, end_b;
    std::array<int, 3> pattern{-1, -1, -1};  // {H, slope A, slope B} vars
  };

  Material material;
  int n_points = kDefaultSamples;
  std::vector<Constraint> constraints;
  std::vector<int> shared_variable_ids;  // network shared index per slope var
  std::vector<double> lower, upper;

  int n_constraints() const { return static_cast<int>(constraints.size()); }
  int n_vars() const { return static_cast<int>(lower.size()); }

  // Closed-form member solution for constraint i at variables x.
  CatenarySolution member_solution(int i, const Eigen::VectorXd& x) const;
};

// Builds the NLP from the network state: one variable and one length
// constraint per Active catenary (shearing, taut, split and frozen members
// are excluded), shared-slope variables registered once each. Throws
// EmptyProblem when nothing is active.
NlpProblem assemble_nlp(const CatenaryNetwork& net,
                        const std::vector<Vec3>& positions,
                        const Material& material,
                        int n_points = kDefaultSamples);

// value = ||H||_2, gradient = [H/||H||, 0...]. Requires ||H|| > 0.
void objective_and_gradient(const NlpProblem& problem,
                            const Eigen::VectorXd& x, double* value,
                            Eigen::VectorXd* gradient);

// residual_i = L_i(x) - L_set,i; Jacobian entries only on the sparsity
// pattern (semi-analytical per-catenary forward differences), all
// off-pattern entries exactly zero.
void constraints_and_jacobian(const NlpProblem& problem,
                              const Eigen::VectorXd& x,
                              Eigen::VectorXd* residuals,
                              Eigen::MatrixXd* jacobian);

// residuals only (used by the merit line search).
void constraints_only(const NlpProblem& problem, const Eigen::VectorXd& x,
                      Eigen::VectorXd* residuals);

struct SqpOptions {
  int max_iter = 100;
  double kkt_tol = 1e-6;
  double constraint_tol = 1e-6;  // m
  double armijo_c = 1e-4;
  double backtrack = 0.5;
  double min_step = 1e-12;
};

enum class SqpStatus { Converged, MaxIter, Infeasible };

struct SqpResult {
  Eigen::VectorXd x;
  double objective = 0.0;
  Eigen::VectorXd constraint_residuals;
  double max_constraint_residual = 0.0;
  double kkt_residual = 0.0;
  int iterations = 0;
  SqpStatus status = SqpStatus::MaxIter;
  std::vector<double> merit_history;  // accepted iterates
};

// Damped-BFGS SQP with an l1 merit line search and active-set handling of
// the variable bounds.
SqpResult sqp_solve(const NlpProblem& problem, const Eigen::VectorXd& x0,
                    const SqpOptions& opts = {});

// Parabolic warm start for a slack span: H0 = q span^2 / (8 d0) with the
// nominal sag d0 from the set-length excess.
double initial_reaction_estimate(const LocalFrame& frame, double set_length,
                                 const Material& material);

struct GradCheckEntry {
  int row = -1, col = -1;
  double analytic = 0.0, fd = 0.0, rel = 0.0;
};

struct GradCheckReport {
  std::string mode;
  int n_checked = 0;
  double max_rel = 0.0;
  double max_off_pattern = 0.0;  // jacobian mode only
  double tolerance = 0.0;
  bool pass = false;
  std::vector<GradCheckEntry> worst;  // sorted by rel, capped
};

struct GradCheckHooks {
  // Test fixture: corrupt one Jacobian entry before comparing.
  std::optional<std::array<int, 2>> corrupt_entry;
  double corrupt_delta = 1e-3;
};

// Compares analytic / semi-analytic derivatives against central (overall)
// finite differences. mode is "objective" or "jacobian".
GradCheckReport check_gradients(const NlpProblem& problem,
                                const Eigen::VectorXd& x,
                                const std::string& mode,
                                const GradCheckHooks& hooks = {});

}  // namespace drape
