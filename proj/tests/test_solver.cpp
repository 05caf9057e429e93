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

#include <doctest.h>

#include <cmath>
#include <random>

#include "drape/solver.hpp"

using namespace drape;

namespace {

const Material kMat{0.3143, 9.8, 1.0e8, 9.0e-14};

GripperGrid make_grid(int rows, int cols, double spacing, double height) {
  GripperGrid grid;
  grid.n_rows = rows;
  grid.n_cols = cols;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      grid.positions.push_back({c * spacing, r * spacing, height});
  return grid;
}

NlpProblem grid_problem(int rows, int cols, double spacing,
                        double cell_length) {
  const auto grid = make_grid(rows, cols, spacing, 0.0);
  const auto net = build_network(grid, cell_length);
  return assemble_nlp(net, grid.positions, kMat);
}

Eigen::VectorXd warm_start(const NlpProblem& p) {
  Eigen::VectorXd x0(p.n_vars());
  for (int i = 0; i < p.n_constraints(); ++i) {
    const auto& con = p.constraints[static_cast<std::size_t>(i)];
    x0(i) = initial_reaction_estimate(con.frame, con.set_length, kMat);
  }
  for (int v = p.n_constraints(); v < p.n_vars(); ++v) x0(v) = 0.0;
  return x0;
}

// Independent oracle for the single-catenary solve: bisection on
// L(H) = L_set.
double bisect_oracle(const NlpProblem& p) {
  REQUIRE(p.n_vars() == 1);
  auto residual = [&p](double H) {
    Eigen::VectorXd x(1);
    x << H;
    Eigen::VectorXd c;
    constraints_only(p, x, &c);
    return c(0);
  };
  double lo = kHMin;
  REQUIRE(residual(lo) > 0.0);
  double hi = 1.0;
  int guard = 0;
  while (residual(hi) > 0.0 && guard++ < 100) hi *= 4.0;
  REQUIRE(guard < 100);
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (residual(mid) > 0.0 ? lo : hi) = mid;
    if (hi - lo <= 1e-13 * hi) break;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_SUITE("solver") {
  TEST_CASE("objective is the reaction norm with its analytic gradient") {
    NlpProblem p = grid_problem(2, 2, 0.098, 0.1);
    REQUIRE(p.n_constraints() == 6);
    Eigen::VectorXd x = Eigen::VectorXd::Constant(p.n_vars(), 0.0);
    x(0) = 3.0;
    x(1) = 4.0;
    double value = 0.0;
    Eigen::VectorXd g;
    objective_and_gradient(p, x, &value, &g);
    CHECK(value == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(g(0) == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(g(1) == doctest::Approx(0.8).epsilon(1e-12));

    // Scalar case: gradient 1 for positive H.
    Eigen::VectorXd xs = Eigen::VectorXd::Zero(p.n_vars());
    xs(0) = 0.7;
    objective_and_gradient(p, xs, &value, &g);
    CHECK(g(0) == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("objective gradient matches central differences at random points") {
    NlpProblem p = grid_problem(2, 4, 0.098, 0.1);
    std::mt19937_64 rng(0x5eed0005);
    std::uniform_real_distribution<double> h_d(0.05, 5.0);
    std::uniform_real_distribution<double> s_d(-0.5, 0.5);
    for (int trial = 0; trial < 20; ++trial) {
      Eigen::VectorXd x(p.n_vars());
      for (int i = 0; i < p.n_constraints(); ++i) x(i) = h_d(rng);
      for (int v = p.n_constraints(); v < p.n_vars(); ++v) x(v) = s_d(rng);
      const auto report = check_gradients(p, x, "objective");
      CHECK(report.pass);
      CHECK(report.max_rel <= 1e-8);
    }
  }

  TEST_CASE("assembly excludes inactive members and registers slopes once") {
    const auto grid = make_grid(2, 4, 0.098, 0.0);
    auto net = build_network(grid, 0.1);
    const auto p = assemble_nlp(net, grid.positions, kMat);
    CHECK(p.n_constraints() == 16);  // 10 edges + 6 diagonals
    CHECK(p.n_vars() == 20);         // plus 4 shared slopes
    CHECK(p.shared_variable_ids.size() == 4);
    for (int v = 16; v < 20; ++v) {
      CHECK(p.lower[static_cast<std::size_t>(v)] ==
            doctest::Approx(-std::tan(40.0 * M_PI / 180.0)));
      CHECK(p.upper[static_cast<std::size_t>(v)] ==
            doctest::Approx(std::tan(40.0 * M_PI / 180.0)));
    }
    for (int v = 0; v < 16; ++v) {
      CHECK(p.lower[static_cast<std::size_t>(v)] == kHMin);
    }

    net.catenaries[0].status = MemberStatus::FullyFrozen;
    const auto p2 = assemble_nlp(net, grid.positions, kMat);
    CHECK(p2.n_constraints() == 15);

    for (auto& s : net.catenaries) s.status = MemberStatus::Taut;
    CHECK_THROWS_AS(assemble_nlp(net, grid.positions, kMat), Error);

    // The smallest problem: one slack catenary, one variable.
    GripperGrid pair;
    pair.n_rows = 1;
    pair.n_cols = 2;
    pair.positions = {{0, 0, 0}, {0.098, 0, 0}};
    const auto single = assemble_nlp(build_network(pair, 0.1), pair.positions,
                                     kMat);
    CHECK(single.n_vars() == 1);
    CHECK(single.n_constraints() == 1);
  }

  TEST_CASE("the constraint Jacobian matches overall finite differences") {
    NlpProblem p = grid_problem(2, 2, 0.098, 0.1);
    const Eigen::VectorXd x0 = warm_start(p);
    const auto report = check_gradients(p, x0, "jacobian");
    CHECK(report.pass);
    CHECK(report.max_rel <= 1e-4);
    CHECK(report.max_off_pattern <= 1e-10);

    // Structural zeros are exactly zero in the analytic Jacobian.
    Eigen::VectorXd c;
    Eigen::MatrixXd J;
    constraints_and_jacobian(p, x0, &c, &J);
    for (int i = 0; i < p.n_constraints(); ++i) {
      for (int j = 0; j < p.n_constraints(); ++j) {
        if (i != j) CHECK(J(i, j) == 0.0);
      }
    }
  }

  TEST_CASE("the 4x2 Jacobian with shared slope columns passes the check") {
    NlpProblem p = grid_problem(2, 4, 0.098, 0.1);
    Eigen::VectorXd x0 = warm_start(p);
    for (int v = 16; v < 20; ++v) x0(v) = 0.05 * (v - 17);
    const auto report = check_gradients(p, x0, "jacobian");
    CHECK(report.pass);
    CHECK(report.max_rel <= 1e-4);
    CHECK(report.max_off_pattern <= 1e-10);
  }

  TEST_CASE("a corrupted Jacobian entry is reported as failing") {
    NlpProblem p = grid_problem(2, 2, 0.098, 0.1);
    GradCheckHooks hooks;
    hooks.corrupt_entry = {{1, 1}};
    hooks.corrupt_delta = 1e-2;
    const auto report = check_gradients(p, warm_start(p), "jacobian", hooks);
    CHECK_FALSE(report.pass);
    REQUIRE_FALSE(report.worst.empty());
    CHECK(report.worst.front().row == 1);
    CHECK(report.worst.front().col == 1);
  }

  TEST_CASE("single-catenary solves match the bisection oracle") {
    // Level 98 mm span, 100 mm set length, free slopes.
    GripperGrid grid;
    grid.n_rows = 1;
    grid.n_cols = 2;
    grid.positions = {{0, 0, 0}, {0.098, 0, 0}};
    const auto net = build_network(grid, 0.1);
    const auto p = assemble_nlp(net, grid.positions, kMat);
    REQUIRE(p.n_vars() == 1);

    const double h_star = bisect_oracle(p);

    SqpOptions tight;
    tight.constraint_tol = 1e-10;
    const auto result = sqp_solve(p, warm_start(p), tight);
    CHECK(result.status == SqpStatus::Converged);
    CHECK(std::abs(result.x(0) - h_star) / h_star <= 1e-6);
  }

  TEST_CASE("randomized single-catenary instances stay on the oracle") {
    std::mt19937_64 rng(0x5eed0006);
    std::uniform_real_distribution<double> span_d(0.05, 0.3);
    std::uniform_real_distribution<double> slack_d(5e-3, 0.05);
    std::uniform_real_distribution<double> m_d(0.1, 1.0);

    int tested = 0;
    for (int trial = 0; trial < 20 && tested < 10; ++trial) {
      const double span = span_d(rng);
      Material mat = kMat;
      mat.mass_per_length = m_d(rng);
      GripperGrid grid;
      grid.n_rows = 1;
      grid.n_cols = 2;
      grid.positions = {{0, 0, 0}, {span, 0, 0}};
      const double set_length = span * (1.0 + slack_d(rng));
      const auto net = build_network(grid, set_length);
      const auto p = assemble_nlp(net, grid.positions, mat);

      Eigen::VectorXd c0;
      Eigen::VectorXd x_floor(1);
      x_floor << kHMin;
      constraints_only(p, x_floor, &c0);
      if (c0(0) < 0.0) continue;  // stiffness-bound span
      ++tested;

      const double h_star = bisect_oracle(p);
      SqpOptions tight;
      tight.constraint_tol = 1e-10;
      Eigen::VectorXd x0(1);
      x0 << initial_reaction_estimate(p.constraints[0].frame, set_length, mat);
      const auto result = sqp_solve(p, x0, tight);
      CHECK(result.status == SqpStatus::Converged);
      CHECK(std::abs(result.x(0) - h_star) / h_star <= 1e-6);
    }
    CHECK(tested == 10);
  }

  TEST_CASE("an optimal warm start converges without moving") {
    NlpProblem p = grid_problem(2, 2, 0.098, 0.1);
    const auto first = sqp_solve(p, warm_start(p), {});
    REQUIRE(first.status == SqpStatus::Converged);
    const auto again = sqp_solve(p, first.x, {});
    CHECK(again.status == SqpStatus::Converged);
    CHECK(again.iterations <= 2);
    CHECK((again.x - first.x).lpNorm<Eigen::Infinity>() <= 1e-6);
  }

  TEST_CASE("the production network converges within budget") {
    NlpProblem p = grid_problem(2, 4, 0.098, 0.1);
    const auto result = sqp_solve(p, warm_start(p), {});
    CHECK(result.status == SqpStatus::Converged);
    CHECK(result.iterations <= 100);
    CHECK(result.max_constraint_residual <= 1e-6);
    // Bounds hold at the solution.
    for (int j = 0; j < p.n_vars(); ++j) {
      CHECK(result.x(j) >= p.lower[static_cast<std::size_t>(j)] - 1e-12);
      CHECK(result.x(j) <= p.upper[static_cast<std::size_t>(j)] + 1e-12);
    }
    // The merit function never increased across accepted iterates.
    for (std::size_t k = 1; k < result.merit_history.size(); ++k) {
      CHECK(result.merit_history[k] <= result.merit_history[k - 1] + 1e-12);
    }
  }

  TEST_CASE("infeasible constraint sets exit with diagnostics") {
    // A set length below the chord cannot be met by any reaction force.
    GripperGrid grid;
    grid.n_rows = 1;
    grid.n_cols = 2;
    grid.positions = {{0, 0, 0}, {0.098, 0, 0}};
    const auto net = build_network(grid, 0.09);
    const auto p = assemble_nlp(net, grid.positions, kMat);
    SqpOptions opts;
    opts.max_iter = 30;
    const auto result = sqp_solve(p, warm_start(p), opts);
    CHECK(result.status == SqpStatus::Infeasible);
    CHECK(result.max_constraint_residual > 1e-6);
  }
}
