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
#include <map>

#include "drape/config.hpp"
#include "drape/simulation.hpp"

using namespace drape;

namespace {

const Material kMat{0.3143, 9.8, 1.0e8, 9.0e-14};

// A 2x2 cell descending onto a flat unsheared mold.
SimulationSetup small_setup(double initial_height, double mold_z,
                            int n_steps) {
  SimulationSetup setup;
  setup.material = kMat;
  setup.mold = MoldSurface::plane(mold_z, 0.0);
  setup.cell_length = 0.1;
  setup.grid.n_rows = 2;
  setup.grid.n_cols = 2;
  setup.grid.positions = {{0, 0, initial_height},
                          {0.098, 0, initial_height},
                          {0, 0.098, initial_height},
                          {0.098, 0.098, initial_height}};
  setup.trajectory.start = setup.grid.positions;
  setup.trajectory.target = {{0, 0, mold_z},
                             {0.1, 0, mold_z},
                             {0, 0.1, mold_z},
                             {0.1, 0.1, mold_z}};
  setup.trajectory.n_steps = n_steps;
  return setup;
}

bool states_equal(const FabricState& a, const FabricState& b) {
  if (a.members.size() != b.members.size()) return false;
  for (std::size_t m = 0; m < a.members.size(); ++m) {
    const auto& pa = a.members[m].polyline.points;
    const auto& pb = b.members[m].polyline.points;
    if (pa.size() != pb.size()) return false;
    for (std::size_t i = 0; i < pa.size(); ++i) {
      if (pa[i].x != pb[i].x || pa[i].y != pb[i].y || pa[i].z != pb[i].z)
        return false;
    }
  }
  return a.flags.slack_present == b.flags.slack_present &&
         a.flags.shear_active == b.flags.shear_active &&
         a.flags.contact_established == b.flags.contact_established &&
         a.flags.wrinkle_indicated == b.flags.wrinkle_indicated;
}

}  // namespace

TEST_SUITE("simulation") {
  TEST_CASE("linear trajectories interpolate between start and target") {
    Trajectory t;
    t.start = {{0, 0, 1}, {1, 0, 1}};
    t.target = {{0, 0, 0}, {2, 0, 0}};
    t.n_steps = 5;
    CHECK(linear_trajectory(t, 1)[0].z == 1.0);
    CHECK(linear_trajectory(t, 1)[1].x == 1.0);
    CHECK(linear_trajectory(t, 5)[0].z == 0.0);
    CHECK(linear_trajectory(t, 5)[1].x == 2.0);
    const auto mid = linear_trajectory(t, 3);
    CHECK(mid[0].z == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(mid[1].x == doctest::Approx(1.5).epsilon(1e-15));

    Trajectory bad = t;
    bad.target.pop_back();
    CHECK_THROWS_AS(linear_trajectory(bad, 1), Error);
  }

  TEST_CASE("a single-step run emits one snapshot at the start") {
    auto setup = small_setup(0.05, 0.0, 1);
    const auto trace = run(setup);
    REQUIRE(trace.states.size() == 1);
    CHECK(trace.states[0].iteration == 1);
    for (std::size_t g = 0; g < 4; ++g) {
      CHECK(trace.states[0].gripper_positions[g].z == 0.05);
    }
    CHECK(trace.states[0].flags.slack_present);
    CHECK_FALSE(trace.states[0].flags.contact_established);
  }

  TEST_CASE("an unreachable mold never raises contact or wrinkle flags") {
    auto setup = small_setup(0.06, -5.0, 6);
    setup.trajectory.target = setup.trajectory.start;  // hover in place
    const auto trace = run(setup);
    for (const auto& s : trace.states) {
      CHECK_FALSE(s.flags.contact_established);
      CHECK_FALSE(s.flags.wrinkle_indicated);
      CHECK_FALSE(s.flags.bridging_indicated);
      CHECK(s.flags.slack_present);
      CHECK(s.solve.status == SqpStatus::Converged);
    }
  }

  TEST_CASE("gripper kinematics follow the prescribed trajectory exactly") {
    auto setup = small_setup(0.05, 0.0, 7);
    const auto trace = run(setup);
    for (int k = 1; k <= 7; ++k) {
      const auto expected = linear_trajectory(setup.trajectory, k);
      const auto& got = trace.states[static_cast<std::size_t>(k - 1)]
                            .gripper_positions;
      for (std::size_t g = 0; g < expected.size(); ++g) {
        CHECK(got[g].x == expected[g].x);
        CHECK(got[g].y == expected[g].y);
        CHECK(got[g].z == expected[g].z);
      }
    }
  }

  TEST_CASE("descending onto the mold establishes latched contact") {
    auto setup = small_setup(0.05, 0.0, 12);
    const auto trace = run(setup);
    int first_contact = 0;
    for (const auto& s : trace.states) {
      if (s.flags.contact_established && first_contact == 0)
        first_contact = s.iteration;
      if (first_contact > 0 && s.iteration >= first_contact)
        CHECK(s.flags.contact_established);
    }
    CHECK(first_contact > 1);
    CHECK_FALSE(trace.states.back().registry.segments.empty());

    // Frozen points never move once committed (bitwise).
    const auto& final_segments = trace.states.back().registry.segments;
    for (const auto& s : trace.states) {
      for (std::size_t i = 0; i < s.registry.segments.size(); ++i) {
        const auto& early = s.registry.segments[i];
        const auto& late = final_segments[i];
        REQUIRE(early.fixed_points.size() == late.fixed_points.size());
        for (std::size_t q = 0; q < early.fixed_points.size(); ++q) {
          CHECK(early.fixed_points[q].x == late.fixed_points[q].x);
          CHECK(early.fixed_points[q].y == late.fixed_points[q].y);
          CHECK(early.fixed_points[q].z == late.fixed_points[q].z);
        }
      }
    }
  }

  TEST_CASE("length accounting closes for every split tree") {
    auto setup = small_setup(0.05, 0.0, 12);
    Simulator sim(setup);
    for (int k = 1; k <= 12; ++k)
      sim.step(linear_trajectory(setup.trajectory, k));
    const CatenaryNetwork& net = sim.network();
    const ContactRegistry& reg = sim.registry();
    REQUIRE_FALSE(reg.segments.empty());

    for (int root = 0; root < net.n_base; ++root) {
      // Sum the live leaves and frozen shares of this root's split tree.
      double total = 0.0;
      for (const auto& s : net.catenaries) {
        int cur = s.id;
        while (net.spec(cur).parent >= 0) cur = net.spec(cur).parent;
        if (cur != root) continue;
        if (s.status != MemberStatus::SplitParent &&
            s.status != MemberStatus::FullyFrozen)
          total += s.set_length;
      }
      double root_length = net.spec(root).set_length;
      for (const auto& seg : reg.segments) {
        int cur = seg.catenary_id;
        while (net.spec(cur).parent >= 0) cur = net.spec(cur).parent;
        if (cur == root) total += seg.length_share;
      }
      CHECK(std::abs(total - root_length) <= 1e-9);
    }
  }

  TEST_CASE("identical scenarios produce identical traces") {
    auto setup = small_setup(0.05, 0.0, 10);
    const auto a = run(setup);
    const auto b = run(setup);
    REQUIRE(a.states.size() == b.states.size());
    for (std::size_t k = 0; k < a.states.size(); ++k) {
      CHECK(states_equal(a.states[k], b.states[k]));
    }
  }

  TEST_CASE("reconciliation joins the lower diagonal at the upper center") {
    // Identical solved diagonals: centers coincide, nothing changes.
    const auto frame = LocalFrame::between({0, 0, 0.05}, {0.1, 0.1, 0.05});
    auto sol = solve_catenary(frame, 0.3, BoundaryCondition::free(),
                              BoundaryCondition::free(), kMat);
    const Polyline same = sample(sol, 101);
    const auto untouched = reconcile_diagonals(
        {0, 0, 0.05}, {0.1, 0.1, 0.05}, 0.15, 0.0, 0.0, same, same, kMat,
        1e-4, 101);
    CHECK_FALSE(untouched.changed);

    // Lift the upper center by 5 mm: halves meet it exactly and the
    // adjusted path is at least as long as the straight legs.
    Polyline upper = same;
    Vec3 center = upper[50];
    center.z += 0.005;
    upper[50] = center;
    const double set_length = 0.1 * std::sqrt(2.0) * 1.01;
    const auto rec = reconcile_diagonals({0, 0, 0.05}, {0.1, 0.1, 0.05},
                                         set_length, 0.0, 0.0, upper, same,
                                         kMat, 1e-4, 101);
    REQUIRE(rec.changed);
    REQUIRE(rec.adjusted.size() == 101);
    const Vec3 mid = rec.adjusted[50];
    CHECK(distance(mid, center) <= 1e-12);
    const double straight = distance({0, 0, 0.05}, center) +
                            distance(center, {0.1, 0.1, 0.05});
    CHECK(polyline_length(rec.adjusted) >= straight - 1e-9);
  }

  TEST_CASE("the wrinkle indicator reacts to separated diagonals in contact") {
    auto setup = small_setup(0.05, 0.0, 3);
    Simulator sim(setup);
    FabricState state = sim.step(linear_trajectory(setup.trajectory, 1));

    // Pre-contact, reconciled: no wrinkle.
    CHECK_FALSE(wrinkle_indicator(state, setup.mold, 2e-3, 0.02,
                                  setup.contact_tol));

    // A contacted cell with 5 mm of diagonal separation trips the 2 mm
    // threshold.
    FabricState tweaked = state;
    tweaked.cells[0].has_contact = true;
    tweaked.cells[0].diagonal_separation = 5e-3;
    CHECK(wrinkle_indicator(tweaked, setup.mold, 2e-3, 0.02,
                            setup.contact_tol));
    CHECK_FALSE(wrinkle_indicator(tweaked, setup.mold, 6e-3, 0.02,
                                  setup.contact_tol));
  }

  TEST_CASE("slack members committed to the mold region indicate wrinkling") {
    auto setup = small_setup(0.05, 0.0, 3);
    Simulator sim(setup);
    FabricState state = sim.step(linear_trajectory(setup.trajectory, 1));
    REQUIRE_FALSE(state.members.empty());

    FabricState tweaked = state;
    MemberState& ms = tweaked.members.front();
    ms.set_length = 0.11;
    ms.chord = 0.1;
    for (Vec3& p : ms.polyline.points) p.z = 0.0005;  // on the mold band
    CHECK(wrinkle_indicator(tweaked, setup.mold, 2e-3, 0.02,
                            setup.contact_tol));
    // The same member hovering above the mold does not.
    for (Vec3& p : ms.polyline.points) p.z = 0.02;
    CHECK_FALSE(wrinkle_indicator(tweaked, setup.mold, 2e-3, 0.02,
                                  setup.contact_tol));
  }

  TEST_CASE("the flat sheared scenario reproduces the draping narrative") {
    // Shortened variant of the production scenario: same physics, fewer
    // members, to keep the unit suite quick. The full 4x2/30-iteration run
    // is exercised by the acceptance suite.
    Scenario s;
    s.rows = 2;
    s.cols = 2;
    s.spacing = 0.098;
    s.initial_height = 0.06;
    s.cell_length = 0.1;
    s.material = kMat;
    s.mold_kind = "plane";
    s.mold_shear_deg = 20.0;
    s.n_steps = 30;
    const auto setup = make_setup(s);
    const auto trace = run(setup);
    REQUIRE(trace.states.size() == 30);

    int first_shear = 0, first_contact = 0, first_wrinkle = 0;
    for (const auto& st : trace.states) {
      if (st.flags.shear_active && first_shear == 0)
        first_shear = st.iteration;
      if (st.flags.contact_established && first_contact == 0)
        first_contact = st.iteration;
      if (st.flags.wrinkle_indicated && first_wrinkle == 0)
        first_wrinkle = st.iteration;
    }
    CHECK(trace.states[0].flags.slack_present);
    CHECK(first_shear > 1);
    CHECK(first_contact >= first_shear);
    CHECK(first_contact > 0);
    CHECK(first_wrinkle >= first_contact);
    CHECK(trace.states.back().flags.wrinkle_indicated);
  }
  TEST_CASE("bridging over a concave mold raises the diagnostic flag") {
    // Two bumps under the span's quarter points with a valley between: the
    // descending belly touches both bumps while spanning the dip.
    std::vector<double> xs, ys = {-0.2, 0.0, 0.2};
    std::vector<double> zs;
    const int nx = 81;
    for (int i = 0; i < nx; ++i) xs.push_back(-0.1 + 0.3 * i / (nx - 1));
    for (double y : ys) {
      (void)y;
      for (double x : xs) {
        const double t = (x - 0.049) / 0.049;  // span-centered coordinate
        zs.push_back(0.004 * std::cos(M_PI * t));  // valley in the middle
      }
    }
    SimulationSetup setup;
    setup.material = kMat;
    setup.mold = MoldSurface::heightfield(xs, ys, zs);
    setup.cell_length = 0.1;
    setup.grid.n_rows = 1;
    setup.grid.n_cols = 2;
    setup.grid.positions = {{0, 0, 0.02}, {0.098, 0, 0.02}};
    setup.trajectory.start = setup.grid.positions;
    setup.trajectory.target = {{0, 0, -0.002}, {0.098, 0, -0.002}};
    setup.trajectory.n_steps = 12;
    setup.contact_tol = 5e-4;

    const auto trace = run(setup);
    bool bridged = false;
    for (const auto& st : trace.states) bridged |= st.flags.bridging_indicated;
    CHECK(bridged);
    CHECK(trace.states.back().flags.contact_established);
  }

  TEST_CASE("members slacker than the stiffness allows leave the solve") {
    // A 2 cm span cannot absorb 1 cm of slack through bending-limited sag;
    // the member renders at the reaction floor instead of stalling the
    // solver.
    SimulationSetup setup;
    setup.material = kMat;
    setup.mold = MoldSurface::plane(-1.0, 0.0);
    setup.cell_length = 0.03;
    setup.grid.n_rows = 1;
    setup.grid.n_cols = 2;
    setup.grid.positions = {{0, 0, 0}, {0.02, 0, 0}};
    setup.trajectory.start = setup.grid.positions;
    setup.trajectory.target = setup.grid.positions;
    setup.trajectory.n_steps = 1;

    Simulator sim(setup);
    const auto state = sim.step(setup.grid.positions);
    REQUIRE(state.members.size() == 1);
    CHECK(sim.network().spec(0).status == MemberStatus::OverSlack);
    CHECK(state.solve.n_constraints == 0);
    CHECK(state.members[0].mode == RenderMode::Catenary);
    REQUIRE(state.members[0].solution.has_value());
    CHECK(state.members[0].solution->H == kHMin);
    CHECK(state.flags.slack_present);
    CHECK_FALSE(state.flags.solver_failed);
  }

  TEST_CASE("shear state latches once a cell has sheared") {
    auto setup = small_setup(0.05, -1.0, 2);
    Simulator sim(setup);

    // Step 1: a 20-degree parallelogram shears the main diagonal.
    const double g = 20.0 * M_PI / 180.0;
    std::vector<Vec3> sheared;
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c)
        sheared.push_back({c * 0.1 + r * 0.1 * std::sin(g),
                           r * 0.1 * std::cos(g), 0.05});
    auto s1 = sim.step(sheared);
    REQUIRE(s1.cells[0].shear == ShearState::Shearing);
    CHECK(s1.cells[0].gamma == doctest::Approx(g).epsilon(1e-9));
    CHECK(s1.flags.shear_active);

    // Step 2: back to the square; the cell stays latched and gamma follows
    // the latched diagonal's current extension.
    auto s2 = sim.step(setup.grid.positions);
    CHECK(s2.cells[0].shear == ShearState::Shearing);
    CHECK(s2.cells[0].gamma < 1e-3);
  }
}
