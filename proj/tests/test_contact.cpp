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

#include "drape/catenary.hpp"
#include "drape/contact.hpp"

using namespace drape;

namespace {

const Material kMat{0.3143, 9.8, 1.0e8, 9.0e-14};

// A slack catenary over a flat mold, solved so its belly dips below the
// contact tolerance band around z = z0.
Polyline sagging_polyline(double anchor_z, double z0, int n) {
  const auto frame =
      LocalFrame::between({0, 0, anchor_z}, {0.098, 0, anchor_z});
  (void)z0;
  auto sol = solve_catenary(frame, 0.3, BoundaryCondition::free(),
                            BoundaryCondition::free(), kMat);
  return sample(sol, n);
}

CatenarySpec edge_spec(double set_length) {
  CatenarySpec s;
  s.id = 7;
  s.kind = CatenaryKind::Edge;
  s.anchor_a = AnchorRef::at_gripper(0);
  s.anchor_b = AnchorRef::at_gripper(1);
  s.set_length = set_length;
  s.bc_a = EndBinding::shared(2);
  s.bc_b = EndBinding::free_end();
  s.name = "edge_test";
  return s;
}

}  // namespace

TEST_SUITE("contact") {
  TEST_CASE("a span clear of the mold reports no contact") {
    const MoldSurface mold = MoldSurface::plane(0.0, 0.0);
    const Polyline p = sagging_polyline(0.02, 0.0, 101);
    const auto scan = detect_contact(p, mold, 1e-3);
    CHECK_FALSE(scan.range.has_value());
    CHECK(scan.n_regions == 0);
    CHECK_FALSE(scan.multiple);
    CHECK_THROWS_AS(detect_contact(p, mold, 0.0), Error);
  }

  TEST_CASE("a sagging belly yields one contiguous mid-span range") {
    const MoldSurface mold = MoldSurface::plane(0.0, 0.0);
    const double tol = 1e-3;
    // Anchors at 5 mm: an ~8 mm sag pushes the belly through the band.
    const Polyline p = sagging_polyline(0.005, 0.0, 101);
    const auto scan = detect_contact(p, mold, tol);
    REQUIRE(scan.range.has_value());
    CHECK(scan.n_regions == 1);
    CHECK_FALSE(scan.multiple);
    // Oracle: direct clearance scan.
    int first = -1, last = -1;
    for (int i = 0; i < 101; ++i) {
      if (mold.vertical_clearance(p[static_cast<std::size_t>(i)]) <= tol) {
        if (first < 0) first = i;
        last = i;
      }
    }
    CHECK(scan.range->first == first);
    CHECK(scan.range->last == last);
    CHECK(first > 0);
    CHECK(last < 100);
  }

  TEST_CASE("disjoint touch regions raise the bridging indication") {
    const MoldSurface mold = MoldSurface::plane(0.0, 0.0);
    Polyline w;
    for (int i = 0; i <= 40; ++i) {
      const double t = i / 40.0;
      // W shape: dips below z=0 around t=0.25 and t=0.75.
      const double z = 0.02 * std::cos(4.0 * M_PI * t) + 0.0199;
      w.points.push_back({t, 0.0, z});
    }
    const auto scan = detect_contact(w, mold, 1e-3);
    CHECK(scan.multiple);
    CHECK(scan.n_regions == 2);
    REQUIRE(scan.range.has_value());
    // The largest region is returned for the split decision.
    CHECK(scan.range->first <= scan.range->last);
  }

  TEST_CASE("interior splits freeze the belly and conserve length") {
    const MoldSurface mold = MoldSurface::plane(0.0, 0.0);
    const Polyline p = sagging_polyline(0.005, 0.0, 101);
    const auto scan = detect_contact(p, mold, 1e-3);
    REQUIRE(scan.range.has_value());

    const CatenarySpec parent = edge_spec(0.100);
    const auto outcome = split_catenary(parent, p, *scan.range, mold);
    CHECK(outcome.kind == SplitOutcome::Kind::Interior);
    REQUIRE(outcome.left.has_value());
    REQUIRE(outcome.right.has_value());

    // Conservation against the parent's set length.
    const double total = outcome.left->set_length + outcome.segment.length_share +
                         outcome.right->set_length;
    CHECK(std::abs(total - parent.set_length) <= 1e-9);
    CHECK(outcome.segment.arc_length ==
          doctest::Approx(polyline_length(Polyline{outcome.segment.fixed_points}))
              .epsilon(1e-12));

    // Children inherit the gripper-side bindings and take prescribed
    // mold-side slopes (zero on the flat mold).
    CHECK(outcome.left->anchor_a.kind == AnchorRef::Kind::Gripper);
    CHECK(outcome.left->anchor_b.kind == AnchorRef::Kind::Fixed);
    CHECK(outcome.left->bc_a.kind == BindingKind::SharedVariable);
    CHECK(outcome.left->bc_b.kind == BindingKind::DerivedValue);
    CHECK(outcome.left->bc_b.derived_slope == 0.0);
    CHECK(outcome.right->bc_a.kind == BindingKind::DerivedValue);
    CHECK(outcome.right->bc_b.kind == BindingKind::Free);
    CHECK(outcome.left->parent == parent.id);

    // Frozen points sit inside the contact band.
    for (const Vec3& q : outcome.segment.fixed_points) {
      CHECK(mold.vertical_clearance(q) <= 1e-3 + 1e-12);
    }

    // Idempotence: scanning the frozen points reproduces the full range.
    Polyline frozen{outcome.segment.fixed_points};
    const auto rescan = detect_contact(frozen, mold, 1e-3);
    REQUIRE(rescan.range.has_value());
    CHECK(rescan.range->first == 0);
    CHECK(rescan.range->last ==
          static_cast<int>(frozen.size()) - 1);
  }

  TEST_CASE("a range touching one end produces a single child") {
    const MoldSurface mold = MoldSurface::plane(0.0, 0.0);
    Polyline p;
    const int n = 51;
    for (int i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) / (n - 1);
      p.points.push_back({0.1 * t, 0.0, 0.02 * (1.0 - t)});  // lands at B
    }
    const CatenarySpec parent = edge_spec(0.11);
    const auto scan = detect_contact(p, mold, 1e-3);
    REQUIRE(scan.range.has_value());
    CHECK(scan.range->last == n - 1);
    const auto outcome = split_catenary(parent, p, *scan.range, mold);
    CHECK(outcome.kind == SplitOutcome::Kind::LeftOnly);
    CHECK(outcome.left.has_value());
    CHECK_FALSE(outcome.right.has_value());
    CHECK(std::abs(outcome.left->set_length + outcome.segment.length_share -
                   parent.set_length) <= 1e-9);
  }

  TEST_CASE("full-band spans are frozen whole") {
    const MoldSurface mold = MoldSurface::plane(0.0, 0.0);
    Polyline p;
    for (int i = 0; i < 21; ++i)
      p.points.push_back({0.005 * i, 0.0, 0.0005});
    const CatenarySpec parent = edge_spec(0.1001);
    const auto outcome =
        split_catenary(parent, p, IndexRange{0, 20}, mold);
    CHECK(outcome.kind == SplitOutcome::Kind::Full);
    CHECK_FALSE(outcome.left.has_value());
    CHECK_FALSE(outcome.right.has_value());
    CHECK(outcome.segment.length_share ==
          doctest::Approx(parent.set_length).epsilon(1e-15));
    CHECK_THROWS_AS(split_catenary(parent, p, IndexRange{5, 30}, mold), Error);
  }
}
