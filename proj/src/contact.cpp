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

#include "drape/contact.hpp"

#include <cmath>

namespace drape {
namespace {

double partial_length(const Polyline& p, int first, int last) {
  double sum = 0.0;
  for (int i = first + 1; i <= last; ++i) {
    sum += distance(p.points[static_cast<std::size_t>(i - 1)],
                    p.points[static_cast<std::size_t>(i)]);
  }
  return sum;
}

// Prescribed physical slope of a free child at its mold-side end: the mold
// surface slope along the child's horizontal direction (from -> to).
double mold_side_slope(const MoldSurface& mold, const Vec3& at,
                       const Vec3& from, const Vec3& to) {
  const double hx = to.x - from.x, hy = to.y - from.y;
  const double h = std::hypot(hx, hy);
  if (h < kSpanEpsilon) return 0.0;
  return mold.slope_along(at.x, at.y, hx / h, hy / h);
}

}  // namespace

ContactScan detect_contact(const Polyline& p, const MoldSurface& mold,
                           double tol) {
  if (!(tol > 0.0))
    throw Error(ErrorCode::InvalidArgument, "detect_contact: tol must be > 0");
  ContactScan scan;
  const int n = static_cast<int>(p.size());
  int run_start = -1;
  int best_len = 0;
  for (int i = 0; i <= n; ++i) {
    const bool touching =
        i < n &&
        mold.vertical_clearance(p.points[static_cast<std::size_t>(i)]) <= tol;
    if (touching && run_start < 0) run_start = i;
    if (!touching && run_start >= 0) {
      ++scan.n_regions;
      const int len = i - run_start;
      if (len > best_len) {
        best_len = len;
        scan.range = IndexRange{run_start, i - 1};
      }
      run_start = -1;
    }
  }
  scan.multiple = scan.n_regions >= 2;
  return scan;
}

SplitOutcome split_catenary(const CatenarySpec& parent, const Polyline& p,
                            IndexRange range, const MoldSurface& mold) {
  const int n = static_cast<int>(p.size());
  if (range.first < 0 || range.last >= n || range.first > range.last)
    throw Error(ErrorCode::InvalidArgument, "split_catenary: bad range");

  SplitOutcome out;
  out.segment.catenary_id = parent.id;
  out.segment.range = range;
  out.segment.fixed_points.assign(
      p.points.begin() + range.first, p.points.begin() + range.last + 1);
  out.segment.arc_length = partial_length(p, range.first, range.last);

  // A child is viable only when its horizontal footprint supports a frame.
  const bool left_viable =
      range.first > 0 &&
      (p.points[static_cast<std::size_t>(range.first)] - p.points.front())
              .horizontal_norm() >= kSpanEpsilon;
  const bool right_viable =
      range.last < n - 1 &&
      (p.points.back() - p.points[static_cast<std::size_t>(range.last)])
              .horizontal_norm() >= kSpanEpsilon;

  const double arc_left = left_viable ? partial_length(p, 0, range.first) : 0.0;
  const double arc_right =
      right_viable ? partial_length(p, range.last, n - 1) : 0.0;
  const double arc_total =
      arc_left + partial_length(p, range.first, range.last) + arc_right;
  const double scale = (arc_total > 0.0) ? parent.set_length / arc_total : 0.0;

  double left_length = 0.0, right_length = 0.0;
  if (left_viable) {
    CatenarySpec child;
    child.kind = parent.kind;
    child.parent = parent.id;
    child.anchor_a = parent.anchor_a;
    child.anchor_b =
        AnchorRef::at_point(p.points[static_cast<std::size_t>(range.first)]);
    left_length = arc_left * scale;
    child.set_length = left_length;
    child.bc_a = parent.bc_a;
    child.bc_b = EndBinding::derived();
    child.bc_b.derived_slope =
        mold_side_slope(mold, child.anchor_b.fixed, p.points.front(),
                        child.anchor_b.fixed);
    child.name = parent.name + "/L";
    out.left = std::move(child);
  }
  if (right_viable) {
    CatenarySpec child;
    child.kind = parent.kind;
    child.parent = parent.id;
    child.anchor_a =
        AnchorRef::at_point(p.points[static_cast<std::size_t>(range.last)]);
    child.anchor_b = parent.anchor_b;
    right_length = arc_right * scale;
    child.set_length = right_length;
    child.bc_a = EndBinding::derived();
    child.bc_a.derived_slope = mold_side_slope(
        mold, child.anchor_a.fixed, child.anchor_a.fixed, p.points.back());
    child.bc_b = parent.bc_b;
    child.name = parent.name + "/R";
    out.right = std::move(child);
  }

  // Close the length accounting exactly on the parent's set length.
  out.segment.length_share = parent.set_length - left_length - right_length;

  if (out.left && out.right)
    out.kind = SplitOutcome::Kind::Interior;
  else if (out.left)
    out.kind = SplitOutcome::Kind::LeftOnly;
  else if (out.right)
    out.kind = SplitOutcome::Kind::RightOnly;
  else
    out.kind = SplitOutcome::Kind::Full;
  return out;
}

}  // namespace drape
