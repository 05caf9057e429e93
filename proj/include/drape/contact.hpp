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

#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "drape/assembly.hpp"
#include "drape/geometry.hpp"
#include "drape/mold.hpp"

namespace drape {

inline constexpr double kDefaultContactTol = 1e-3;  // m

struct IndexRange {
  int first = 0;
  int last = 0;  // inclusive
};

struct ContactScan {
  std::optional<IndexRange> range;  // largest contiguous contact run
  int n_regions = 0;
  bool multiple = false;  // >= 2 disjoint runs: ply-bridging indication
};

// Maximal contiguous sample range with vertical clearance <= tol. Multiple
// disjoint ranges set the bridging flag and return the largest one.
ContactScan detect_contact(const Polyline& p, const MoldSurface& mold,
                           double tol);

// A frozen (mold-adhered) piece of one catenary. fixed_points never change
// after creation; length_share is the portion of the parent's set length
// accounted to this segment so that child lengths + share close the sum
// exactly.
struct ContactSegment {
  int catenary_id = -1;
  IndexRange range{};
  std::vector<Vec3> fixed_points;
  double arc_length = 0.0;
  double length_share = 0.0;
  int iteration = -1;
};

struct SplitOutcome {
  enum class Kind { Interior, LeftOnly, RightOnly, Full };
  Kind kind = Kind::Full;
  std::optional<CatenarySpec> left, right;  // ids unassigned
  ContactSegment segment;
};

// Freezes the contacted range and builds the free child spans. Child set
// lengths are the pre-split sampled arc portions rescaled so that
// L_left + share + L_right equals the parent set length; mold-side child
// ends receive a prescribed slope equal to the local mold slope.
SplitOutcome split_catenary(const CatenarySpec& parent, const Polyline& p,
                            IndexRange range, const MoldSurface& mold);

struct ContactRegistry {
  std::vector<ContactSegment> segments;
  std::map<int, std::pair<int, int>> splits;  // parent id -> child ids, -1 absent

  bool empty() const { return segments.empty(); }
};

}  // namespace drape
