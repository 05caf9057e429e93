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

#include <string>
#include <vector>

#include "drape/material.hpp"
#include "drape/mold.hpp"
#include "drape/simulation.hpp"
#include "drape/solver.hpp"

namespace drape {

// Scenario file contents (TOML-style sections, SI units, angles in degrees).
struct Scenario {
  // [grid]
  int rows = 2;
  int cols = 2;
  double spacing = 0.0;         // m, initial rectangular spacing
  double initial_height = 0.0;  // m
  double max_rotation_deg = 40.0;
  // [cell]
  double cell_length = 0.0;  // m
  // [material]
  Material material;
  // [mold]
  std::string mold_kind = "plane";  // "plane" | "heightfield"
  double mold_base_height = 0.0;
  double mold_shear_deg = 0.0;
  std::string mold_file;  // heightfield csv, relative to the scenario file
  // [trajectory]
  int n_steps = 1;
  // [solver]
  int solver_max_iter = 100;
  double solver_kkt_tol = 1e-6;
  double solver_constraint_tol = 1e-6;
  // [tolerances]
  double contact_tol = 1e-3;
  double wrinkle_separation = 2e-3;
  double slack_ratio = 0.02;
  double reconcile = 1e-4;
  int n_points = kDefaultSamples;
  // [shear]
  std::vector<double> shear_coefficients{1.0};
  // [output]
  std::vector<std::string> formats{"csv", "report"};
  std::vector<double> svg_iterations;  // empty: first, middle, last

  std::string base_dir;  // directory of the parsed file, not serialized

  bool operator==(const Scenario& o) const;
};

// Parses and validates a scenario file; unknown keys are rejected and
// errors carry file:line/field diagnostics. Throws ConfigError.
Scenario parse_scenario(const std::string& path);
Scenario parse_scenario_text(const std::string& text,
                             const std::string& origin = "<string>");

// Canonical writer; parse(emit(s)) == s.
std::string emit_scenario(const Scenario& s);

MoldSurface make_mold(const Scenario& s);

// Builds the simulation inputs: start lattice (rectangular, centered,
// elevated), gripper targets on the mold, solver options and tolerances.
SimulationSetup make_setup(const Scenario& s);

}  // namespace drape
