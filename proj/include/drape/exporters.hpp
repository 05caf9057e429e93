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
#include <utility>
#include <vector>

#include "drape/config.hpp"
#include "drape/simulation.hpp"

namespace drape {

// points.csv: iter,catenary_id,kind,point_idx,x,y,z (17 significant digits).
void export_csv(const DrapeTrace& trace, const std::string& dir);

// Legacy-ASCII VTK polydata, one file per iteration: member polylines plus
// frozen contact points as vertices.
void export_vtk(const DrapeTrace& trace, const std::string& dir);

// Three orthographic projections per selected iteration and a flags
// timeline.
void export_svg(const DrapeTrace& trace, const Scenario& scenario,
                const std::string& dir);

// report.json: per-iteration flags, solver diagnostics, shear angles and
// contact events. Deterministic; wall times go to timings.json instead.
void export_report(const DrapeTrace& trace, const Scenario& scenario,
                   const std::string& dir);

void export_timings(const DrapeTrace& trace, const std::string& dir);

// Machine-readable record of the whole run; export() re-reads it.
void save_trace(const DrapeTrace& trace, const Scenario& scenario,
                const std::string& dir);
std::pair<DrapeTrace, Scenario> load_trace(const std::string& dir);

// Dispatches on format names {"csv", "vtk", "svg", "report"}.
void export_trace(const DrapeTrace& trace, const Scenario& scenario,
                  const std::vector<std::string>& formats,
                  const std::string& dir);

}  // namespace drape
