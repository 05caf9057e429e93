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

#include "drape/exporters.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

namespace drape {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create directory " + dir);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  return out;
}

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const char* kind_name(CatenaryKind k) {
  return k == CatenaryKind::Edge ? "edge" : "diagonal";
}

const char* status_name(SqpStatus s) {
  switch (s) {
    case SqpStatus::Converged:
      return "converged";
    case SqpStatus::MaxIter:
      return "max_iter";
    case SqpStatus::Infeasible:
    default:
      return "infeasible";
  }
}

json flags_json(const IterationFlags& f) {
  return json{{"slack_present", f.slack_present},
              {"shear_active", f.shear_active},
              {"contact_established", f.contact_established},
              {"wrinkle_indicated", f.wrinkle_indicated},
              {"bridging_indicated", f.bridging_indicated},
              {"solver_failed", f.solver_failed}};
}

json points_json(const std::vector<Vec3>& pts) {
  json a = json::array();
  for (const Vec3& p : pts) a.push_back({p.x, p.y, p.z});
  return a;
}

std::vector<Vec3> points_from_json(const json& a) {
  std::vector<Vec3> pts;
  pts.reserve(a.size());
  for (const auto& p : a)
    pts.push_back({p.at(0).get<double>(), p.at(1).get<double>(),
                   p.at(2).get<double>()});
  return pts;
}

}  // namespace

void export_csv(const DrapeTrace& trace, const std::string& dir) {
  ensure_dir(dir);
  std::ofstream out = open_out(dir + "/points.csv");
  out << "iter,catenary_id,kind,point_idx,x,y,z\n";
  for (const FabricState& state : trace.states) {
    for (const MemberState& ms : state.members) {
      for (std::size_t i = 0; i < ms.polyline.size(); ++i) {
        const Vec3& p = ms.polyline[i];
        out << state.iteration << ',' << ms.id << ',' << kind_name(ms.kind)
            << ',' << i << ',' << g17(p.x) << ',' << g17(p.y) << ','
            << g17(p.z) << '\n';
      }
    }
  }
}

void export_vtk(const DrapeTrace& trace, const std::string& dir) {
  ensure_dir(dir + "/vtk");
  for (const FabricState& state : trace.states) {
    char name[64];
    std::snprintf(name, sizeof name, "/vtk/iter_%03d.vtk", state.iteration);
    std::ofstream out = open_out(dir + name);

    std::size_t n_points = 0;
    for (const MemberState& ms : state.members) n_points += ms.polyline.size();
    std::size_t n_frozen = 0;
    for (const ContactSegment& seg : state.registry.segments)
      n_frozen += seg.fixed_points.size();

    out << "# vtk DataFile Version 3.0\n"
        << "fabric catenary network, iteration " << state.iteration << "\n"
        << "ASCII\nDATASET POLYDATA\n";
    out << "POINTS " << (n_points + n_frozen) << " double\n";
    for (const MemberState& ms : state.members) {
      for (const Vec3& p : ms.polyline.points)
        out << g17(p.x) << ' ' << g17(p.y) << ' ' << g17(p.z) << '\n';
    }
    for (const ContactSegment& seg : state.registry.segments) {
      for (const Vec3& p : seg.fixed_points)
        out << g17(p.x) << ' ' << g17(p.y) << ' ' << g17(p.z) << '\n';
    }

    std::size_t list_size = 0;
    for (const MemberState& ms : state.members)
      list_size += 1 + ms.polyline.size();
    out << "LINES " << state.members.size() << ' ' << list_size << '\n';
    std::size_t offset = 0;
    for (const MemberState& ms : state.members) {
      out << ms.polyline.size();
      for (std::size_t i = 0; i < ms.polyline.size(); ++i)
        out << ' ' << (offset + i);
      out << '\n';
      offset += ms.polyline.size();
    }

    if (n_frozen > 0) {
      out << "VERTICES " << n_frozen << ' ' << 2 * n_frozen << '\n';
      for (std::size_t i = 0; i < n_frozen; ++i)
        out << "1 " << (n_points + i) << '\n';
    }
  }
}

namespace {

struct Projection {
  const char* label;
  double (*u)(const Vec3&);
  double (*v)(const Vec3&);
};

constexpr Projection kProjections[3] = {
    {"top (x-y)", [](const Vec3& p) { return p.x; },
     [](const Vec3& p) { return p.y; }},
    {"front (x-z)", [](const Vec3& p) { return p.x; },
     [](const Vec3& p) { return p.z; }},
    {"side (y-z)", [](const Vec3& p) { return p.y; },
     [](const Vec3& p) { return p.z; }},
};

std::string svg_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

void svg_iteration(const FabricState& state, const std::string& path) {
  constexpr double kw = 420.0, kh = 300.0, margin = 30.0;
  std::ofstream out = open_out(path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kw
      << "\" height=\"" << (3 * kh) << "\">\n";
  for (int pr = 0; pr < 3; ++pr) {
    const Projection& proj = kProjections[pr];
    double u0 = 1e300, u1 = -1e300, v0 = 1e300, v1 = -1e300;
    auto grow = [&](const Vec3& p) {
      u0 = std::min(u0, proj.u(p));
      u1 = std::max(u1, proj.u(p));
      v0 = std::min(v0, proj.v(p));
      v1 = std::max(v1, proj.v(p));
    };
    for (const MemberState& ms : state.members)
      for (const Vec3& p : ms.polyline.points) grow(p);
    for (const Vec3& p : state.gripper_positions) grow(p);
    const double du = std::max(u1 - u0, 1e-9), dv = std::max(v1 - v0, 1e-9);
    const double scale =
        std::min((kw - 2 * margin) / du, (kh - 2 * margin) / dv);
    const double oy = pr * kh;
    auto X = [&](const Vec3& p) {
      return margin + (proj.u(p) - u0) * scale;
    };
    auto Y = [&](const Vec3& p) {
      return oy + kh - margin - (proj.v(p) - v0) * scale;
    };

    out << "<text x=\"8\" y=\"" << (oy + 16)
        << "\" font-family=\"sans-serif\" font-size=\"12\">iteration "
        << state.iteration << " — " << proj.label << "</text>\n";
    for (const MemberState& ms : state.members) {
      out << "<polyline fill=\"none\" stroke=\""
          << (ms.kind == CatenaryKind::Edge ? "#b22222" : "#e88a8a")
          << "\" stroke-width=\"1\""
          << (ms.mode == RenderMode::Straight
                  ? " stroke-dasharray=\"4,3\""
                  : "")
          << " points=\"";
      for (const Vec3& p : ms.polyline.points)
        out << svg_num(X(p)) << ',' << svg_num(Y(p)) << ' ';
      out << "\"/>\n";
    }
    for (const ContactSegment& seg : state.registry.segments) {
      for (const Vec3& p : seg.fixed_points) {
        out << "<circle cx=\"" << svg_num(X(p)) << "\" cy=\"" << svg_num(Y(p))
            << "\" r=\"1.6\" fill=\"#d40000\"/>\n";
      }
    }
    for (const Vec3& p : state.gripper_positions) {
      out << "<circle cx=\"" << svg_num(X(p)) << "\" cy=\"" << svg_num(Y(p))
          << "\" r=\"3\" fill=\"none\" stroke=\"black\"/>\n";
    }
  }
  out << "</svg>\n";
}

void svg_timeline(const DrapeTrace& trace, const std::string& path) {
  static const char* kLabels[6] = {"slack",   "shear",    "contact",
                                   "wrinkle", "bridging", "solver failed"};
  const int n = static_cast<int>(trace.states.size());
  constexpr int cell = 14, left = 110, top = 24;
  std::ofstream out = open_out(path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\""
      << (left + n * cell + 10) << "\" height=\"" << (top + 6 * cell + 24)
      << "\" font-family=\"sans-serif\" font-size=\"10\">\n";
  out << "<text x=\"4\" y=\"14\">flags per iteration</text>\n";
  for (int row = 0; row < 6; ++row) {
    out << "<text x=\"4\" y=\"" << (top + row * cell + 11) << "\">"
        << kLabels[row] << "</text>\n";
    for (int k = 0; k < n; ++k) {
      const IterationFlags& f = trace.states[static_cast<std::size_t>(k)].flags;
      const bool on = row == 0   ? f.slack_present
                      : row == 1 ? f.shear_active
                      : row == 2 ? f.contact_established
                      : row == 3 ? f.wrinkle_indicated
                      : row == 4 ? f.bridging_indicated
                                 : f.solver_failed;
      out << "<rect x=\"" << (left + k * cell) << "\" y=\"" << (top + row * cell)
          << "\" width=\"" << (cell - 2) << "\" height=\"" << (cell - 2)
          << "\" fill=\"" << (on ? "#2e8b57" : "#dddddd") << "\"/>\n";
    }
  }
  for (int k = 0; k < n; k += std::max(1, n / 10)) {
    out << "<text x=\"" << (left + k * cell) << "\" y=\""
        << (top + 6 * cell + 14) << "\">" << (k + 1) << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace

void export_svg(const DrapeTrace& trace, const Scenario& scenario,
                const std::string& dir) {
  ensure_dir(dir + "/svg");
  std::vector<int> selected;
  if (!scenario.svg_iterations.empty()) {
    for (double v : scenario.svg_iterations)
      selected.push_back(static_cast<int>(v));
  } else {
    const int n = static_cast<int>(trace.states.size());
    selected = {1, (n + 1) / 2, n};
  }
  std::sort(selected.begin(), selected.end());
  selected.erase(std::unique(selected.begin(), selected.end()),
                 selected.end());
  for (int k : selected) {
    if (k < 1 || k > static_cast<int>(trace.states.size())) continue;
    char name[64];
    std::snprintf(name, sizeof name, "/svg/iter_%03d.svg", k);
    svg_iteration(trace.states[static_cast<std::size_t>(k - 1)], dir + name);
  }
  svg_timeline(trace, dir + "/svg/flags_timeline.svg");
}

namespace {

json state_report(const FabricState& state) {
  json it;
  it["iteration"] = state.iteration;
  it["flags"] = flags_json(state.flags);
  it["solver"] = {{"status", status_name(state.solve.status)},
                  {"iterations", state.solve.iterations},
                  {"objective", state.solve.objective},
                  {"max_constraint_residual",
                   state.solve.max_constraint_residual},
                  {"kkt_residual", state.solve.kkt_residual},
                  {"n_variables", state.solve.n_variables},
                  {"n_constraints", state.solve.n_constraints}};
  json cells = json::array();
  for (const CellState& c : state.cells) {
    cells.push_back({{"shear", c.shear == ShearState::Shearing ? "shearing"
                                                               : "none"},
                     {"gamma_deg", c.gamma * 180.0 / M_PI},
                     {"reaction", c.reaction},
                     {"diagonal_separation", c.diagonal_separation},
                     {"has_contact", c.has_contact}});
  }
  it["cells"] = cells;
  json events = json::array();
  for (const ContactSegment& seg : state.new_segments) {
    events.push_back({{"catenary_id", seg.catenary_id},
                      {"first", seg.range.first},
                      {"last", seg.range.last},
                      {"arc_length", seg.arc_length},
                      {"length_share", seg.length_share}});
  }
  it["contact_events"] = events;
  it["n_members"] = state.members.size();
  it["n_frozen_segments"] = state.registry.segments.size();
  return it;
}

int first_iteration(const DrapeTrace& trace,
                    bool (*pred)(const IterationFlags&)) {
  for (const FabricState& s : trace.states) {
    if (pred(s.flags)) return s.iteration;
  }
  return 0;
}

}  // namespace

void export_report(const DrapeTrace& trace, const Scenario& scenario,
                   const std::string& dir) {
  ensure_dir(dir);
  json report;
  report["scenario"] = {{"rows", scenario.rows},
                        {"cols", scenario.cols},
                        {"spacing", scenario.spacing},
                        {"cell_length", scenario.cell_length},
                        {"mold_shear_deg", scenario.mold_shear_deg},
                        {"n_steps", scenario.n_steps}};
  report["events"] = {
      {"first_slack", first_iteration(trace, [](const IterationFlags& f) {
         return f.slack_present;
       })},
      {"first_shear", first_iteration(trace, [](const IterationFlags& f) {
         return f.shear_active;
       })},
      {"first_contact", first_iteration(trace, [](const IterationFlags& f) {
         return f.contact_established;
       })},
      {"first_wrinkle", first_iteration(trace, [](const IterationFlags& f) {
         return f.wrinkle_indicated;
       })},
      {"first_bridging", first_iteration(trace, [](const IterationFlags& f) {
         return f.bridging_indicated;
       })}};
  json iterations = json::array();
  for (const FabricState& s : trace.states) iterations.push_back(state_report(s));
  report["iterations"] = iterations;

  std::ofstream out = open_out(dir + "/report.json");
  out << report.dump(2) << '\n';
}

void export_timings(const DrapeTrace& trace, const std::string& dir) {
  ensure_dir(dir);
  json t;
  t["seconds_per_iteration"] = trace.seconds;
  double total = 0.0;
  for (double s : trace.seconds) total += s;
  t["total_seconds"] = total;
  t["mean_seconds"] =
      trace.seconds.empty() ? 0.0 : total / trace.seconds.size();
  std::ofstream out = open_out(dir + "/timings.json");
  out << t.dump(2) << '\n';
}

void save_trace(const DrapeTrace& trace, const Scenario& scenario,
                const std::string& dir) {
  ensure_dir(dir);
  json root;
  root["scenario"] = emit_scenario(scenario);
  root["seconds"] = trace.seconds;
  json states = json::array();
  for (const FabricState& s : trace.states) {
    json st;
    st["iteration"] = s.iteration;
    st["grippers"] = points_json(s.gripper_positions);
    json members = json::array();
    for (const MemberState& ms : s.members) {
      members.push_back(
          {{"id", ms.id},
           {"name", ms.name},
           {"kind", kind_name(ms.kind)},
           {"mode", ms.mode == RenderMode::Catenary ? "catenary" : "straight"},
           {"set_length", ms.set_length},
           {"chord", ms.chord},
           {"points", points_json(ms.polyline.points)}});
    }
    st["members"] = members;
    json cells = json::array();
    for (const CellState& c : s.cells) {
      cells.push_back({{"shear", c.shear == ShearState::Shearing ? "shearing"
                                                                 : "none"},
                       {"slot", c.shearing_slot},
                       {"gamma", c.gamma},
                       {"reaction", c.reaction},
                       {"separation", c.diagonal_separation},
                       {"has_contact", c.has_contact}});
    }
    st["cells"] = cells;
    json segments = json::array();
    for (const ContactSegment& seg : s.registry.segments) {
      segments.push_back({{"catenary_id", seg.catenary_id},
                          {"first", seg.range.first},
                          {"last", seg.range.last},
                          {"iteration", seg.iteration},
                          {"arc_length", seg.arc_length},
                          {"length_share", seg.length_share},
                          {"points", points_json(seg.fixed_points)}});
    }
    st["segments"] = segments;
    json splits = json::array();
    for (const auto& [parent, children] : s.registry.splits)
      splits.push_back({parent, children.first, children.second});
    st["splits"] = splits;
    st["n_new_segments"] = s.new_segments.size();
    st["solve"] = {{"status", status_name(s.solve.status)},
                   {"iterations", s.solve.iterations},
                   {"objective", s.solve.objective},
                   {"max_constraint_residual",
                    s.solve.max_constraint_residual},
                   {"kkt_residual", s.solve.kkt_residual},
                   {"n_variables", s.solve.n_variables},
                   {"n_constraints", s.solve.n_constraints}};
    st["flags"] = flags_json(s.flags);
    states.push_back(std::move(st));
  }
  root["states"] = states;
  std::ofstream out = open_out(dir + "/trace.json");
  out << root.dump() << '\n';
}

std::pair<DrapeTrace, Scenario> load_trace(const std::string& dir) {
  std::ifstream in(dir + "/trace.json");
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + dir + "/trace.json");
  json root;
  try {
    in >> root;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::IoError,
                std::string("malformed trace.json: ") + e.what());
  }

  Scenario scenario =
      parse_scenario_text(root.at("scenario").get<std::string>(),
                          dir + "/trace.json#scenario");
  scenario.base_dir = dir;
  DrapeTrace trace;
  trace.seconds = root.at("seconds").get<std::vector<double>>();
  for (const json& st : root.at("states")) {
    FabricState s;
    s.iteration = st.at("iteration").get<int>();
    s.gripper_positions = points_from_json(st.at("grippers"));
    for (const json& m : st.at("members")) {
      MemberState ms;
      ms.id = m.at("id").get<int>();
      ms.name = m.at("name").get<std::string>();
      ms.kind = m.at("kind").get<std::string>() == "edge"
                    ? CatenaryKind::Edge
                    : CatenaryKind::Diagonal;
      ms.mode = m.at("mode").get<std::string>() == "catenary"
                    ? RenderMode::Catenary
                    : RenderMode::Straight;
      ms.set_length = m.at("set_length").get<double>();
      ms.chord = m.at("chord").get<double>();
      ms.polyline.points = points_from_json(m.at("points"));
      s.members.push_back(std::move(ms));
    }
    for (const json& c : st.at("cells")) {
      CellState cs;
      cs.shear = c.at("shear").get<std::string>() == "shearing"
                     ? ShearState::Shearing
                     : ShearState::None;
      cs.shearing_slot = c.at("slot").get<int>();
      cs.gamma = c.at("gamma").get<double>();
      cs.reaction = c.at("reaction").get<double>();
      cs.diagonal_separation = c.at("separation").get<double>();
      cs.has_contact = c.at("has_contact").get<bool>();
      s.cells.push_back(cs);
    }
    for (const json& g : st.at("segments")) {
      ContactSegment seg;
      seg.catenary_id = g.at("catenary_id").get<int>();
      seg.range.first = g.at("first").get<int>();
      seg.range.last = g.at("last").get<int>();
      seg.iteration = g.at("iteration").get<int>();
      seg.arc_length = g.at("arc_length").get<double>();
      seg.length_share = g.at("length_share").get<double>();
      seg.fixed_points = points_from_json(g.at("points"));
      s.registry.segments.push_back(std::move(seg));
    }
    for (const json& sp : st.at("splits")) {
      s.registry.splits[sp.at(0).get<int>()] = {sp.at(1).get<int>(),
                                                sp.at(2).get<int>()};
    }
    const std::size_t n_new = st.at("n_new_segments").get<std::size_t>();
    if (n_new > 0 && n_new <= s.registry.segments.size()) {
      s.new_segments.assign(s.registry.segments.end() - n_new,
                            s.registry.segments.end());
    }
    const json& sv = st.at("solve");
    const std::string status = sv.at("status").get<std::string>();
    s.solve.status = status == "converged"    ? SqpStatus::Converged
                     : status == "max_iter"   ? SqpStatus::MaxIter
                                              : SqpStatus::Infeasible;
    s.solve.iterations = sv.at("iterations").get<int>();
    s.solve.objective = sv.at("objective").get<double>();
    s.solve.max_constraint_residual =
        sv.at("max_constraint_residual").get<double>();
    s.solve.kkt_residual = sv.at("kkt_residual").get<double>();
    s.solve.n_variables = sv.at("n_variables").get<int>();
    s.solve.n_constraints = sv.at("n_constraints").get<int>();
    const json& fl = st.at("flags");
    s.flags.slack_present = fl.at("slack_present").get<bool>();
    s.flags.shear_active = fl.at("shear_active").get<bool>();
    s.flags.contact_established = fl.at("contact_established").get<bool>();
    s.flags.wrinkle_indicated = fl.at("wrinkle_indicated").get<bool>();
    s.flags.bridging_indicated = fl.at("bridging_indicated").get<bool>();
    s.flags.solver_failed = fl.at("solver_failed").get<bool>();
    trace.states.push_back(std::move(s));
  }
  return {std::move(trace), std::move(scenario)};
}

void export_trace(const DrapeTrace& trace, const Scenario& scenario,
                  const std::vector<std::string>& formats,
                  const std::string& dir) {
  for (const std::string& f : formats) {
    if (f == "csv")
      export_csv(trace, dir);
    else if (f == "vtk")
      export_vtk(trace, dir);
    else if (f == "svg")
      export_svg(trace, scenario, dir);
    else if (f == "report")
      export_report(trace, scenario, dir);
    else
      throw Error(ErrorCode::ConfigError, "unknown export format '" + f + "'");
  }
}

}  // namespace drape
