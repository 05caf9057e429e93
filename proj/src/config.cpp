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

#include "drape/config.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace drape {
namespace {

struct Value {
  enum class Type { Number, String, Bool, NumberArray, StringArray };
  Type type = Type::Number;
  double num = 0.0;
  std::string str;
  bool flag = false;
  std::vector<double> nums;
  std::vector<std::string> strs;
  int line = 0;
};

using Table = std::map<std::string, std::map<std::string, Value>>;

[[noreturn]] void fail(const std::string& origin, int line,
                       const std::string& message) {
  throw Error(ErrorCode::ConfigError,
              origin + ":" + std::to_string(line) + ": " + message);
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double parse_number(const std::string& origin, int line, std::string tok) {
  tok = trim(tok);
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (tok.empty() || end != tok.c_str() + tok.size())
    fail(origin, line, "expected a number, got '" + tok + "'");
  return v;
}

Value parse_value(const std::string& origin, int line, const std::string& raw) {
  Value v;
  v.line = line;
  const std::string s = trim(raw);
  if (s.empty()) fail(origin, line, "empty value");
  if (s.front() == '"') {
    if (s.size() < 2 || s.back() != '"')
      fail(origin, line, "unterminated string");
    v.type = Value::Type::String;
    v.str = s.substr(1, s.size() - 2);
    return v;
  }
  if (s == "true" || s == "false") {
    v.type = Value::Type::Bool;
    v.flag = (s == "true");
    return v;
  }
  if (s.front() == '[') {
    if (s.back() != ']') fail(origin, line, "unterminated array");
    const std::string inner = trim(s.substr(1, s.size() - 2));
    v.type = Value::Type::NumberArray;
    if (inner.empty()) return v;
    std::vector<std::string> items;
    std::string cur;
    bool in_str = false;
    for (char ch : inner) {
      if (ch == '"') in_str = !in_str;
      if (ch == ',' && !in_str) {
        items.push_back(cur);
        cur.clear();
      } else {
        cur.push_back(ch);
      }
    }
    items.push_back(cur);
    if (trim(items.front()).front() == '"') {
      v.type = Value::Type::StringArray;
      for (auto& it : items) {
        const std::string t = trim(it);
        if (t.size() < 2 || t.front() != '"' || t.back() != '"')
          fail(origin, line, "bad string array element '" + t + "'");
        v.strs.push_back(t.substr(1, t.size() - 2));
      }
    } else {
      for (auto& it : items) v.nums.push_back(parse_number(origin, line, it));
    }
    return v;
  }
  v.type = Value::Type::Number;
  v.num = parse_number(origin, line, s);
  return v;
}

Table parse_table(const std::string& text, const std::string& origin) {
  Table table;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    // Strip comments outside strings.
    std::string stripped;
    bool in_str = false;
    for (char ch : line) {
      if (ch == '"') in_str = !in_str;
      if (ch == '#' && !in_str) break;
      stripped.push_back(ch);
    }
    stripped = trim(stripped);
    if (stripped.empty()) continue;
    if (stripped.front() == '[') {
      if (stripped.back() != ']')
        fail(origin, lineno, "malformed section header");
      section = trim(stripped.substr(1, stripped.size() - 2));
      if (section.empty()) fail(origin, lineno, "empty section name");
      table[section];
      continue;
    }
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      fail(origin, lineno, "expected 'key = value'");
    const std::string key = trim(stripped.substr(0, eq));
    if (key.empty()) fail(origin, lineno, "empty key");
    if (section.empty())
      fail(origin, lineno, "key '" + key + "' outside any section");
    if (table[section].count(key))
      fail(origin, lineno, "duplicate key '" + section + "." + key + "'");
    table[section][key] = parse_value(origin, lineno, stripped.substr(eq + 1));
  }
  return table;
}

// Typed view over one parsed section with known-key accounting.
class Section {
 public:
  using seen_t = std::set<std::string>;

  Section(const std::string& origin, const Table& table,
          const std::string& name)
      : origin_(origin), name_(name) {
    auto it = table.find(name);
    if (it != table.end()) entries_ = &it->second;
  }

  bool present() const { return entries_ != nullptr; }

  double number(const std::string& key, seen_t* seen) const {
    const Value& v = require(key, seen);
    if (v.type != Value::Type::Number)
      fail(origin_, v.line, field(key) + " must be a number");
    return v.num;
  }
  double number_or(const std::string& key, double fallback, seen_t* seen) const {
    if (!has(key)) return fallback;
    return number(key, seen);
  }
  std::string string_or(const std::string& key, const std::string& fallback,
                        seen_t* seen) const {
    if (!has(key)) return fallback;
    const Value& v = require(key, seen);
    if (v.type != Value::Type::String)
      fail(origin_, v.line, field(key) + " must be a string");
    return v.str;
  }
  std::vector<double> numbers_or(const std::string& key,
                                 std::vector<double> fallback,
                                 seen_t* seen) const {
    if (!has(key)) return fallback;
    const Value& v = require(key, seen);
    if (v.type != Value::Type::NumberArray)
      fail(origin_, v.line, field(key) + " must be a number array");
    return v.nums;
  }
  std::vector<std::string> strings_or(const std::string& key,
                                      std::vector<std::string> fallback,
                                      seen_t* seen) const {
    if (!has(key)) return fallback;
    const Value& v = require(key, seen);
    if (v.type != Value::Type::StringArray) {
      if (v.type == Value::Type::NumberArray && v.nums.empty()) return {};
      fail(origin_, v.line, field(key) + " must be a string array");
    }
    return v.strs;
  }

  void check_unknown(const seen_t& seen) const {
    if (entries_ == nullptr) return;
    for (const auto& [key, value] : *entries_) {
      if (!seen.count(key))
        fail(origin_, value.line, "unknown key '" + field(key) + "'");
    }
  }

 private:
  bool has(const std::string& key) const {
    return entries_ != nullptr && entries_->count(key) > 0;
  }
  const Value& require(const std::string& key, seen_t* seen) const {
    if (!has(key))
      throw Error(ErrorCode::ConfigError,
                  origin_ + ": missing required field '" + field(key) + "'");
    seen->insert(key);
    return entries_->at(key);
  }
  std::string field(const std::string& key) const { return name_ + "." + key; }

  std::string origin_;
  std::string name_;
  const std::map<std::string, Value>* entries_ = nullptr;
};

void validate(const Scenario& s, const std::string& origin) {
  auto require = [&origin](bool ok, const std::string& message) {
    if (!ok) throw Error(ErrorCode::ConfigError, origin + ": " + message);
  };
  require(s.rows >= 1 && s.cols >= 1 && s.rows * s.cols >= 2,
          "grid must hold at least 2 grippers");
  require(s.spacing > 0.0, "grid.spacing must be > 0");
  require(s.cell_length > 0.0, "cell.length must be > 0");
  require(s.material.mass_per_length > 0.0,
          "material.mass_per_length must be > 0");
  require(s.material.gravity > 0.0, "material.gravity must be > 0");
  require(s.material.elastic_modulus > 0.0,
          "material.elastic_modulus must be > 0");
  require(s.material.second_moment > 0.0,
          "material.second_moment must be > 0");
  require(s.mold_kind == "plane" || s.mold_kind == "heightfield",
          "mold.kind must be 'plane' or 'heightfield'");
  require(s.mold_kind != "heightfield" || !s.mold_file.empty(),
          "mold.file is required for heightfield molds");
  require(s.mold_shear_deg > -90.0 && s.mold_shear_deg < 90.0,
          "mold.shear_deg must be in (-90, 90)");
  require(s.n_steps >= 1, "trajectory.n_steps must be >= 1");
  require(s.max_rotation_deg > 0.0 && s.max_rotation_deg < 90.0,
          "grid.max_rotation_deg must be in (0, 90)");
  require(s.contact_tol > 0.0, "tolerances.contact must be > 0");
  require(s.wrinkle_separation > 0.0,
          "tolerances.wrinkle_separation must be > 0");
  require(s.slack_ratio > 0.0, "tolerances.slack_ratio must be > 0");
  require(s.reconcile > 0.0, "tolerances.reconcile must be > 0");
  require(s.n_points >= 2, "tolerances.n_points must be >= 2");
  require(s.solver_max_iter >= 1, "solver.max_iter must be >= 1");
  require(s.solver_kkt_tol > 0.0, "solver.kkt_tol must be > 0");
  require(s.solver_constraint_tol > 0.0, "solver.constraint_tol must be > 0");
  static const std::set<std::string> known_formats = {"csv", "vtk", "svg",
                                                      "report"};
  for (const std::string& f : s.formats)
    require(known_formats.count(f) > 0, "unknown output format '" + f + "'");
}

}  // namespace

Scenario parse_scenario_text(const std::string& text,
                             const std::string& origin) {
  const Table table = parse_table(text, origin);
  static const std::set<std::string> known_sections = {
      "grid", "cell", "material", "mold", "trajectory",
      "solver", "tolerances", "shear", "output"};
  for (const auto& [name, entries] : table) {
    if (!known_sections.count(name)) {
      const int line = entries.empty() ? 0 : entries.begin()->second.line;
      fail(origin, line, "unknown section [" + name + "]");
    }
  }

  Scenario s;
  Section::seen_t seen;

  Section grid(origin, table, "grid");
  s.rows = static_cast<int>(grid.number("rows", &seen));
  s.cols = static_cast<int>(grid.number("cols", &seen));
  s.spacing = grid.number("spacing", &seen);
  s.initial_height = grid.number("initial_height", &seen);
  s.max_rotation_deg = grid.number_or("max_rotation_deg", 40.0, &seen);
  grid.check_unknown(seen);

  seen.clear();
  Section cell(origin, table, "cell");
  s.cell_length = cell.number("length", &seen);
  cell.check_unknown(seen);

  seen.clear();
  Section material(origin, table, "material");
  s.material.mass_per_length = material.number("mass_per_length", &seen);
  s.material.gravity = material.number("gravity", &seen);
  s.material.elastic_modulus = material.number("elastic_modulus", &seen);
  s.material.second_moment = material.number("second_moment", &seen);
  material.check_unknown(seen);

  seen.clear();
  Section mold(origin, table, "mold");
  s.mold_kind = mold.string_or("kind", "plane", &seen);
  s.mold_base_height = mold.number_or("base_height", 0.0, &seen);
  s.mold_shear_deg = mold.number_or("shear_deg", 0.0, &seen);
  s.mold_file = mold.string_or("file", "", &seen);
  mold.check_unknown(seen);

  seen.clear();
  Section trajectory(origin, table, "trajectory");
  s.n_steps = static_cast<int>(trajectory.number("n_steps", &seen));
  trajectory.check_unknown(seen);

  seen.clear();
  Section solver(origin, table, "solver");
  s.solver_max_iter =
      static_cast<int>(solver.number_or("max_iter", 100, &seen));
  s.solver_kkt_tol = solver.number_or("kkt_tol", 1e-6, &seen);
  s.solver_constraint_tol = solver.number_or("constraint_tol", 1e-6, &seen);
  solver.check_unknown(seen);

  seen.clear();
  Section tolerances(origin, table, "tolerances");
  s.contact_tol = tolerances.number_or("contact", 1e-3, &seen);
  s.wrinkle_separation =
      tolerances.number_or("wrinkle_separation", 2e-3, &seen);
  s.slack_ratio = tolerances.number_or("slack_ratio", 0.02, &seen);
  s.reconcile = tolerances.number_or("reconcile", 1e-4, &seen);
  s.n_points = static_cast<int>(
      tolerances.number_or("n_points", kDefaultSamples, &seen));
  tolerances.check_unknown(seen);

  seen.clear();
  Section shear(origin, table, "shear");
  s.shear_coefficients = shear.numbers_or("coefficients", {1.0}, &seen);
  shear.check_unknown(seen);

  seen.clear();
  Section output(origin, table, "output");
  s.formats = output.strings_or("formats", {"csv", "report"}, &seen);
  s.svg_iterations = output.numbers_or("svg_iterations", {}, &seen);
  output.check_unknown(seen);

  validate(s, origin);
  return s;
}

Scenario parse_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw Error(ErrorCode::ConfigError, "cannot open scenario: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  Scenario s = parse_scenario_text(buffer.str(), path);
  s.base_dir = std::filesystem::path(path).parent_path().string();
  return s;
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_array(const std::vector<double>& vs) {
  std::string out = "[";
  for (std::size_t i = 0; i < vs.size(); ++i) {
    if (i) out += ", ";
    out += fmt(vs[i]);
  }
  return out + "]";
}

std::string fmt_array(const std::vector<std::string>& vs) {
  std::string out = "[";
  for (std::size_t i = 0; i < vs.size(); ++i) {
    if (i) out += ", ";
    out += "\"" + vs[i] + "\"";
  }
  return out + "]";
}

}  // namespace

std::string emit_scenario(const Scenario& s) {
  std::ostringstream out;
  out << "[grid]\n"
      << "rows = " << s.rows << "\n"
      << "cols = " << s.cols << "\n"
      << "spacing = " << fmt(s.spacing) << "\n"
      << "initial_height = " << fmt(s.initial_height) << "\n"
      << "max_rotation_deg = " << fmt(s.max_rotation_deg) << "\n\n"
      << "[cell]\n"
      << "length = " << fmt(s.cell_length) << "\n\n"
      << "[material]\n"
      << "mass_per_length = " << fmt(s.material.mass_per_length) << "\n"
      << "gravity = " << fmt(s.material.gravity) << "\n"
      << "elastic_modulus = " << fmt(s.material.elastic_modulus) << "\n"
      << "second_moment = " << fmt(s.material.second_moment) << "\n\n"
      << "[mold]\n"
      << "kind = \"" << s.mold_kind << "\"\n"
      << "base_height = " << fmt(s.mold_base_height) << "\n"
      << "shear_deg = " << fmt(s.mold_shear_deg) << "\n";
  if (!s.mold_file.empty()) out << "file = \"" << s.mold_file << "\"\n";
  out << "\n[trajectory]\n"
      << "n_steps = " << s.n_steps << "\n\n"
      << "[solver]\n"
      << "max_iter = " << s.solver_max_iter << "\n"
      << "kkt_tol = " << fmt(s.solver_kkt_tol) << "\n"
      << "constraint_tol = " << fmt(s.solver_constraint_tol) << "\n\n"
      << "[tolerances]\n"
      << "contact = " << fmt(s.contact_tol) << "\n"
      << "wrinkle_separation = " << fmt(s.wrinkle_separation) << "\n"
      << "slack_ratio = " << fmt(s.slack_ratio) << "\n"
      << "reconcile = " << fmt(s.reconcile) << "\n"
      << "n_points = " << s.n_points << "\n\n"
      << "[shear]\n"
      << "coefficients = " << fmt_array(s.shear_coefficients) << "\n\n"
      << "[output]\n"
      << "formats = " << fmt_array(s.formats) << "\n";
  if (!s.svg_iterations.empty())
    out << "svg_iterations = " << fmt_array(s.svg_iterations) << "\n";
  return out.str();
}

bool Scenario::operator==(const Scenario& o) const {
  return rows == o.rows && cols == o.cols && spacing == o.spacing &&
         initial_height == o.initial_height &&
         max_rotation_deg == o.max_rotation_deg &&
         cell_length == o.cell_length &&
         material.mass_per_length == o.material.mass_per_length &&
         material.gravity == o.material.gravity &&
         material.elastic_modulus == o.material.elastic_modulus &&
         material.second_moment == o.material.second_moment &&
         mold_kind == o.mold_kind && mold_base_height == o.mold_base_height &&
         mold_shear_deg == o.mold_shear_deg && mold_file == o.mold_file &&
         n_steps == o.n_steps && solver_max_iter == o.solver_max_iter &&
         solver_kkt_tol == o.solver_kkt_tol &&
         solver_constraint_tol == o.solver_constraint_tol &&
         contact_tol == o.contact_tol &&
         wrinkle_separation == o.wrinkle_separation &&
         slack_ratio == o.slack_ratio && reconcile == o.reconcile &&
         n_points == o.n_points &&
         shear_coefficients == o.shear_coefficients && formats == o.formats &&
         svg_iterations == o.svg_iterations;
}

MoldSurface make_mold(const Scenario& s) {
  if (s.mold_kind == "plane") {
    return MoldSurface::plane(s.mold_base_height,
                              s.mold_shear_deg * M_PI / 180.0);
  }
  std::filesystem::path p(s.mold_file);
  if (p.is_relative() && !s.base_dir.empty())
    p = std::filesystem::path(s.base_dir) / p;
  return MoldSurface::heightfield_from_csv(p.string());
}

SimulationSetup make_setup(const Scenario& s) {
  SimulationSetup setup;
  setup.material = s.material;
  setup.mold = make_mold(s);
  setup.cell_length = s.cell_length;
  setup.shear_model.coefficients = s.shear_coefficients;
  setup.sqp.max_iter = s.solver_max_iter;
  setup.sqp.kkt_tol = s.solver_kkt_tol;
  setup.sqp.constraint_tol = s.solver_constraint_tol;
  setup.contact_tol = s.contact_tol;
  setup.wrinkle_separation_tol = s.wrinkle_separation;
  setup.slack_ratio_tol = s.slack_ratio;
  setup.reconcile_tol = s.reconcile;
  setup.n_points = s.n_points;

  setup.grid.n_rows = s.rows;
  setup.grid.n_cols = s.cols;
  setup.grid.slope_limit = std::tan(s.max_rotation_deg * M_PI / 180.0);
  const double cx = 0.5 * (s.cols - 1), cy = 0.5 * (s.rows - 1);
  setup.grid.positions.reserve(static_cast<std::size_t>(s.rows) * s.cols);
  for (int r = 0; r < s.rows; ++r) {
    for (int c = 0; c < s.cols; ++c) {
      setup.grid.positions.push_back({(c - cx) * s.spacing,
                                      (r - cy) * s.spacing,
                                      s.initial_height});
    }
  }
  setup.trajectory.start = setup.grid.positions;
  setup.trajectory.target =
      target_points(setup.mold, s.rows, s.cols, s.cell_length);
  setup.trajectory.n_steps = s.n_steps;
  return setup;
}

}  // namespace drape
