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

#include <CLI11.hpp>
#include <cstdio>
#include <string>
#include <vector>

#include "drape/config.hpp"
#include "drape/exporters.hpp"
#include "drape/kernels/kernels.hpp"
#include "drape/simulation.hpp"
#include "drape/solver.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitIo = 2;
constexpr int kExitInternal = 3;

std::vector<std::string> split_formats(const std::string& arg) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : arg) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

int run_command(const std::string& scenario_path, const std::string& out_dir,
                const std::string& formats_arg) {
  const drape::Scenario scenario = drape::parse_scenario(scenario_path);
  const drape::SimulationSetup setup = drape::make_setup(scenario);
  const drape::DrapeTrace trace = drape::run(setup);

  const std::vector<std::string> formats =
      formats_arg.empty() ? scenario.formats : split_formats(formats_arg);
  drape::save_trace(trace, scenario, out_dir);
  drape::export_timings(trace, out_dir);
  drape::export_trace(trace, scenario, formats, out_dir);

  const drape::FabricState& last = trace.states.back();
  std::printf("ran %zu iterations (%zu members, %zu frozen segments)\n",
              trace.states.size(), last.members.size(),
              last.registry.segments.size());
  std::printf(
      "flags: slack=%d shear=%d contact=%d wrinkle=%d bridging=%d "
      "solver_failed=%d\n",
      last.flags.slack_present, last.flags.shear_active,
      last.flags.contact_established, last.flags.wrinkle_indicated,
      last.flags.bridging_indicated, last.flags.solver_failed);
  std::printf("outputs in %s (kernels: %s)\n", out_dir.c_str(),
              drape::kernels::active_ops().name);
  return kExitOk;
}

void print_gradient_report(const drape::GradCheckReport& report) {
  std::printf("%-10s checked %4d entries  max rel %.3e  tol %.1e  %s\n",
              report.mode.c_str(), report.n_checked, report.max_rel,
              report.tolerance, report.pass ? "PASS" : "FAIL");
  if (report.mode == "jacobian")
    std::printf("%-10s max off-pattern OFD entry %.3e (tol 1e-10)\n", "",
                report.max_off_pattern);
  for (const drape::GradCheckEntry& e : report.worst) {
    std::printf("  (%2d,%2d) analytic % .9e  fd % .9e  rel %.3e\n", e.row,
                e.col, e.analytic, e.fd, e.rel);
  }
}

int check_gradients_command(const std::string& scenario_path,
                            const std::string& mode) {
  const drape::Scenario scenario = drape::parse_scenario(scenario_path);
  const drape::SimulationSetup setup = drape::make_setup(scenario);
  const drape::CatenaryNetwork net =
      drape::build_network(setup.grid, setup.cell_length, setup.shear_model);
  const drape::NlpProblem problem = drape::assemble_nlp(
      net, setup.grid.positions, setup.material, setup.n_points);

  Eigen::VectorXd x0(problem.n_vars());
  const int m = problem.n_constraints();
  for (int i = 0; i < m; ++i) {
    const auto& con = problem.constraints[static_cast<std::size_t>(i)];
    x0(i) = drape::initial_reaction_estimate(con.frame, con.set_length,
                                             setup.material);
  }
  for (int v = m; v < problem.n_vars(); ++v) x0(v) = 0.0;

  std::printf("gradient check on the start configuration (%d variables, %d "
              "constraints)\n",
              problem.n_vars(), m);
  if (mode.empty() || mode == "objective")
    print_gradient_report(drape::check_gradients(problem, x0, "objective"));
  if (mode.empty() || mode == "jacobian")
    print_gradient_report(drape::check_gradients(problem, x0, "jacobian"));
  return kExitOk;
}

int export_command(const std::string& trace_dir, const std::string& out_dir,
                   const std::string& formats_arg) {
  auto [trace, scenario] = drape::load_trace(trace_dir);
  const std::vector<std::string> formats =
      formats_arg.empty() ? scenario.formats : split_formats(formats_arg);
  drape::export_trace(trace, scenario, formats,
                      out_dir.empty() ? trace_dir : out_dir);
  return kExitOk;
}

int map_error(const drape::Error& e) {
  std::fprintf(stderr, "error: %s\n", e.what());
  switch (e.code()) {
    case drape::ErrorCode::IoError:
      return kExitIo;
    case drape::ErrorCode::ConfigError:
    case drape::ErrorCode::InvalidArgument:
    case drape::ErrorCode::InvalidGrid:
      return kExitConfig;
    default:
      return kExitInternal;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"catenary-network fabric draping simulator"};
  app.require_subcommand(1);

  std::string scenario_path, out_dir = "./out", formats, mode, trace_dir;

  CLI::App* run = app.add_subcommand("run", "run a draping scenario");
  run->add_option("scenario", scenario_path, "scenario config file")
      ->required();
  run->add_option("--out", out_dir, "output directory (default ./out)");
  run->add_option("--formats", formats,
                  "comma-separated: csv,vtk,svg,report (default from config)");

  CLI::App* grad =
      app.add_subcommand("check-gradients", "verify derivative correctness");
  grad->add_option("scenario", scenario_path, "scenario config file")
      ->required();
  grad->add_option("--mode", mode, "objective|jacobian (default both)")
      ->check(CLI::IsMember({"objective", "jacobian"}));

  CLI::App* exp =
      app.add_subcommand("export", "re-export a recorded trace directory");
  exp->add_option("trace_dir", trace_dir, "directory containing trace.json")
      ->required();
  exp->add_option("--out", out_dir, "output directory (default trace dir)")
      ->capture_default_str();
  exp->add_option("--formats", formats, "comma-separated formats");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (run->parsed()) return run_command(scenario_path, out_dir, formats);
    if (grad->parsed()) return check_gradients_command(scenario_path, mode);
    if (exp->parsed())
      return export_command(trace_dir, out_dir == "./out" ? "" : out_dir,
                            formats);
  } catch (const drape::Error& e) {
    return map_error(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return kExitInternal;
  }
  return kExitOk;
}
