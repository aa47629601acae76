#pragma once

#include "plap/analysis.hpp"
#include "plap/io.hpp"

#include <optional>
#include <string>
#include <vector>

namespace plap {

/// One solver run specified by flags or a config document: exactly one graph
/// source, initial data spec, horizon, solver config and requested checks.
struct Scenario {
  std::optional<std::string> graph_file;
  std::optional<LatticeSpec> lattice;
  std::optional<int> path_n;
  std::optional<int> cycle_n;

  double p = 2.0;
  bool dirichlet = false;
  /// delta:<id>|delta:center|indicator:<id,...>|file:<path>|expr:<expression>
  std::string f0 = "delta:center";
  double T = 1.0;
  SolverConfig config;
  /// Subset of {mass, lq, positivity} evaluated on the produced trajectory.
  std::vector<std::string> checks;
  std::uint64_t seed = 0x1d5a2f53u;
  /// Artifacts are written to <out>.csv and <out>.json when set.
  std::string out;
};

Graph resolve_graph(const Scenario& s);
NodeFunction resolve_f0(const Graph& g, const std::string& spec);

struct ScenarioResult {
  Trajectory trajectory;
  std::vector<PropertyReport> reports;
  std::string csv_path;
  std::string json_path;
  std::string report_json;
};

/// Tolerance a scenario check runs at, derived from the solver config:
/// 1e-12 (explicit) or 10 * inner_tol (implicit) for mass, and
/// 1e-9 plus the integrator allowance for the pathwise checks.
double default_check_tol(const std::string& check, const SolverConfig& cfg);

/// Runs the scenario and writes the artifacts. Outputs are deterministic
/// functions of the scenario (fixed seed, fixed config).
ScenarioResult run_scenario(const Scenario& s);

/// Exit code category of an error: parse = 2, precondition = 3, solver = 4,
/// anything else 1.
int exit_code_for(const std::exception& e);

}  // namespace plap
