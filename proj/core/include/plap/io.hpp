#pragma once

#include "plap/analysis.hpp"
#include "plap/solver.hpp"

#include <iosfwd>
#include <string>

namespace plap {

/// Strict line-oriented graph format:
///   # comment
///   node <id> <nu>
///   edge <tail-id> <head-id> <mu>
///   halo <id> <extra-mu-degree>
/// Unknown directives, bad arity, bad numbers, duplicates and unknown ids
/// are ParseErrors naming the offending line.
Graph parse_graph_text(std::string_view text, const std::string& origin = "<string>");
Graph parse_graph_file(const std::string& path);

/// Canonical emission: fixed header comment, nodes in index order, edges in
/// list order, halo lines for positive degrees, 17 significant digits.
/// parse(emit(g)) reproduces emit(g) byte for byte.
std::string emit_graph_text(const Graph& g);
void write_graph_file(const Graph& g, const std::string& path);

/// Shortest decimal form with 17 significant digits ("%.17g").
std::string format_full(double x);

/// Trajectory CSV: header `t,<node-id-1>,...`, one row per sample, full
/// precision decimals.
std::string trajectory_csv(const Graph& g, const Trajectory& traj);
void write_trajectory_csv(const Graph& g, const Trajectory& traj, const std::string& path);
/// Columns must match the graph's node set exactly.
Trajectory read_trajectory_csv(const Graph& g, const std::string& path);

/// SolverConfig <-> JSON with the canonical field names
/// {method, atol, rtol, dt, inner_tol, inner_max_iter, extinction_eps,
/// dense_output_every}. Unknown keys are ParseErrors.
SolverConfig solver_config_from_json_text(const std::string& text);
std::string solver_config_to_json_text(const SolverConfig& cfg);

std::string property_report_to_json_text(const PropertyReport& rep);
std::string property_reports_to_json_text(const std::vector<PropertyReport>& reps);

}  // namespace plap
