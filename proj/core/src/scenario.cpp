#include "plap/scenario.hpp"

#include "plap/expr.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace plap {

namespace {

using ordered_json = nlohmann::ordered_json;

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

}  // namespace

Graph resolve_graph(const Scenario& s) {
  const int sources = (s.graph_file ? 1 : 0) + (s.lattice ? 1 : 0) + (s.path_n ? 1 : 0) +
                      (s.cycle_n ? 1 : 0);
  if (sources != 1)
    throw PreconditionError("scenario: exactly one graph source required (file | lattice | path | cycle)");
  if (s.graph_file) return parse_graph_file(*s.graph_file);
  if (s.lattice) return lattice_box(*s.lattice);
  if (s.path_n) return path_graph(*s.path_n);
  return cycle_graph(*s.cycle_n);
}

NodeFunction resolve_f0(const Graph& g, const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string kind = colon == std::string::npos ? spec : spec.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);

  NodeFunction f = NodeFunction::Zero(g.node_count());
  if (kind == "delta") {
    if (arg.empty()) throw PreconditionError("f0 spec: delta needs a node id or 'center'");
    const int v = arg == "center" ? lattice_center(g) : g.node_index(arg);
    f[v] = 1.0;
    return f;
  }
  if (kind == "indicator") {
    if (arg.empty()) throw PreconditionError("f0 spec: indicator needs node ids");
    for (const std::string& id : split(arg, ','))
      f[g.node_index(id)] = 1.0;
    return f;
  }
  if (kind == "file") {
    std::ifstream in(arg);
    if (!in) throw ParseError("cannot open initial data file '" + arg + "'");
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      std::istringstream ls(line);
      std::string id, value;
      if (!(ls >> id)) continue;
      if (id[0] == '#') continue;
      std::string extra;
      if (!(ls >> value) || (ls >> extra))
        throw ParseError(arg + ":" + std::to_string(lineno) + ": expected '<id> <value>'");
      try {
        f[g.node_index(id)] = std::stod(value);
      } catch (const PreconditionError& e) {
        throw ParseError(arg + ":" + std::to_string(lineno) + ": " + e.what());
      } catch (const std::exception&) {
        throw ParseError(arg + ":" + std::to_string(lineno) + ": bad number '" + value + "'");
      }
    }
    return f;
  }
  if (kind == "expr") {
    if (!g.has_coordinates())
      throw PreconditionError("f0 spec: expression initial data requires a lattice graph");
    const Expr e = Expr::parse(arg);
    for (int v = 0; v < g.node_count(); ++v) {
      const auto ci = g.coordinates(v);
      std::vector<double> c(ci.begin(), ci.end());
      f[v] = e.eval(c);
    }
    return f;
  }
  throw PreconditionError("f0 spec: unknown kind '" + kind +
                          "' (delta | indicator | file | expr)");
}

double default_check_tol(const std::string& check, const SolverConfig& cfg) {
  const bool exp = cfg.method == Method::explicit_adaptive;
  if (check == "mass") return exp ? 1e-12 : 10.0 * cfg.inner_tol;
  return 1e-9 + (exp ? 1e3 * cfg.rtol : 10.0 * cfg.inner_tol);
}

ScenarioResult run_scenario(const Scenario& s) {
  const Graph g = resolve_graph(s);
  const NodeFunction f0 = resolve_f0(g, s.f0);
  const Exponent p(s.p);

  std::optional<DirichletTruncation> bc;
  if (s.dirichlet) {
    DirichletTruncation tr;
    tr.nodes.resize(static_cast<size_t>(g.node_count()));
    for (int v = 0; v < g.node_count(); ++v) tr.nodes[static_cast<size_t>(v)] = v;
    bc = std::move(tr);
  }

  ScenarioResult res;
  res.trajectory = evolve(g, bc, p, f0, s.T, s.config);
  if (!s.out.empty()) {
    res.csv_path = s.out + ".csv";
    res.json_path = s.out + ".json";
  }

  for (const std::string& check : s.checks) {
    PropertyReport rep;
    if (check == "mass") {
      rep = check_mass_conservation(g, res.trajectory, default_check_tol(check, s.config));
    } else if (check == "positivity") {
      rep = check_positivity(g, res.trajectory);
    } else if (check == "lq") {
      for (double q : {1.0, 2.0, std::numeric_limits<double>::infinity()}) {
        PropertyReport r =
            check_lq_monotonicity(g, res.trajectory, q, default_check_tol(check, s.config));
        r.trajectory_ref = res.csv_path;
        res.reports.push_back(std::move(r));
      }
      continue;
    } else {
      throw PreconditionError("scenario: unknown check '" + check +
                              "' (mass | lq | positivity); pairwise checks live in `verify`");
    }
    rep.trajectory_ref = res.csv_path;
    res.reports.push_back(std::move(rep));
  }

  ordered_json j;
  j["scenario"] = ordered_json::object();
  auto& sc = j["scenario"];
  if (s.graph_file) sc["graph_file"] = *s.graph_file;
  if (s.lattice) {
    sc["lattice"] = ordered_json::object();
    sc["lattice"]["d"] = s.lattice->d;
    sc["lattice"]["n"] = s.lattice->n;
    sc["lattice"]["halo"] = s.lattice->halo;
    sc["lattice"]["nu"] = s.lattice->nu;
    sc["lattice"]["mu"] = s.lattice->mu;
  }
  if (s.path_n) sc["path"] = *s.path_n;
  if (s.cycle_n) sc["cycle"] = *s.cycle_n;
  sc["p"] = s.p;
  sc["bc"] = s.dirichlet ? "dirichlet" : "neumann";
  sc["f0"] = s.f0;
  sc["T"] = s.T;
  sc["seed"] = s.seed;
  sc["config"] = ordered_json::parse(solver_config_to_json_text(s.config));
  j["config_hash"] = res.trajectory.meta.config_hash;
  j["samples"] = res.trajectory.times.size();
  j["final_time"] = res.trajectory.times.back();
  j["checks"] = ordered_json::parse(property_reports_to_json_text(res.reports));
  res.report_json = j.dump(2) + "\n";

  if (!s.out.empty()) {
    write_trajectory_csv(g, res.trajectory, res.csv_path);
    std::ofstream out(res.json_path, std::ios::binary);
    if (!out) throw ParseError("cannot open '" + res.json_path + "' for writing");
    out << res.report_json;
  }
  return res;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ParseError*>(&e)) return 2;
  if (dynamic_cast<const PreconditionError*>(&e)) return 3;
  if (dynamic_cast<const SolverError*>(&e)) return 4;
  return 1;
}

}  // namespace plap
