#include "plap/io.hpp"

#include <json.hpp>

#include <cmath>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace plap {

namespace {

using ordered_json = nlohmann::ordered_json;

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> toks;
  std::istringstream is(line);
  std::string t;
  while (is >> t) toks.push_back(t);
  return toks;
}

double parse_real(const std::string& tok, const std::string& where) {
  size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(tok, &used);
  } catch (const std::exception&) {
    throw ParseError(where + ": bad number '" + tok + "'");
  }
  if (used != tok.size()) throw ParseError(where + ": bad number '" + tok + "'");
  return v;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot open file '" + path + "' for writing");
  out << content;
  if (!out) throw ParseError("write to '" + path + "' failed");
}

}  // namespace

Graph parse_graph_text(std::string_view text, const std::string& origin) {
  GraphBuilder b;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  bool any_node = false;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = origin + ":" + std::to_string(lineno);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto toks = tokenize(line);
    if (toks.empty() || toks[0][0] == '#') continue;
    try {
      if (toks[0] == "node") {
        if (toks.size() != 3) throw ParseError(where + ": node expects '<id> <nu>'");
        b.add_node(toks[1], parse_real(toks[2], where));
        any_node = true;
      } else if (toks[0] == "edge") {
        if (toks.size() != 4) throw ParseError(where + ": edge expects '<tail> <head> <mu>'");
        b.add_edge(toks[1], toks[2], parse_real(toks[3], where));
      } else if (toks[0] == "halo") {
        if (toks.size() != 3) throw ParseError(where + ": halo expects '<id> <extra-mu-degree>'");
        b.add_halo(toks[1], parse_real(toks[2], where));
      } else {
        throw ParseError(where + ": unknown directive '" + toks[0] + "'");
      }
    } catch (const PreconditionError& e) {
      throw ParseError(where + ": " + e.what());
    }
  }
  if (!any_node) throw ParseError(origin + ": graph file declares no nodes");
  try {
    return b.build();
  } catch (const PreconditionError& e) {
    throw ParseError(origin + ": " + e.what());
  }
}

Graph parse_graph_file(const std::string& path) { return parse_graph_text(read_file(path), path); }

std::string format_full(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string emit_graph_text(const Graph& g) {
  std::string out = "# plap graph v1\n";
  for (int v = 0; v < g.node_count(); ++v)
    out += "node " + g.node_id(v) + " " + format_full(g.nu(v)) + "\n";
  for (const Edge& ed : g.edges())
    out += "edge " + g.node_id(ed.tail) + " " + g.node_id(ed.head) + " " + format_full(ed.mu) +
           "\n";
  for (int v = 0; v < g.node_count(); ++v)
    if (g.halo_degree(v) > 0.0)
      out += "halo " + g.node_id(v) + " " + format_full(g.halo_degree(v)) + "\n";
  return out;
}

void write_graph_file(const Graph& g, const std::string& path) {
  write_file(path, emit_graph_text(g));
}

std::string trajectory_csv(const Graph& g, const Trajectory& traj) {
  std::string out = "t";
  for (int v = 0; v < g.node_count(); ++v) out += "," + g.node_id(v);
  out += "\n";
  for (size_t k = 0; k < traj.times.size(); ++k) {
    out += format_full(traj.times[k]);
    const NodeFunction& st = traj.states[k];
    for (int v = 0; v < g.node_count(); ++v) out += "," + format_full(st[v]);
    out += "\n";
  }
  return out;
}

void write_trajectory_csv(const Graph& g, const Trajectory& traj, const std::string& path) {
  write_file(path, trajectory_csv(g, traj));
}

Trajectory read_trajectory_csv(const Graph& g, const std::string& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path + ": empty trajectory file");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  std::vector<std::string> cols;
  std::stringstream hs(line);
  std::string cell;
  while (std::getline(hs, cell, ',')) cols.push_back(cell);
  if (cols.empty() || cols[0] != "t")
    throw ParseError(path + ":1: header must start with 't'");
  if (static_cast<int>(cols.size()) - 1 != g.node_count())
    throw ParseError(path + ":1: header has " + std::to_string(cols.size() - 1) +
                     " node columns, graph has " + std::to_string(g.node_count()) + " nodes");
  std::vector<int> col_node(cols.size() - 1);
  std::vector<char> seen(static_cast<size_t>(g.node_count()), 0);
  for (size_t c = 1; c < cols.size(); ++c) {
    const auto idx = g.find_node(cols[c]);
    if (!idx) throw ParseError(path + ":1: unknown node id '" + cols[c] + "'");
    if (seen[static_cast<size_t>(*idx)])
      throw ParseError(path + ":1: duplicate node column '" + cols[c] + "'");
    seen[static_cast<size_t>(*idx)] = 1;
    col_node[c - 1] = *idx;
  }

  Trajectory traj;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(lineno);
    std::stringstream ls(line);
    std::vector<std::string> cells;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() != cols.size())
      throw ParseError(where + ": expected " + std::to_string(cols.size()) + " cells");
    traj.times.push_back(parse_real(cells[0], where));
    NodeFunction st(g.node_count());
    for (size_t c = 1; c < cells.size(); ++c)
      st[col_node[c - 1]] = parse_real(cells[c], where);
    traj.states.push_back(std::move(st));
  }
  if (traj.times.empty()) throw ParseError(path + ": no samples");
  for (size_t k = 1; k < traj.times.size(); ++k)
    if (!(traj.times[k] > traj.times[k - 1]))
      throw ParseError(path + ": sample times must increase strictly");
  return traj;
}

namespace {

Method method_from_string(const std::string& s) {
  if (s == "explicit-adaptive") return Method::explicit_adaptive;
  if (s == "implicit-euler") return Method::implicit_euler;
  throw ParseError("unknown method '" + s + "' (explicit-adaptive | implicit-euler)");
}

const char* method_to_string(Method m) {
  return m == Method::explicit_adaptive ? "explicit-adaptive" : "implicit-euler";
}

}  // namespace

SolverConfig solver_config_from_json_text(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const std::exception& e) {
    throw ParseError(std::string("config JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("config JSON: expected an object");
  SolverConfig cfg;
  for (const auto& [key, val] : j.items()) {
    try {
      if (key == "method")
        cfg.method = method_from_string(val.get<std::string>());
      else if (key == "atol")
        cfg.atol = val.get<double>();
      else if (key == "rtol")
        cfg.rtol = val.get<double>();
      else if (key == "dt")
        cfg.dt = val.get<double>();
      else if (key == "inner_tol")
        cfg.inner_tol = val.get<double>();
      else if (key == "inner_max_iter")
        cfg.inner_max_iter = val.get<int>();
      else if (key == "extinction_eps")
        cfg.extinction_eps = val.get<double>();
      else if (key == "dense_output_every")
        cfg.dense_output_every = val.get<double>();
      else
        throw ParseError("config JSON: unknown key '" + key + "'");
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("config JSON: bad value for '" + key + "': " + e.what());
    }
  }
  return cfg;
}

std::string solver_config_to_json_text(const SolverConfig& cfg) {
  ordered_json j;
  j["method"] = method_to_string(cfg.method);
  j["atol"] = cfg.atol;
  j["rtol"] = cfg.rtol;
  j["dt"] = cfg.dt;
  j["inner_tol"] = cfg.inner_tol;
  j["inner_max_iter"] = cfg.inner_max_iter;
  j["extinction_eps"] = cfg.extinction_eps;
  j["dense_output_every"] = cfg.dense_output_every;
  return j.dump(2);
}

namespace {

// JSON has no inf/nan literals; emit them as strings so q = inf survives.
ordered_json json_number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

ordered_json report_json(const PropertyReport& rep) {
  ordered_json j;
  j["check"] = rep.check;
  j["pass"] = rep.pass;
  j["margin"] = json_number(rep.margin);
  ordered_json params = ordered_json::object();
  for (const auto& [k, v] : rep.params) params[k] = json_number(v);
  j["params"] = params;
  j["trajectory_ref"] = rep.trajectory_ref;
  return j;
}

}  // namespace

std::string property_report_to_json_text(const PropertyReport& rep) {
  return report_json(rep).dump(2);
}

std::string property_reports_to_json_text(const std::vector<PropertyReport>& reps) {
  ordered_json arr = ordered_json::array();
  for (const auto& r : reps) arr.push_back(report_json(r));
  return arr.dump(2);
}

}  // namespace plap
