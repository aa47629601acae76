// Command-line front end: generate | solve | verify | iso | bound | fit |
// poincare. Exit codes: 2 parse, 3 precondition, 4 solver failure.

#include <CLI11.hpp>

#include "plap/analysis.hpp"
#include "plap/io.hpp"
#include "plap/scenario.hpp"

#include <fstream>
#include <iostream>
#include <optional>

namespace {

using namespace plap;

struct GraphOpts {
  std::string file;
  std::vector<int> lattice;  // d n
  bool halo = false;
  int path_n = 0;
  int cycle_n = 0;

  void attach(CLI::App* app) {
    app->add_option("--graph", file, "Graph file (node/edge/halo lines)");
    app->add_option("--lattice", lattice, "Lattice box: <d> <n>")->expected(2);
    app->add_flag("--halo", halo, "Equip the lattice box with ambient halo degrees");
    app->add_option("--path", path_n, "Path graph on n nodes");
    app->add_option("--cycle", cycle_n, "Cycle graph on n nodes");
  }

  void fill(Scenario& s) const {
    if (!file.empty()) s.graph_file = file;
    if (!lattice.empty()) s.lattice = LatticeSpec{lattice[0], lattice[1], halo, 1.0, 1.0};
    if (path_n > 0) s.path_n = path_n;
    if (cycle_n > 0) s.cycle_n = cycle_n;
  }

  Graph resolve() const {
    Scenario s;
    fill(s);
    return resolve_graph(s);
  }
};

Method parse_method(const std::string& m) {
  if (m == "explicit" || m == "explicit-adaptive") return Method::explicit_adaptive;
  if (m == "implicit" || m == "implicit-euler") return Method::implicit_euler;
  throw PreconditionError("unknown method '" + m + "'");
}

void write_or_print(const std::string& out, const std::string& content) {
  if (out.empty()) {
    std::cout << content;
    return;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f) throw ParseError("cannot open '" + out + "' for writing");
  f << content;
}

int run(int argc, char** argv) {
  CLI::App app{"parabolic p-Laplace flows on weighted graphs"};
  app.require_subcommand(1);

  // ---- generate ----
  auto* gen = app.add_subcommand("generate", "Emit a generated graph file");
  GraphOpts gen_g;
  gen_g.attach(gen);
  std::string gen_out;
  gen->add_option("--out", gen_out, "Output file (stdout when omitted)");

  // ---- solve ----
  auto* solve = app.add_subcommand("solve", "Integrate the flow and emit trajectory artifacts");
  GraphOpts solve_g;
  solve_g.attach(solve);
  Scenario scen;
  std::string method_str, bc_str = "neumann", config_file;
  solve->add_option("--p", scen.p, "Exponent p > 1")->required();
  solve->add_option("--bc", bc_str, "neumann | dirichlet (halo absorption)");
  solve->add_option("--f0", scen.f0, "delta:<id>|delta:center|indicator:<ids>|file:<path>|expr:<e>");
  solve->add_option("--T", scen.T, "Horizon");
  auto* method_opt = solve->add_option("--method", method_str, "explicit-adaptive | implicit-euler");
  solve->add_option("--config", config_file, "SolverConfig JSON (flags override)");
  auto* atol_opt = solve->add_option("--atol", scen.config.atol, "Explicit absolute tolerance");
  auto* rtol_opt = solve->add_option("--rtol", scen.config.rtol, "Explicit relative tolerance");
  auto* dt_opt = solve->add_option("--dt", scen.config.dt, "Implicit step size");
  auto* itol_opt = solve->add_option("--inner-tol", scen.config.inner_tol, "Proximal residual tolerance");
  auto* iiter_opt = solve->add_option("--inner-max-iter", scen.config.inner_max_iter, "Proximal iteration cap");
  auto* eps_opt = solve->add_option("--extinction-eps", scen.config.extinction_eps, "Extinction band");
  auto* every_opt = solve->add_option("--every", scen.config.dense_output_every, "Sampling interval");
  solve->add_option("--check", scen.checks, "Checks to run on the trajectory (mass|lq|positivity)");
  solve->add_option("--seed", scen.seed, "Seed echoed into the report")->envname("PLAP_SEED");
  solve->add_option("--out", scen.out, "Artifact prefix: writes <out>.csv and <out>.json");

  // ---- verify ----
  auto* verify = app.add_subcommand("verify", "Evaluate a theorem check on stored trajectories");
  GraphOpts verify_g;
  verify_g.attach(verify);
  std::string v_check, v_traj, v_traj2, v_out;
  double v_p = 2.0, v_q = 2.0, v_tol = 1e-9;
  verify->add_option("--check", v_check, "mass|lq|positivity|contraction|order|domination")->required();
  verify->add_option("--traj", v_traj, "Trajectory CSV")->required();
  verify->add_option("--traj2", v_traj2, "Second trajectory CSV (pair checks)");
  verify->add_option("--p", v_p, "Exponent echoed into the report");
  verify->add_option("--q", v_q, "Norm exponent for the lq check (inf allowed)");
  verify->add_option("--tol", v_tol, "Check tolerance");
  verify->add_option("--out", v_out, "Report JSON file (stdout when omitted)");

  // ---- iso ----
  auto* iso = app.add_subcommand("iso", "Brute-force isoperimetric constant");
  GraphOpts iso_g;
  iso_g.attach(iso);
  double iso_d = 2.0;
  IsoOptions iso_opts;
  std::string iso_out;
  iso->add_option("--d", iso_d, "Isoperimetric dimension d > 1")->required();
  iso->add_option("--max-subset-size", iso_opts.max_subset_size, "Cardinality cap");
  iso->add_option("--samples", iso_opts.sample_count, "Random subsets in sampling mode");
  iso->add_flag("--allow-sampling", iso_opts.allow_sampling, "Permit sampling beyond the exhaustive cap");
  iso->add_option("--seed", iso_opts.seed, "Sampling seed")->envname("PLAP_SEED");
  iso->add_option("--out", iso_out, "Write the constant to a file");

  // ---- bound ----
  auto* bound = app.add_subcommand("bound", "Extinction-time bound T0");
  double b_d = 2.0, b_p = 1.25, b_C = 1.0, b_f0 = 1.0;
  bool b_p1 = false;
  bound->add_option("--d", b_d)->required();
  bound->add_option("--p", b_p)->required();
  bound->add_option("--C", b_C, "Sobolev constant")->required();
  bound->add_option("--f0-norm", b_f0, "l^{d(2-p)/p}_nu norm of the initial data")->required();
  bound->add_flag("--p1-limit", b_p1, "Also print the p -> 1 limit value");

  // ---- fit ----
  auto* fit = app.add_subcommand("fit", "Polynomial decay fit on a trajectory");
  GraphOpts fit_g;
  fit_g.attach(fit);
  std::string f_traj, f_out;
  double f_p = 3.0, f_tmin = 1.0, f_tmax = 10.0;
  fit->add_option("--traj", f_traj, "Trajectory CSV")->required();
  fit->add_option("--p", f_p, "Exponent p > 2")->required();
  fit->add_option("--tmin", f_tmin)->required();
  fit->add_option("--tmax", f_tmax)->required();
  fit->add_option("--out", f_out, "Report JSON file (stdout when omitted)");

  // ---- poincare ----
  auto* poin = app.add_subcommand("poincare", "Poincare constant 1/sqrt(lambda_1)");
  GraphOpts poin_g;
  poin_g.attach(poin);
  int poin_post = 0;
  std::uint64_t poin_seed = 0x1d5a2f53u;
  poin->add_option("--post-check", poin_post, "Verify the inequality on N random functions");
  poin->add_option("--seed", poin_seed)->envname("PLAP_SEED");

  CLI11_PARSE(app, argc, argv);

  if (gen->parsed()) {
    write_or_print(gen_out, emit_graph_text(gen_g.resolve()));
    return 0;
  }

  if (solve->parsed()) {
    solve_g.fill(scen);
    if (!config_file.empty()) {
      std::ifstream in(config_file, std::ios::binary);
      if (!in) throw ParseError("cannot open config '" + config_file + "'");
      std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
      SolverConfig file_cfg = solver_config_from_json_text(text);
      // Explicit flags win over the config document.
      if (!atol_opt->count()) scen.config.atol = file_cfg.atol;
      if (!rtol_opt->count()) scen.config.rtol = file_cfg.rtol;
      if (!dt_opt->count()) scen.config.dt = file_cfg.dt;
      if (!itol_opt->count()) scen.config.inner_tol = file_cfg.inner_tol;
      if (!iiter_opt->count()) scen.config.inner_max_iter = file_cfg.inner_max_iter;
      if (!eps_opt->count()) scen.config.extinction_eps = file_cfg.extinction_eps;
      if (!every_opt->count()) scen.config.dense_output_every = file_cfg.dense_output_every;
      if (!method_opt->count()) scen.config.method = file_cfg.method;
    }
    if (method_opt->count()) {
      scen.config.method = parse_method(method_str);
    } else if (config_file.empty()) {
      // The explicit field is not Lipschitz where differences vanish, so
      // small p defaults to the implicit path.
      scen.config.method = scen.p < 2.0 ? Method::implicit_euler : Method::explicit_adaptive;
    }
    if (bc_str == "dirichlet")
      scen.dirichlet = true;
    else if (bc_str != "neumann")
      throw PreconditionError("--bc must be neumann or dirichlet");
    const ScenarioResult res = run_scenario(scen);
    if (scen.out.empty())
      std::cout << res.report_json;
    else
      std::cout << res.csv_path << "\n" << res.json_path << "\n";
    return 0;
  }

  if (verify->parsed()) {
    const Graph g = verify_g.resolve();
    Trajectory a = read_trajectory_csv(g, v_traj);
    a.meta.p = v_p;
    PropertyReport rep;
    if (v_check == "mass") {
      rep = check_mass_conservation(g, a, v_tol);
    } else if (v_check == "lq") {
      rep = check_lq_monotonicity(g, a, v_q, v_tol);
    } else if (v_check == "positivity") {
      rep = check_positivity(g, a);
    } else if (v_check == "contraction" || v_check == "order" || v_check == "domination") {
      if (v_traj2.empty())
        throw PreconditionError("check '" + v_check + "' needs --traj2");
      Trajectory b = read_trajectory_csv(g, v_traj2);
      b.meta.p = v_p;
      if (v_check == "contraction")
        rep = check_contraction(g, a, b, v_tol);
      else if (v_check == "order")
        rep = check_order_preservation(g, a, b, v_tol);
      else
        rep = check_domination(g, a, b, v_tol);
    } else {
      throw PreconditionError("unknown check '" + v_check + "'");
    }
    rep.trajectory_ref = v_traj;
    write_or_print(v_out, property_report_to_json_text(rep) + "\n");
    return rep.pass ? 0 : 1;
  }

  if (iso->parsed()) {
    const IsoResult r = isoperimetric_constant_bruteforce(iso_g.resolve(), iso_d, iso_opts);
    const std::string line = format_full(r.c_d) + "\n";
    write_or_print(iso_out, line);
    if (!iso_out.empty()) std::cout << line;
    return 0;
  }

  if (bound->parsed()) {
    const ExtinctionBound b = extinction_bound(b_d, b_p, b_C, b_f0);
    std::cout << format_full(b.T0) << "\n";
    if (b_p1) std::cout << format_full(extinction_bound_p1_limit(b_d, b_C, b_f0)) << "\n";
    return 0;
  }

  if (fit->parsed()) {
    const Graph g = fit_g.resolve();
    Trajectory traj = read_trajectory_csv(g, f_traj);
    const DecayFit df = decay_fit(g, traj, f_p, f_tmin, f_tmax);
    std::string out = "{\n  \"slope\": " + format_full(df.slope) +
                      ",\n  \"bound_constant\": " + format_full(df.bound_constant) +
                      ",\n  \"zero_signal\": " + (df.zero_signal ? "true" : "false") + "\n}\n";
    write_or_print(f_out, out);
    return 0;
  }

  if (poin->parsed()) {
    const Graph g = poin_g.resolve();
    const double C = poincare_constant(g);
    std::cout << format_full(C) << "\n";
    if (poin_post > 0) {
      const double worst = poincare_post_check(g, C, poin_post, poin_seed);
      std::cout << "post_check_worst_violation " << format_full(worst) << "\n";
      return worst <= 1e-10 ? 0 : 1;
    }
    return 0;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = CLI::App{}.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return plap::exit_code_for(e);
  }
}
