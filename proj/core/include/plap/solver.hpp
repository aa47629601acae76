#pragma once

#include "plap/operators.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace plap {

enum class Method { explicit_adaptive, implicit_euler };

struct SolverConfig {
  Method method = Method::explicit_adaptive;
  /// Local error tolerances of the explicit embedded pair.
  double atol = 1e-12;
  double rtol = 1e-9;
  /// Backward Euler step size.
  double dt = 1e-2;
  /// Stopping tolerance of the proximal solve: the returned u satisfies
  /// ||u - f_prev + tau L_p u||_{l2_nu} <= inner_tol * max(1, ||f_prev||).
  double inner_tol = 1e-9;
  int inner_max_iter = 200;
  /// Unweighted sup-norm band below which the state counts as zero.
  double extinction_eps = 1e-12;
  /// Uniform sampling interval of the returned trajectory.
  double dense_output_every = 0.05;
  /// Stop once the state stays in the extinction band for three
  /// consecutive samples.
  bool stop_on_extinction = true;
};

void validate(const SolverConfig& cfg);

struct TrajectoryMeta {
  double p = 2.0;
  bool dirichlet = false;
  std::vector<int> vn;  // empty for Neumann
  std::uint64_t config_hash = 0;
};

/// Time-stamped states of one solver run on a uniform sample grid starting
/// at t = 0.
struct Trajectory {
  std::vector<double> times;
  std::vector<NodeFunction> states;
  TrajectoryMeta meta;
};

/// -L_p f (Neumann) or -L^(n)_p f (Dirichlet truncation).
NodeFunction rhs(const Graph& g, const std::optional<DirichletTruncation>& bc, const Exponent& p,
                 const NodeFunction& f);

/// Integrate d(phi)/dt = rhs(phi), phi(0) = f0 up to at least T (earlier only
/// on a sustained extinction stop). Dirichlet initial data is zero-extended
/// outside V_n and stays zero there. Explicit: embedded Dormand-Prince 5(4)
/// with PI step control and fifth-order dense output on the sample grid;
/// the scaled local error estimate stays at or below atol + rtol|state| per
/// step. Implicit: backward Euler steps of size dt via the proximal solve,
/// linear interpolation onto the grid.
Trajectory evolve(const Graph& g, const std::optional<DirichletTruncation>& bc, const Exponent& p,
                  const NodeFunction& f0, double T, const SolverConfig& cfg);

/// One backward Euler step: the unique minimizer of
///   F(u) = 1/(2 tau) ||u - f_prev||^2_{l2_nu} + energy(u).
/// Damped Newton; for p < 2 a Huber-smoothed pass (radius 1e-10) followed by
/// an unsmoothed polish. The map f_prev -> u is nonexpansive in l2_nu.
NodeFunction proximal_step(const Graph& g, const std::optional<DirichletTruncation>& bc,
                           const Exponent& p, const NodeFunction& f_prev, double tau,
                           double inner_tol, int inner_max_iter);

struct ExtinctionRecord {
  bool extinct = false;
  /// First sustained crossing of extinction_eps, refined to within dt/8;
  /// horizon when not extinct.
  double time = 0.0;
  /// Analytic bound T0 for comparison, when supplied by the caller.
  std::optional<double> bound_T0;
};

ExtinctionRecord extinction_time(const Graph& g, const std::optional<DirichletTruncation>& bc,
                                 const Exponent& p, const NodeFunction& f0, double T,
                                 const SolverConfig& cfg,
                                 std::optional<double> bound_T0 = std::nullopt);

struct ExhaustionRun {
  std::vector<Trajectory> levels;
  /// gaps[i][k] = ||phi_i(t_k) - phi_{i+1}(t_k)||_{l2_nu} on the shared grid.
  std::vector<std::vector<double>> gaps;
};

/// Solve the truncated problem on every level of the family with identical
/// config and sample grid. f0 must be supported inside the first level.
ExhaustionRun exhaustion_evolve(const ExhaustionFamily& fam, const Exponent& p,
                                const NodeFunction& f0, double T, const SolverConfig& cfg);

/// Exact p = 2 Neumann solution exp(-t L_2) f0 via dense symmetric
/// eigendecomposition of the nu-weighted Laplacian. Node count capped at 512.
NodeFunction linear_reference(const Graph& g, const NodeFunction& f0, double t);

}  // namespace plap
