#pragma once

#include "plap/solver.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace plap {

/// Weighted l^q_nu norm, q in [1, inf]. q = inf uses the weighted supremum
/// sup |f(v)| nu(v) (the weight sits inside); sup_norm below is the plain
/// unweighted supremum.
double lq_norm(const Graph& g, const NodeFunction& f, double q);
double sup_norm(const NodeFunction& f);
double l2nu_norm(const Graph& g, const NodeFunction& f);
/// Weighted l^p_mu norm of an edge function.
double lp_mu_norm(const Graph& g, const EdgeFunction& u, double p);

/// sum_v f(v) nu(v).
double mass(const Graph& g, const NodeFunction& f);

/// Derived exponents of the small-p regime. Each field is present exactly
/// when its parameter precondition holds:
///   m = d(2/p - 1), s = (m + p - 2)/p   for 1 < p < 2d/(d+1),
///   p_star = d p / (d - p)              for 1 <= p < d,
///   q = p/(p-1)                         for p > 1.
struct Exponents {
  double d = 0.0;
  double p = 0.0;
  std::optional<double> m, s, p_star, q;
};
Exponents exponents(double d, double p);

struct ExtinctionBound {
  double T0 = 0.0;
  double d = 0.0, p = 0.0, C = 0.0, f0_norm = 0.0;
  double m = 0.0;
  /// Cbar = C^p m (m-1) (d-p)^p / (m+p-2)^p; T0 = d/(p Cbar) * f0_norm^{2-p}.
  double cbar = 0.0;
};

/// Upper bound on the extinction time from the energy estimate,
///   T0 = d (m+p-2)^p / (p C^p m (m-1) (d-p)^p) * f0_norm^{2-p},
/// where f0_norm is the l^{d(2-p)/p}_nu norm of the initial data and C the
/// Sobolev constant (supplied by the caller; see sobolev_check for the
/// assembled heuristic default).
ExtinctionBound extinction_bound(double d, double p, double C, double f0_norm);

/// Limit value of T0 as p -> 1: ||f0||_{l^d_nu} / (C (d-1)).
double extinction_bound_p1_limit(double d, double C, double f0_norm_ld);

struct LemmaFolResult {
  bool pass = false;
  double margin = 0.0;  // lhs - rhs
  double lhs = 0.0, rhs = 0.0;
};

/// Difference-quotient inequality behind the extinction estimate: for
/// a > b > 0, 1 <= p < 2d/(d+1), d > 1, m = d(2/p-1), s = (m+p-2)/p,
///   (a^{m-1} - b^{m-1})/(a-b) >= (m-1)/s^p ((a^s - b^s)/(a-b))^p.
/// Both sides coincide in the a -> b limit, so the margin may round to a
/// hair below zero there; pass allows a 1e-10 relative slack.
LemmaFolResult lemma_fol_check(double a, double b, double p, double d);

struct OperatorBoundResult {
  bool pass = false;
  double ratio = 0.0;  // lhs / bound
  double lhs = 0.0, bound = 0.0;
};

/// Mapping bound of the operator between weighted spaces:
///   ||L_p u||_{l^{q/(p-1)}_nu} <= 2^{p-1}/K ||u||^{p-1}_{l^q_nu},
/// with K the (ULF) constant of the graph. Requires finite q >= p-1 (the
/// Jensen step needs s = q/(p-1) >= 1).
OperatorBoundResult operator_bound_check(const Graph& g, double p, double q,
                                         const NodeFunction& u);

struct SobolevOptions {
  int samples = 64;
  std::uint64_t seed = 0x1d5a2f53u;
  IsoOptions iso{};
};

struct SobolevResult {
  double worst_ratio = 0.0;
  /// Reference bound C_ref p/(d-p) with the proof-assembled
  /// C_ref = C_d (p* (d-1)/d) max(1, C_1^{-(d-1)/d}); a documented
  /// upper-bound heuristic, not a sharp constant.
  double reference_constant = 0.0;
  double c_d = 0.0;
  double c_1 = 0.0;
  bool within_reference = false;
  int samples = 0;
};

/// Samples finitely supported f (deltas, balls, random signed and
/// nonnegative data) and evaluates ||f||_{l^{p*}_nu} / ||I^T f||_{l^p_mu},
/// where halo edges contribute |f| at their supported endpoint. Requires
/// 1 <= p < d and a halo-equipped graph.
SobolevResult sobolev_check(const Graph& g, double d, double p, const SobolevOptions& = {});

/// 1/sqrt(lambda_1) for the smallest nonzero eigenvalue lambda_1 of the
/// nu-weighted linear Laplacian: the best constant scale in
/// ||f - fbar||_{l2_nu} <= C ||I^T f||_{l2_mu}. Dense eigensolve up to 512
/// nodes, deflated power iteration above.
double poincare_constant(const Graph& g);

/// Worst violation of the Poincare inequality with constant C over seeded
/// random node functions (<= 0 means it held on every sample).
double poincare_post_check(const Graph& g, double C, int samples, std::uint64_t seed);

struct DecayFit {
  double t_min = 0.0, t_max = 0.0;
  /// Least-squares slope of log psi against log t, psi(t) =
  /// ||phi(t) - mean(f0)||^2_{l2_nu}.
  double slope = 0.0;
  /// sup over the window of psi(t) t^{2/(p-2)}.
  double bound_constant = 0.0;
  bool zero_signal = false;
};

DecayFit decay_fit(const Graph& g, const Trajectory& traj, double p, double t_min, double t_max);

struct EnergyInequalityResult {
  /// Largest Cbar > 0 with dE/dt + Cbar E^{p/p*} <= 0 at every interior
  /// sample; infinity when E vanishes identically (trivially satisfied).
  double cbar = 0.0;
  bool pass = false;
  bool trivial = false;
  /// Worst violation of the integrated form
  /// E(t) <= (E(0)^{p/d} - cbar p t / d)^{d/p} on [0, t0].
  double integrated_violation = 0.0;
  double t0 = 0.0;
};

/// Differential and integrated energy inequality for the truncated level-set
/// energy E_{m,k}(t) = sum_v (phi(t,v) - k)_+^m nu(v) along a Dirichlet
/// trajectory. Centered differences on the dense grid, first/last samples
/// excluded, samples with E below a relative floor skipped.
EnergyInequalityResult energy_inequality_check(const Graph& g, const Trajectory& traj, double d,
                                               double p, double k);

struct RegularityOrderReport {
  int order = 0;
  double max_abs = 0.0;  // sup of the divided-difference estimate
};

struct ProbeConfig {
  /// Derivative order cap; 0 = min(floor(p), 4).
  int max_order = 0;
  /// Stencil stride per order (samples); 0 = automatic (wide stencils for
  /// orders >= 3, where division by h^k amplifies sampling noise).
  std::vector<int> stride;
  /// Dyadic scales entering the modulus-of-continuity fit.
  int scales = 5;
  double tolerance = 0.15;
};

struct RegularityReport {
  std::vector<RegularityOrderReport> orders;
  int hoelder_order = 0;
  /// Log-log slope of the modulus of continuity of the highest estimated
  /// derivative across dyadic scales.
  double hoelder_exponent = 0.0;
  bool no_signal = false;
  bool verdict = false;
};

/// Divided-difference probe of time regularity at one node: derivative
/// estimates up to min(floor(p), 4) and a Hoelder exponent estimate of the
/// highest one, compared against p - floor(p) for non-integer p (Lipschitz
/// for integer p). Requires a uniformly sampled trajectory.
RegularityReport regularity_probe(const Trajectory& traj, double p, int node,
                                  const ProbeConfig& cfg = {});

/// Machine-readable verdict of one theorem check. `margin` is the raw
/// worst-case statistic of the check (documented per check below).
struct PropertyReport {
  std::string check;
  bool pass = false;
  double margin = 0.0;
  std::map<std::string, double> params;
  std::string trajectory_ref;
};

/// margin = max relative drift of sum phi nu from its initial value.
PropertyReport check_mass_conservation(const Graph& g, const Trajectory& traj, double tol);
/// margin = max increase of t -> ||a(t) - b(t)||_{l2_nu} between samples.
PropertyReport check_contraction(const Graph& g, const Trajectory& a, const Trajectory& b,
                                 double tol);
/// margin = max over samples and nodes of lower - upper.
PropertyReport check_order_preservation(const Graph& g, const Trajectory& lower,
                                        const Trajectory& upper, double tol);
/// margin = max over samples and nodes of dirichlet - neumann.
PropertyReport check_domination(const Graph& g, const Trajectory& dirichlet,
                                const Trajectory& neumann, double tol);
/// margin = max over samples of ||phi(t)||_q - ||f0||_q.
PropertyReport check_lq_monotonicity(const Graph& g, const Trajectory& traj, double q, double tol);
/// margin = min state value over nodes and sampled t > 0; pass iff > 0.
PropertyReport check_positivity(const Graph& g, const Trajectory& traj);

}  // namespace plap
