#pragma once

#include "plap/graph.hpp"

#include <Eigen/SparseCore>

#include <optional>

namespace plap {

/// Validated exponent p > 1 of the nonlinear operator, with its Hoelder
/// conjugate q = p/(p-1).
class Exponent {
 public:
  explicit Exponent(double p) : p_(p) {
    if (!(p > 1.0) || !std::isfinite(p))
      throw PreconditionError("exponent p must satisfy p > 1");
  }
  double p() const { return p_; }
  double conjugate() const { return p_ / (p_ - 1.0); }

 private:
  double p_;
};

/// g_p(a) = |a|^{p-2} a, extended by g_p(0) = 0 (the continuous extension
/// for every p > 1).
double g_p(double p, double alpha);

/// Dirichlet truncation to the node subset V_n of an ambient graph. Edges
/// leaving V_n and halo degrees act as absorption.
struct DirichletTruncation {
  std::vector<int> nodes;
};

/// Per-run precomputation for a truncation: membership mask and absorption
/// degree per node. For v in V_n the absorption is halo(v) plus the mu-mass
/// of edges to nodes outside V_n; for v outside it is the mu-mass of edges
/// back into V_n.
struct TruncationContext {
  std::vector<char> inside;
  std::vector<double> absorb;
};

TruncationContext build_truncation_context(const Graph& g, const DirichletTruncation& tr);

/// Operator application against a prebuilt context; nullptr means Neumann.
/// Shared kernel of p_laplacian and truncated_p_laplacian, exposed so
/// repeated evaluations (time stepping) can reuse the context.
NodeFunction apply_p_laplacian(const Graph& g, const TruncationContext* ctx, const Exponent& p,
                               const NodeFunction& f, bool compensated = false);

/// L_p f(v) = -(1/nu(v)) sum_{w~v} mu_vw |f(w)-f(v)|^{p-2} (f(w)-f(v)).
/// Pure Neumann form on the given finite graph; halo metadata is ignored.
/// Summation order is fixed (edge-list order), so results are bitwise
/// reproducible; `compensated` switches the accumulation to Kahan summation.
NodeFunction p_laplacian(const Graph& g, const Exponent& p, const NodeFunction& f,
                         bool compensated = false);

/// The truncated operator: on V_n the Neumann sum restricted to neighbors
/// inside V_n plus the absorption term |h(v)|^{p-2} h(v) * absorb(v); on
/// nodes outside V_n, -(1/nu(v)) |h(v)|^{p-2} h(v) * (mu-mass of edges into
/// V_n). With V_n = V and no halo this equals p_laplacian bitwise.
NodeFunction truncated_p_laplacian(const Graph& g, const DirichletTruncation& tr,
                                   const Exponent& p, const NodeFunction& h,
                                   bool compensated = false);

/// (1/p) sum_e mu(e) |(I^T f)(e)|^p, plus under a truncation
/// (1/p) sum_{v in V_n} absorb(v) |f(v)|^p over inner edges only. Carries
/// the 1/p factor so that the l^2_nu gradient is exactly the operator above.
double energy(const Graph& g, const std::optional<DirichletTruncation>& bc, const Exponent& p,
              const NodeFunction& f, bool compensated = false);

/// Central-difference consistency check of energy against the operator:
/// max over admissible nodes of |centralDiff_v E / nu(v) - L_p f(v)|,
/// relative to max(1, sup |L_p f|). For p < 2 nodes are skipped when an
/// incident difference (or, under absorption, the node value itself) has
/// magnitude below 10*step, where |.|^p is not Lipschitz-differentiable.
double gradient_check(const Graph& g, const std::optional<DirichletTruncation>& bc,
                      const Exponent& p, const NodeFunction& f, double step);

/// Assembled linear (p=2) Laplacian K = I diag(mu) I^T, without the nu
/// normalization. Symmetric positive semidefinite.
Eigen::SparseMatrix<double> laplacian_matrix(const Graph& g);

}  // namespace plap
