#include "plap/operators.hpp"

#include <cmath>
#include <vector>

namespace plap {

double g_p(double p, double alpha) {
  if (alpha == 0.0) return 0.0;
  return std::copysign(std::pow(std::abs(alpha), p - 1.0), alpha);
}

TruncationContext build_truncation_context(const Graph& g, const DirichletTruncation& tr) {
  if (tr.nodes.empty()) throw PreconditionError("Dirichlet truncation: V_n is empty");
  TruncationContext ctx;
  ctx.inside.assign(static_cast<size_t>(g.node_count()), 0);
  ctx.absorb.assign(static_cast<size_t>(g.node_count()), 0.0);
  for (int v : tr.nodes) {
    if (v < 0 || v >= g.node_count())
      throw PreconditionError("Dirichlet truncation: unknown node index " + std::to_string(v));
    ctx.inside[static_cast<size_t>(v)] = 1;
  }
  for (const Edge& ed : g.edges()) {
    const bool ti = ctx.inside[static_cast<size_t>(ed.tail)];
    const bool hi = ctx.inside[static_cast<size_t>(ed.head)];
    if (ti != hi) {
      // Cross edge: absorption on both sides of the cut.
      ctx.absorb[static_cast<size_t>(ed.tail)] += ed.mu;
      ctx.absorb[static_cast<size_t>(ed.head)] += ed.mu;
    }
  }
  for (int v = 0; v < g.node_count(); ++v)
    if (ctx.inside[static_cast<size_t>(v)]) ctx.absorb[static_cast<size_t>(v)] += g.halo_degree(v);
  return ctx;
}

namespace {

// Kahan-compensated scatter accumulator; plain accumulation when comp is null.
inline void accumulate(double* acc, double* comp, int i, double x) {
  if (!comp) {
    acc[i] += x;
    return;
  }
  const double y = x - comp[i];
  const double t = acc[i] + y;
  comp[i] = (t - acc[i]) - y;
  acc[i] = t;
}

// Shared kernel of the Neumann and truncated operators. One pass over the
// edge list in stored order, then the absorption terms in node order.
NodeFunction apply_operator(const Graph& g, double p, const NodeFunction& f,
                            const TruncationContext* ctx, bool compensated) {
  if (f.size() != g.node_count())
    throw PreconditionError("p-Laplacian: node function domain mismatch");
  const int n = g.node_count();
  NodeFunction acc = NodeFunction::Zero(n);
  std::vector<double> comp_store;
  double* comp = nullptr;
  if (compensated) {
    comp_store.assign(static_cast<size_t>(n), 0.0);
    comp = comp_store.data();
  }
  for (const Edge& ed : g.edges()) {
    if (ctx && !(ctx->inside[static_cast<size_t>(ed.tail)] &&
                 ctx->inside[static_cast<size_t>(ed.head)]))
      continue;  // cross and outside edges enter through the absorption terms
    const double t = ed.mu * g_p(p, f[ed.head] - f[ed.tail]);
    accumulate(acc.data(), comp, ed.tail, -t);
    accumulate(acc.data(), comp, ed.head, t);
  }
  if (ctx) {
    for (int v = 0; v < n; ++v) {
      const double a = ctx->absorb[static_cast<size_t>(v)];
      if (a == 0.0) continue;
      const double sign = ctx->inside[static_cast<size_t>(v)] ? 1.0 : -1.0;
      accumulate(acc.data(), comp, v, sign * a * g_p(p, f[v]));
    }
  }
  for (int v = 0; v < n; ++v) acc[v] /= g.nu(v);
  return acc;
}

double pow_abs(double x, double p) { return x == 0.0 ? 0.0 : std::pow(std::abs(x), p); }

}  // namespace

NodeFunction apply_p_laplacian(const Graph& g, const TruncationContext* ctx, const Exponent& p,
                               const NodeFunction& f, bool compensated) {
  return apply_operator(g, p.p(), f, ctx, compensated);
}

NodeFunction p_laplacian(const Graph& g, const Exponent& p, const NodeFunction& f,
                         bool compensated) {
  return apply_operator(g, p.p(), f, nullptr, compensated);
}

NodeFunction truncated_p_laplacian(const Graph& g, const DirichletTruncation& tr,
                                   const Exponent& p, const NodeFunction& h, bool compensated) {
  const TruncationContext ctx = build_truncation_context(g, tr);
  return apply_operator(g, p.p(), h, &ctx, compensated);
}

namespace {

double energy_impl(const Graph& g, const TruncationContext* ctx, double p, const NodeFunction& f,
                   bool compensated) {
  if (f.size() != g.node_count()) throw PreconditionError("energy: node function domain mismatch");
  double s = 0.0, c = 0.0;
  auto add = [&](double x) {
    if (!compensated) {
      s += x;
      return;
    }
    const double y = x - c;
    const double t = s + y;
    c = (t - s) - y;
    s = t;
  };
  for (const Edge& ed : g.edges()) {
    if (ctx && !(ctx->inside[static_cast<size_t>(ed.tail)] &&
                 ctx->inside[static_cast<size_t>(ed.head)]))
      continue;
    add(ed.mu * pow_abs(f[ed.head] - f[ed.tail], p));
  }
  if (ctx)
    for (int v = 0; v < g.node_count(); ++v)
      if (ctx->inside[static_cast<size_t>(v)] && ctx->absorb[static_cast<size_t>(v)] > 0.0)
        add(ctx->absorb[static_cast<size_t>(v)] * pow_abs(f[v], p));
  return s / p;
}

}  // namespace

double energy(const Graph& g, const std::optional<DirichletTruncation>& bc, const Exponent& p,
              const NodeFunction& f, bool compensated) {
  if (!bc) return energy_impl(g, nullptr, p.p(), f, compensated);
  const TruncationContext ctx = build_truncation_context(g, *bc);
  return energy_impl(g, &ctx, p.p(), f, compensated);
}

double gradient_check(const Graph& g, const std::optional<DirichletTruncation>& bc,
                      const Exponent& p, const NodeFunction& f, double step) {
  if (!(step > 0.0)) throw PreconditionError("gradient_check: step must be > 0");
  std::optional<TruncationContext> ctx;
  if (bc) ctx = build_truncation_context(g, *bc);
  const TruncationContext* cp = ctx ? &*ctx : nullptr;

  const NodeFunction lap = apply_operator(g, p.p(), f, cp, false);
  double scale = 1.0;
  for (int v = 0; v < g.node_count(); ++v) scale = std::max(scale, std::abs(lap[v]));

  const bool degenerate = p.p() < 2.0;
  NodeFunction fp = f, fm = f;
  double worst = 0.0;
  for (int v = 0; v < g.node_count(); ++v) {
    if (cp && !cp->inside[static_cast<size_t>(v)]) continue;  // gradient relation lives on V_n
    if (degenerate) {
      bool skip = false;
      for (int e : g.incident_edges(v)) {
        const Edge& ed = g.edge(e);
        if (cp && !(cp->inside[static_cast<size_t>(ed.tail)] &&
                    cp->inside[static_cast<size_t>(ed.head)]))
          continue;
        if (std::abs(f[ed.head] - f[ed.tail]) < 10.0 * step) skip = true;
      }
      if (cp && cp->absorb[static_cast<size_t>(v)] > 0.0 && std::abs(f[v]) < 10.0 * step)
        skip = true;
      if (skip) continue;
    }
    fp[v] = f[v] + step;
    fm[v] = f[v] - step;
    const double de =
        (energy_impl(g, cp, p.p(), fp, false) - energy_impl(g, cp, p.p(), fm, false)) /
        (2.0 * step);
    fp[v] = f[v];
    fm[v] = f[v];
    worst = std::max(worst, std::abs(de / g.nu(v) - lap[v]));
  }
  return worst / scale;
}

Eigen::SparseMatrix<double> laplacian_matrix(const Graph& g) {
  const int n = g.node_count();
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<size_t>(g.edge_count()) * 4);
  for (const Edge& ed : g.edges()) {
    trips.emplace_back(ed.tail, ed.tail, ed.mu);
    trips.emplace_back(ed.head, ed.head, ed.mu);
    trips.emplace_back(ed.tail, ed.head, -ed.mu);
    trips.emplace_back(ed.head, ed.tail, -ed.mu);
  }
  Eigen::SparseMatrix<double> K(n, n);
  K.setFromTriplets(trips.begin(), trips.end());
  return K;
}

}  // namespace plap
