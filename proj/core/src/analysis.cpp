#include "plap/analysis.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace plap {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool cond, const char* msg) {
  if (!cond) throw PreconditionError(msg);
}

void check_domain(const Graph& g, const NodeFunction& f, const char* what) {
  if (f.size() != g.node_count())
    throw PreconditionError(std::string(what) + ": node function domain mismatch");
}

void check_aligned(const Trajectory& a, const Trajectory& b, const char* what) {
  if (a.times.size() != b.times.size())
    throw PreconditionError(std::string(what) + ": sample grids have different lengths");
  for (size_t k = 0; k < a.times.size(); ++k) {
    const double scale = std::max({1.0, std::abs(a.times[k]), std::abs(b.times[k])});
    if (std::abs(a.times[k] - b.times[k]) > 1e-12 * scale)
      throw PreconditionError(std::string(what) + ": sample grids are misaligned");
  }
}

}  // namespace

double lq_norm(const Graph& g, const NodeFunction& f, double q) {
  check_domain(g, f, "lq_norm");
  if (!(q >= 1.0)) throw PreconditionError("lq_norm: q must be >= 1");
  if (std::isinf(q)) {
    double m = 0.0;
    for (int v = 0; v < g.node_count(); ++v) m = std::max(m, std::abs(f[v]) * g.nu(v));
    return m;
  }
  if (q == 1.0) {
    double s = 0.0;
    for (int v = 0; v < g.node_count(); ++v) s += std::abs(f[v]) * g.nu(v);
    return s;
  }
  double s = 0.0;
  for (int v = 0; v < g.node_count(); ++v)
    if (f[v] != 0.0) s += std::pow(std::abs(f[v]), q) * g.nu(v);
  return std::pow(s, 1.0 / q);
}

double sup_norm(const NodeFunction& f) {
  double m = 0.0;
  for (Eigen::Index i = 0; i < f.size(); ++i) m = std::max(m, std::abs(f[i]));
  return m;
}

double l2nu_norm(const Graph& g, const NodeFunction& f) {
  check_domain(g, f, "l2nu_norm");
  double s = 0.0;
  for (int v = 0; v < g.node_count(); ++v) s += g.nu(v) * f[v] * f[v];
  return std::sqrt(s);
}

double lp_mu_norm(const Graph& g, const EdgeFunction& u, double p) {
  if (u.size() != g.edge_count())
    throw PreconditionError("lp_mu_norm: edge function domain mismatch");
  if (!(p >= 1.0)) throw PreconditionError("lp_mu_norm: p must be >= 1");
  if (std::isinf(p)) {
    double m = 0.0;
    for (int e = 0; e < g.edge_count(); ++e) m = std::max(m, std::abs(u[e]) * g.edge(e).mu);
    return m;
  }
  double s = 0.0;
  for (int e = 0; e < g.edge_count(); ++e)
    if (u[e] != 0.0) s += std::pow(std::abs(u[e]), p) * g.edge(e).mu;
  return std::pow(s, 1.0 / p);
}

double mass(const Graph& g, const NodeFunction& f) {
  check_domain(g, f, "mass");
  double s = 0.0;
  for (int v = 0; v < g.node_count(); ++v) s += f[v] * g.nu(v);
  return s;
}

Exponents exponents(double d, double p) {
  require(d > 1.0, "exponents: d must be > 1");
  require(p >= 1.0, "exponents: p must be >= 1");
  Exponents ex;
  ex.d = d;
  ex.p = p;
  if (p > 1.0 && p < 2.0 * d / (d + 1.0)) {
    ex.m = d * (2.0 / p - 1.0);
    ex.s = (*ex.m + p - 2.0) / p;
  }
  if (p < d) ex.p_star = d * p / (d - p);
  if (p > 1.0) ex.q = p / (p - 1.0);
  return ex;
}

ExtinctionBound extinction_bound(double d, double p, double C, double f0_norm) {
  require(d >= 2.0, "extinction_bound: d must be >= 2");
  require(p > 1.0, "extinction_bound: p must be > 1");
  require(p < 2.0 * d / (d + 1.0), "extinction_bound: p must be < 2d/(d+1)");
  require(C > 0.0, "extinction_bound: C must be > 0");
  require(f0_norm > 0.0, "extinction_bound: f0_norm must be > 0");
  ExtinctionBound b;
  b.d = d;
  b.p = p;
  b.C = C;
  b.f0_norm = f0_norm;
  b.m = d * (2.0 / p - 1.0);
  const double m = b.m;
  b.cbar = std::pow(C, p) * m * (m - 1.0) * std::pow(d - p, p) / std::pow(m + p - 2.0, p);
  b.T0 = d * std::pow(m + p - 2.0, p) /
         (p * std::pow(C, p) * m * (m - 1.0) * std::pow(d - p, p)) * std::pow(f0_norm, 2.0 - p);
  return b;
}

double extinction_bound_p1_limit(double d, double C, double f0_norm_ld) {
  require(d > 1.0, "extinction_bound_p1_limit: d must be > 1");
  require(C > 0.0, "extinction_bound_p1_limit: C must be > 0");
  return f0_norm_ld / (C * (d - 1.0));
}

LemmaFolResult lemma_fol_check(double a, double b, double p, double d) {
  require(a > b && b > 0.0, "lemma_fol_check: need a > b > 0");
  require(d > 1.0, "lemma_fol_check: d must be > 1");
  require(p >= 1.0 && p < 2.0 * d / (d + 1.0), "lemma_fol_check: need 1 <= p < 2d/(d+1)");
  const double m = d * (2.0 / p - 1.0);
  const double s = (m + p - 2.0) / p;
  LemmaFolResult r;
  r.lhs = (std::pow(a, m - 1.0) - std::pow(b, m - 1.0)) / (a - b);
  r.rhs = (m - 1.0) / std::pow(s, p) * std::pow((std::pow(a, s) - std::pow(b, s)) / (a - b), p);
  r.margin = r.lhs - r.rhs;
  r.pass = r.margin >= -1e-10 * std::max({1.0, std::abs(r.lhs), std::abs(r.rhs)});
  return r;
}

OperatorBoundResult operator_bound_check(const Graph& g, double p, double q,
                                         const NodeFunction& u) {
  require(p > 1.0, "operator_bound_check: p must be > 1");
  if (std::isinf(q))
    throw PreconditionError("operator_bound_check: q = inf is not supported (finite q only)");
  require(q >= p - 1.0, "operator_bound_check: need q >= p-1 so that q/(p-1) >= 1");
  const double K = ulf_constant(g);
  const NodeFunction lap = p_laplacian(g, Exponent(p), u);
  OperatorBoundResult r;
  r.lhs = lq_norm(g, lap, q / (p - 1.0));
  r.bound = std::pow(2.0, p - 1.0) / K * std::pow(lq_norm(g, u, q), p - 1.0);
  r.pass = r.lhs <= r.bound * (1.0 + 1e-12);
  r.ratio = r.bound > 0.0 ? r.lhs / r.bound : (r.lhs > 0.0 ? kInf : 0.0);
  return r;
}

namespace {

// ||I^T f||_{l^p_mu} with halo edges contributing |f| at their endpoint.
double dirichlet_gradient_norm(const Graph& g, const NodeFunction& f, double p) {
  double s = 0.0;
  for (const Edge& ed : g.edges()) {
    const double d = f[ed.head] - f[ed.tail];
    if (d != 0.0) s += ed.mu * std::pow(std::abs(d), p);
  }
  for (int v = 0; v < g.node_count(); ++v)
    if (g.halo_degree(v) > 0.0 && f[v] != 0.0)
      s += g.halo_degree(v) * std::pow(std::abs(f[v]), p);
  return std::pow(s, 1.0 / p);
}

}  // namespace

SobolevResult sobolev_check(const Graph& g, double d, double p, const SobolevOptions& opts) {
  require(d > 1.0, "sobolev_check: d must be > 1");
  require(p >= 1.0 && p < d, "sobolev_check: need 1 <= p < d");
  if (!g.has_halo())
    throw PreconditionError("sobolev_check: requires a halo-equipped graph");

  SobolevResult res;
  res.c_d = isoperimetric_constant_bruteforce(g, d, opts.iso).c_d;
  res.c_1 = ulf_constant(g);
  const double p_star = d * p / (d - p);
  const double c_ref =
      res.c_d * (p_star * (d - 1.0) / d) * std::max(1.0, std::pow(res.c_1, -(d - 1.0) / d));
  res.reference_constant = c_ref * p / (d - p);

  const int n = g.node_count();
  auto consider = [&](const NodeFunction& f) {
    const double denom = dirichlet_gradient_norm(g, f, p);
    if (denom <= 0.0) return;
    ++res.samples;
    res.worst_ratio = std::max(res.worst_ratio, lq_norm(g, f, p_star) / denom);
  };

  for (int v = 0; v < n; ++v) {
    NodeFunction f = NodeFunction::Zero(n);
    f[v] = 1.0;
    consider(f);
  }
  std::mt19937_64 rng(opts.seed);
  std::uniform_int_distribution<int> node_dist(0, n - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int s = 0; s < opts.samples; ++s) {
    NodeFunction f = NodeFunction::Zero(n);
    switch (s % 3) {
      case 0: {  // indicator of a ball around a random seed node
        const int start = node_dist(rng);
        const int radius = 1 + s % 4;
        std::vector<int> dist(static_cast<size_t>(n), -1);
        std::vector<int> queue{start};
        dist[static_cast<size_t>(start)] = 0;
        for (size_t qi = 0; qi < queue.size(); ++qi) {
          const int v = queue[qi];
          if (dist[static_cast<size_t>(v)] >= radius) continue;
          for (int e : g.incident_edges(v)) {
            const Edge& ed = g.edge(e);
            const int w = ed.tail == v ? ed.head : ed.tail;
            if (dist[static_cast<size_t>(w)] < 0) {
              dist[static_cast<size_t>(w)] = dist[static_cast<size_t>(v)] + 1;
              queue.push_back(w);
            }
          }
        }
        for (int v : queue) f[v] = 1.0;
        break;
      }
      case 1:  // sparse signed data
        for (int v = 0; v < n; ++v)
          if (unit(rng) < 0.2) f[v] = 2.0 * unit(rng) - 1.0;
        break;
      default:  // dense nonnegative data
        for (int v = 0; v < n; ++v) f[v] = unit(rng);
        break;
    }
    consider(f);
  }
  res.within_reference = res.worst_ratio <= res.reference_constant * (1.0 + 1e-12);
  return res;
}

namespace {

Eigen::VectorXd nu_sqrt(const Graph& g) {
  Eigen::VectorXd s(g.node_count());
  for (int v = 0; v < g.node_count(); ++v) s[v] = std::sqrt(g.nu(v));
  return s;
}

double smallest_nonzero_eigenvalue_dense(const Graph& g) {
  const int n = g.node_count();
  Eigen::MatrixXd S = Eigen::MatrixXd(laplacian_matrix(g));
  const Eigen::VectorXd sq = nu_sqrt(g);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) S(i, j) /= sq[i] * sq[j];
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw SolverError("poincare_constant: dense eigendecomposition failed");
  return es.eigenvalues()[1];
}

// Largest eigenvalue of (c I - S) restricted to the complement of the
// constant-direction kernel, by deflated power iteration.
double smallest_nonzero_eigenvalue_iterative(const Graph& g) {
  const int n = g.node_count();
  const Eigen::SparseMatrix<double> K = laplacian_matrix(g);
  const Eigen::VectorXd sq = nu_sqrt(g);
  auto apply_s = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    Eigen::VectorXd y = x.cwiseQuotient(sq);
    y = K * y;
    return y.cwiseQuotient(sq);
  };
  Eigen::VectorXd kernel = sq.normalized();

  // Crude upper bound on lambda_max, then deflated iteration on cI - S.
  std::mt19937_64 rng(0x5eedu);
  std::normal_distribution<double> gauss;
  Eigen::VectorXd x(n);
  for (int i = 0; i < n; ++i) x[i] = gauss(rng);
  x.normalize();
  double lam_max = 1.0;
  for (int it = 0; it < 200; ++it) {
    Eigen::VectorXd y = apply_s(x);
    lam_max = x.dot(y);
    const double ny = y.norm();
    if (ny == 0.0) break;
    x = y / ny;
  }
  const double c = 1.01 * std::max(lam_max, 1e-30);

  for (int i = 0; i < n; ++i) x[i] = gauss(rng);
  x -= kernel.dot(x) * kernel;
  x.normalize();
  double mu = 0.0;
  for (int it = 0; it < 200000; ++it) {
    Eigen::VectorXd y = c * x - apply_s(x);
    y -= kernel.dot(y) * kernel;
    const double mu_new = x.dot(y);
    const double ny = y.norm();
    if (ny == 0.0) break;
    x = y / ny;
    if (it > 16 && std::abs(mu_new - mu) <= 1e-13 * c) {
      mu = mu_new;
      break;
    }
    mu = mu_new;
  }
  return c - mu;
}

}  // namespace

double poincare_constant(const Graph& g) {
  if (!is_connected(g)) throw PreconditionError("poincare_constant: graph must be connected");
  if (g.node_count() < 2)
    throw PreconditionError("poincare_constant: graph must have at least two nodes");
  const double lam1 = g.node_count() <= 512 ? smallest_nonzero_eigenvalue_dense(g)
                                            : smallest_nonzero_eigenvalue_iterative(g);
  if (!(lam1 > 0.0)) throw SolverError("poincare_constant: spectral gap not resolved");
  return 1.0 / std::sqrt(lam1);
}

double poincare_post_check(const Graph& g, double C, int samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  double worst = -kInf;
  for (int s = 0; s < samples; ++s) {
    NodeFunction f(g.node_count());
    for (int v = 0; v < g.node_count(); ++v) f[v] = gauss(rng);
    const double fbar = mass(g, f) / g.total_nu();
    const NodeFunction dev = f.array() - fbar;
    const double lhs = l2nu_norm(g, dev);
    const double rhs = C * lp_mu_norm(g, incidence_transpose_apply(g, f), 2.0);
    worst = std::max(worst, lhs - rhs);
  }
  return worst;
}

DecayFit decay_fit(const Graph& g, const Trajectory& traj, double p, double t_min, double t_max) {
  require(p > 2.0, "decay_fit: p must be > 2");
  require(t_min > 0.0 && t_min < t_max, "decay_fit: need 0 < t_min < t_max");
  if (traj.times.empty() || t_max > traj.times.back() * (1.0 + 1e-12))
    throw PreconditionError("decay_fit: window not contained in the trajectory");

  DecayFit fit;
  fit.t_min = t_min;
  fit.t_max = t_max;
  const double fbar = mass(g, traj.states.front()) / g.total_nu();
  const double expo = 2.0 / (p - 2.0);

  std::vector<double> logt, logpsi;
  double psi_max = 0.0;
  for (size_t k = 0; k < traj.times.size(); ++k) {
    const double t = traj.times[k];
    if (t < t_min * (1.0 - 1e-12) || t > t_max * (1.0 + 1e-12)) continue;
    const NodeFunction dev = traj.states[k].array() - fbar;
    const double psi = l2nu_norm(g, dev);
    const double psi2 = psi * psi;
    psi_max = std::max(psi_max, psi2);
    if (psi2 > 0.0) {
      logt.push_back(std::log(t));
      logpsi.push_back(std::log(psi2));
      fit.bound_constant = std::max(fit.bound_constant, psi2 * std::pow(t, expo));
    }
  }
  const double floor = 1e-30 * std::max(1.0, l2nu_norm(g, traj.states.front()));
  if (psi_max <= floor * floor || logt.size() < 2) {
    fit.zero_signal = true;
    return fit;
  }
  double st = 0.0, sp = 0.0, stt = 0.0, stp = 0.0;
  const auto n = static_cast<double>(logt.size());
  for (size_t i = 0; i < logt.size(); ++i) {
    st += logt[i];
    sp += logpsi[i];
    stt += logt[i] * logt[i];
    stp += logt[i] * logpsi[i];
  }
  fit.slope = (n * stp - st * sp) / (n * stt - st * st);
  return fit;
}

EnergyInequalityResult energy_inequality_check(const Graph& g, const Trajectory& traj, double d,
                                               double p, double k) {
  require(p > 1.0 && p < 2.0 * d / (d + 1.0), "energy_inequality_check: need 1 < p < 2d/(d+1)");
  require(k >= 0.0, "energy_inequality_check: k must be >= 0");
  if (!traj.meta.dirichlet)
    throw PreconditionError("energy_inequality_check: requires a Dirichlet trajectory");
  if (traj.times.size() < 3)
    throw PreconditionError("energy_inequality_check: needs at least 3 samples");

  const double m = d * (2.0 / p - 1.0);
  const double pps = (d - p) / d;  // p/p* = 1 - p/d
  const size_t ns = traj.times.size();
  std::vector<double> E(ns);
  for (size_t i = 0; i < ns; ++i) {
    double s = 0.0;
    for (int v = 0; v < g.node_count(); ++v) {
      const double x = traj.states[i][v] - k;
      if (x > 0.0) s += std::pow(x, m) * g.nu(v);
    }
    E[i] = s;
  }

  EnergyInequalityResult res;
  const double e_max = *std::max_element(E.begin(), E.end());
  if (e_max <= 0.0) {
    res.trivial = true;
    res.pass = true;
    res.cbar = kInf;
    return res;
  }
  const double floor = 1e-12 * e_max;
  double cbar = kInf;
  for (size_t i = 1; i + 1 < ns; ++i) {
    if (E[i] <= floor) continue;
    const double dE = (E[i + 1] - E[i - 1]) / (traj.times[i + 1] - traj.times[i - 1]);
    cbar = std::min(cbar, -dE / std::pow(E[i], pps));
  }
  if (std::isinf(cbar)) {  // no usable interior sample above the floor
    res.trivial = true;
    res.pass = true;
    res.cbar = kInf;
    return res;
  }
  res.cbar = cbar;
  res.pass = cbar > 0.0;
  if (res.pass) {
    res.t0 = d * std::pow(E[0], p / d) / (cbar * p);
    for (size_t i = 0; i < ns; ++i) {
      if (traj.times[i] > res.t0) break;
      const double rhs_base = std::pow(E[0], p / d) - cbar * p * traj.times[i] / d;
      if (rhs_base < 0.0) break;
      const double bound = std::pow(rhs_base, d / p);
      res.integrated_violation =
          std::max(res.integrated_violation, (E[i] - bound) / std::max(e_max, 1e-300));
    }
  }
  return res;
}

RegularityReport regularity_probe(const Trajectory& traj, double p, int node,
                                  const ProbeConfig& cfg) {
  require(p > 1.0, "regularity_probe: p must be > 1");
  const size_t ns = traj.times.size();
  if (ns < 8) throw PreconditionError("regularity_probe: insufficient samples");
  if (node < 0 || static_cast<Eigen::Index>(node) >= traj.states.front().size())
    throw PreconditionError("regularity_probe: unknown node index");
  const double h = traj.times[1] - traj.times[0];
  for (size_t i = 1; i < ns; ++i)
    if (std::abs(traj.times[i] - traj.times[i - 1] - h) > 1e-9 * std::max(1.0, h))
      throw PreconditionError("regularity_probe: requires uniform dense sampling");

  std::vector<double> u(ns);
  for (size_t i = 0; i < ns; ++i) u[i] = traj.states[i][node];

  RegularityReport rep;
  const int wanted = cfg.max_order > 0 ? cfg.max_order
                                       : std::min(4, static_cast<int>(std::floor(p)));
  auto stride_for = [&](int order) {
    if (order <= static_cast<int>(cfg.stride.size()) && cfg.stride[static_cast<size_t>(order - 1)] > 0)
      return cfg.stride[static_cast<size_t>(order - 1)];
    if (order <= 2) return 1;
    // Wide stencils for high orders: dividing sampling noise by h^k is the
    // dominant error source.
    return std::max(1, static_cast<int>(ns) / 24);
  };

  std::vector<double> highest;
  int highest_order = 0;
  for (int order = 1; order <= wanted; ++order) {
    const int s = stride_for(order);
    const int reach = (order <= 2 ? 1 : 2) * s;
    if (static_cast<int>(ns) <= 2 * reach + 1) {
      if (order == 1) throw PreconditionError("regularity_probe: insufficient samples");
      break;
    }
    const double hs = h * s;
    std::vector<double> d;
    d.reserve(ns);
    for (size_t i = static_cast<size_t>(reach); i + static_cast<size_t>(reach) < ns; ++i) {
      double val = 0.0;
      switch (order) {
        case 1:
          val = (u[i + s] - u[i - s]) / (2.0 * hs);
          break;
        case 2:
          val = (u[i + s] - 2.0 * u[i] + u[i - s]) / (hs * hs);
          break;
        case 3:
          val = (u[i + 2 * s] - 2.0 * u[i + s] + 2.0 * u[i - s] - u[i - 2 * s]) /
                (2.0 * hs * hs * hs);
          break;
        default:
          val = (u[i + 2 * s] - 4.0 * u[i + s] + 6.0 * u[i] - 4.0 * u[i - s] + u[i - 2 * s]) /
                (hs * hs * hs * hs);
          break;
      }
      d.push_back(val);
    }
    double mx = 0.0;
    for (double x : d) mx = std::max(mx, std::abs(x));
    rep.orders.push_back({order, mx});
    highest = std::move(d);
    highest_order = order;
  }
  rep.hoelder_order = highest_order;

  // Modulus of continuity of the highest derivative across dyadic scales.
  const int s_h = stride_for(highest_order);
  std::vector<double> logd, logw;
  for (int m2 = 0; m2 < cfg.scales; ++m2) {
    const size_t lag = static_cast<size_t>(s_h) << m2;
    if (lag >= highest.size()) break;
    double w = 0.0;
    for (size_t i = 0; i + lag < highest.size(); ++i)
      w = std::max(w, std::abs(highest[i + lag] - highest[i]));
    if (w > 0.0) {
      logd.push_back(std::log(static_cast<double>(lag) * h));
      logw.push_back(std::log(w));
    }
  }
  double scale_max = 0.0;
  for (const auto& o : rep.orders) scale_max = std::max(scale_max, o.max_abs);
  if (logd.size() < 2 || scale_max == 0.0) {
    rep.no_signal = true;
    rep.verdict = true;  // nothing to break on a flat signal
    return rep;
  }
  double st = 0.0, sw = 0.0, stt = 0.0, stw = 0.0;
  const auto n = static_cast<double>(logd.size());
  for (size_t i = 0; i < logd.size(); ++i) {
    st += logd[i];
    sw += logw[i];
    stt += logd[i] * logd[i];
    stw += logd[i] * logw[i];
  }
  rep.hoelder_exponent = (n * stw - st * sw) / (n * stt - st * st);

  const double frac = p - std::floor(p);
  if (frac > 0.0)
    rep.verdict = std::abs(rep.hoelder_exponent - frac) <= cfg.tolerance;
  else  // integer p: the highest derivative is at least Lipschitz
    rep.verdict = rep.hoelder_exponent >= 1.0 - cfg.tolerance;
  return rep;
}

PropertyReport check_mass_conservation(const Graph& g, const Trajectory& traj, double tol) {
  PropertyReport rep;
  rep.check = "mass_conservation";
  rep.params["tol"] = tol;
  rep.params["p"] = traj.meta.p;
  const double m0 = mass(g, traj.states.front());
  const double scale = std::max({std::abs(m0), lq_norm(g, traj.states.front(), 1.0), 1e-300});
  double worst = 0.0;
  for (const auto& st : traj.states) worst = std::max(worst, std::abs(mass(g, st) - m0));
  rep.margin = worst / scale;
  rep.pass = rep.margin <= tol;
  return rep;
}

PropertyReport check_contraction(const Graph& g, const Trajectory& a, const Trajectory& b,
                                 double tol) {
  check_aligned(a, b, "check_contraction");
  PropertyReport rep;
  rep.check = "contraction";
  rep.params["tol"] = tol;
  rep.params["p"] = a.meta.p;
  double prev = kInf, worst = -kInf;
  for (size_t k = 0; k < a.times.size(); ++k) {
    const double dist = l2nu_norm(g, a.states[k] - b.states[k]);
    if (k > 0) worst = std::max(worst, dist - prev);
    prev = dist;
  }
  rep.margin = a.times.size() > 1 ? worst : 0.0;
  rep.pass = rep.margin <= tol;
  return rep;
}

PropertyReport check_order_preservation(const Graph& g, const Trajectory& lower,
                                        const Trajectory& upper, double tol) {
  check_aligned(lower, upper, "check_order_preservation");
  PropertyReport rep;
  rep.check = "order_preservation";
  rep.params["tol"] = tol;
  rep.params["p"] = lower.meta.p;
  double worst = -kInf;
  for (size_t k = 0; k < lower.times.size(); ++k)
    for (int v = 0; v < g.node_count(); ++v)
      worst = std::max(worst, lower.states[k][v] - upper.states[k][v]);
  rep.margin = worst;
  rep.pass = rep.margin <= tol;
  return rep;
}

PropertyReport check_domination(const Graph& g, const Trajectory& dirichlet,
                                const Trajectory& neumann, double tol) {
  check_aligned(dirichlet, neumann, "check_domination");
  PropertyReport rep = check_order_preservation(g, dirichlet, neumann, tol);
  rep.check = "domination";
  return rep;
}

PropertyReport check_lq_monotonicity(const Graph& g, const Trajectory& traj, double q,
                                     double tol) {
  PropertyReport rep;
  rep.check = "lq_monotonicity";
  rep.params["tol"] = tol;
  rep.params["q"] = q;
  rep.params["p"] = traj.meta.p;
  const double n0 = lq_norm(g, traj.states.front(), q);
  double worst = -kInf;
  for (const auto& st : traj.states) worst = std::max(worst, lq_norm(g, st, q) - n0);
  rep.margin = worst;
  rep.pass = rep.margin <= tol;
  return rep;
}

PropertyReport check_positivity(const Graph& g, const Trajectory& traj) {
  PropertyReport rep;
  rep.check = "positivity";
  rep.params["p"] = traj.meta.p;
  double worst = kInf;
  for (size_t k = 1; k < traj.times.size(); ++k)
    for (int v = 0; v < g.node_count(); ++v) worst = std::min(worst, traj.states[k][v]);
  rep.margin = traj.times.size() > 1 ? worst : 0.0;
  rep.pass = rep.margin > 0.0;
  return rep;
}

}  // namespace plap
