#include "plap/graph.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <random>

namespace plap {

namespace {

std::uint64_t unordered_key(int a, int b) {
  const auto lo = static_cast<std::uint64_t>(std::min(a, b));
  const auto hi = static_cast<std::uint64_t>(std::max(a, b));
  return (hi << 32) | lo;
}

std::vector<char> subset_mask(const Graph& g, std::span<const int> subset,
                              const char* what) {
  std::vector<char> mask(static_cast<size_t>(g.node_count()), 0);
  for (int v : subset) {
    if (v < 0 || v >= g.node_count())
      throw PreconditionError(std::string(what) + ": unknown node index " + std::to_string(v));
    if (mask[static_cast<size_t>(v)])
      throw PreconditionError(std::string(what) + ": duplicate node index " + std::to_string(v));
    mask[static_cast<size_t>(v)] = 1;
  }
  return mask;
}

}  // namespace

int Graph::node_index(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw PreconditionError("unknown node id '" + id + "'");
  return it->second;
}

std::optional<int> Graph::find_node(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

double Graph::node_mu(int v) const {
  double s = 0.0;
  for (int e : incident_edges(v)) s += edges_[static_cast<size_t>(e)].mu;
  return s + halo_[static_cast<size_t>(v)];
}

std::span<const int> Graph::coordinates(int v) const {
  if (!has_coordinates()) throw PreconditionError("graph carries no lattice coordinates");
  return {coords_.data() + static_cast<size_t>(v) * static_cast<size_t>(coord_dim_),
          static_cast<size_t>(coord_dim_)};
}

GraphBuilder& GraphBuilder::add_node(const std::string& id, double nu) {
  if (id.empty() || id.find_first_of(" \t\r\n#,") != std::string::npos)
    throw PreconditionError("node id '" + id + "' is empty or contains reserved characters");
  if (!(nu > 0.0) || !std::isfinite(nu))
    throw PreconditionError("node '" + id + "': nu must be a positive finite real");
  if (g_.index_.count(id)) throw PreconditionError("duplicate node id '" + id + "'");
  g_.index_.emplace(id, static_cast<int>(g_.ids_.size()));
  g_.ids_.push_back(id);
  g_.nu_.push_back(nu);
  g_.halo_.push_back(0.0);
  g_.incident_.emplace_back();
  return *this;
}

GraphBuilder& GraphBuilder::add_edge(const std::string& tail, const std::string& head, double mu) {
  if (!(mu > 0.0) || !std::isfinite(mu))
    throw PreconditionError("edge " + tail + " -> " + head + ": mu must be a positive finite real");
  const int a = g_.node_index(tail);
  const int b = g_.node_index(head);
  if (a == b) throw PreconditionError("self-loop at node '" + tail + "'");
  const auto key = unordered_key(a, b);
  if (edge_keys_.count(key))
    throw PreconditionError("duplicate edge between '" + tail + "' and '" + head + "'");
  edge_keys_.emplace(key, 1);
  const int e = static_cast<int>(g_.edges_.size());
  g_.edges_.push_back(Edge{a, b, mu});
  g_.incident_[static_cast<size_t>(a)].push_back(e);
  g_.incident_[static_cast<size_t>(b)].push_back(e);
  return *this;
}

GraphBuilder& GraphBuilder::add_halo(const std::string& id, double extra_mu_degree) {
  if (!(extra_mu_degree >= 0.0) || !std::isfinite(extra_mu_degree))
    throw PreconditionError("halo at '" + id + "': degree must be a nonnegative finite real");
  g_.halo_[static_cast<size_t>(g_.node_index(id))] += extra_mu_degree;
  return *this;
}

GraphBuilder& GraphBuilder::set_coordinates(const std::string& id, std::span<const int> coords) {
  if (coord_dim_ < 0) {
    coord_dim_ = static_cast<int>(coords.size());
    g_.coords_.assign(g_.ids_.size() * static_cast<size_t>(coord_dim_), 0);
  }
  if (static_cast<int>(coords.size()) != coord_dim_)
    throw PreconditionError("inconsistent coordinate dimension");
  const auto v = static_cast<size_t>(g_.node_index(id));
  g_.coords_.resize(g_.ids_.size() * static_cast<size_t>(coord_dim_), 0);
  std::copy(coords.begin(), coords.end(),
            g_.coords_.begin() + static_cast<std::ptrdiff_t>(v * static_cast<size_t>(coord_dim_)));
  return *this;
}

Graph GraphBuilder::build() {
  if (built_) throw PreconditionError("GraphBuilder reused after build()");
  built_ = true;
  if (g_.ids_.empty()) throw PreconditionError("graph has an empty node set");
  g_.coord_dim_ = std::max(coord_dim_, 0);
  g_.total_nu_ = std::accumulate(g_.nu_.begin(), g_.nu_.end(), 0.0);
  g_.has_halo_ = std::any_of(g_.halo_.begin(), g_.halo_.end(), [](double h) { return h > 0.0; });
  return std::move(g_);
}

Graph lattice_box(const LatticeSpec& spec) {
  if (spec.d < 1) throw PreconditionError("lattice_box: d must be >= 1");
  if (spec.n < 1) throw PreconditionError("lattice_box: n must be >= 1");
  double count = 1.0;
  for (int i = 0; i < spec.d; ++i) count *= spec.n;
  if (count > 1e7) throw PreconditionError("lattice_box: node count exceeds the 1e7 cap");

  const int n = spec.n, d = spec.d;
  const auto total = static_cast<long long>(count);
  std::vector<int> c(static_cast<size_t>(d), 0);
  auto id_of = [&](const std::vector<int>& cc) {
    std::string s;
    for (int i = 0; i < d; ++i) {
      if (i) s += '_';
      s += std::to_string(cc[static_cast<size_t>(i)]);
    }
    return s;
  };

  GraphBuilder b;
  // Row-major sweep: last coordinate fastest.
  for (long long idx = 0; idx < total; ++idx) {
    b.add_node(id_of(c), spec.nu);
    b.set_coordinates(id_of(c), c);
    for (int i = d - 1; i >= 0; --i) {
      if (++c[static_cast<size_t>(i)] < n) break;
      c[static_cast<size_t>(i)] = 0;
    }
  }
  std::fill(c.begin(), c.end(), 0);
  for (long long idx = 0; idx < total; ++idx) {
    int halo_neighbors = 0;
    for (int i = 0; i < d; ++i) {
      if (c[static_cast<size_t>(i)] == 0) ++halo_neighbors;
      if (c[static_cast<size_t>(i)] == n - 1) ++halo_neighbors;
      if (c[static_cast<size_t>(i)] + 1 < n) {
        auto cc = c;
        ++cc[static_cast<size_t>(i)];
        b.add_edge(id_of(c), id_of(cc), spec.mu);
      }
    }
    if (spec.halo && halo_neighbors > 0) b.add_halo(id_of(c), spec.mu * halo_neighbors);
    for (int i = d - 1; i >= 0; --i) {
      if (++c[static_cast<size_t>(i)] < n) break;
      c[static_cast<size_t>(i)] = 0;
    }
  }
  return b.build();
}

Graph path_graph(int n, double nu, double mu) {
  return lattice_box(LatticeSpec{1, n, false, nu, mu});
}

Graph cycle_graph(int n, double nu, double mu) {
  if (n < 3) throw PreconditionError("cycle_graph: need n >= 3 to stay simple");
  GraphBuilder b;
  for (int i = 0; i < n; ++i) b.add_node(std::to_string(i), nu);
  for (int i = 0; i < n; ++i) b.add_edge(std::to_string(i), std::to_string((i + 1) % n), mu);
  return b.build();
}

int lattice_node(const Graph& g, std::span<const int> coords) {
  std::string s;
  for (size_t i = 0; i < coords.size(); ++i) {
    if (i) s += '_';
    s += std::to_string(coords[i]);
  }
  return g.node_index(s);
}

int lattice_center(const Graph& g) {
  if (!g.has_coordinates()) throw PreconditionError("lattice_center: graph carries no coordinates");
  auto c0 = g.coordinates(0);
  std::vector<int> lo(c0.begin(), c0.end()), hi(c0.begin(), c0.end());
  for (int v = 1; v < g.node_count(); ++v) {
    auto c = g.coordinates(v);
    for (size_t i = 0; i < c.size(); ++i) {
      lo[i] = std::min(lo[i], c[i]);
      hi[i] = std::max(hi[i], c[i]);
    }
  }
  std::vector<int> mid(lo.size());
  for (size_t i = 0; i < lo.size(); ++i) mid[i] = lo[i] + (hi[i] - lo[i]) / 2;
  return lattice_node(g, mid);
}

EdgeFunction incidence_transpose_apply(const Graph& g, const NodeFunction& f) {
  if (f.size() != g.node_count())
    throw PreconditionError("incidence_transpose_apply: node function domain mismatch");
  EdgeFunction u(g.edge_count());
  for (int e = 0; e < g.edge_count(); ++e) {
    const Edge& ed = g.edge(e);
    u[e] = f[ed.head] - f[ed.tail];
  }
  return u;
}

NodeFunction incidence_apply(const Graph& g, const EdgeFunction& u) {
  if (u.size() != g.edge_count())
    throw PreconditionError("incidence_apply: edge function domain mismatch");
  NodeFunction f = NodeFunction::Zero(g.node_count());
  for (int e = 0; e < g.edge_count(); ++e) {
    const Edge& ed = g.edge(e);
    f[ed.tail] -= u[e];
    f[ed.head] += u[e];
  }
  return f;
}

double ulf_constant(const Graph& g) {
  double best = std::numeric_limits<double>::infinity();
  for (int v = 0; v < g.node_count(); ++v) {
    const double mu_v = g.node_mu(v);
    if (mu_v > 0.0) best = std::min(best, g.nu(v) / mu_v);
  }
  return best;
}

std::vector<int> boundary_edges(const Graph& g, std::span<const int> subset) {
  const auto mask = subset_mask(g, subset, "boundary_edges");
  std::vector<int> out;
  for (int e = 0; e < g.edge_count(); ++e) {
    const Edge& ed = g.edge(e);
    if (mask[static_cast<size_t>(ed.tail)] != mask[static_cast<size_t>(ed.head)]) out.push_back(e);
  }
  return out;
}

double boundary_mu(const Graph& g, std::span<const int> subset) {
  const auto mask = subset_mask(g, subset, "boundary_mu");
  double s = 0.0;
  for (const Edge& ed : g.edges())
    if (mask[static_cast<size_t>(ed.tail)] != mask[static_cast<size_t>(ed.head)]) s += ed.mu;
  for (int v : subset) s += g.halo_degree(v);
  return s;
}

bool is_connected(const Graph& g) {
  std::vector<char> seen(static_cast<size_t>(g.node_count()), 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int reached = 1;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (int e : g.incident_edges(v)) {
      const Edge& ed = g.edge(e);
      const int w = ed.tail == v ? ed.head : ed.tail;
      if (!seen[static_cast<size_t>(w)]) {
        seen[static_cast<size_t>(w)] = 1;
        ++reached;
        stack.push_back(w);
      }
    }
  }
  return reached == g.node_count();
}

Graph induced_subgraph(const Graph& g, std::span<const int> keep) {
  if (keep.empty()) throw PreconditionError("induced_subgraph: empty node subset");
  const auto mask = subset_mask(g, keep, "induced_subgraph");
  GraphBuilder b;
  for (int v : keep) b.add_node(g.node_id(v), g.nu(v));
  if (g.has_coordinates())
    for (int v : keep) b.set_coordinates(g.node_id(v), g.coordinates(v));
  for (const Edge& ed : g.edges()) {
    const bool ti = mask[static_cast<size_t>(ed.tail)], hi = mask[static_cast<size_t>(ed.head)];
    if (ti && hi)
      b.add_edge(g.node_id(ed.tail), g.node_id(ed.head), ed.mu);
    else if (ti)
      b.add_halo(g.node_id(ed.tail), ed.mu);
    else if (hi)
      b.add_halo(g.node_id(ed.head), ed.mu);
  }
  for (int v : keep)
    if (g.halo_degree(v) > 0.0) b.add_halo(g.node_id(v), g.halo_degree(v));
  return b.build();
}

IsoResult isoperimetric_constant_bruteforce(const Graph& g, double d, const IsoOptions& opts) {
  if (!(d > 1.0)) throw PreconditionError("isoperimetric constant: d must be > 1");
  const int n = g.node_count();
  const double expo = (d - 1.0) / d;
  IsoResult res;

  auto ratio_of = [&](double nu_sum, double bmu) {
    return bmu > 0.0 ? std::pow(nu_sum, expo) / bmu : -1.0;
  };

  if (n <= opts.exhaustive_node_cap) {
    // Gray-code sweep: one node flips per visited subset, so nu and the
    // boundary measure update in O(deg).
    std::vector<char> in(static_cast<size_t>(n), 0);
    double nu_sum = 0.0, bmu = 0.0;
    int size = 0;
    const std::uint64_t total = std::uint64_t{1} << n;
    std::uint64_t gray_prev = 0;
    for (std::uint64_t i = 1; i < total; ++i) {
      const std::uint64_t gray = i ^ (i >> 1);
      const int v = std::countr_zero(gray ^ gray_prev);
      gray_prev = gray;
      const bool adding = !in[static_cast<size_t>(v)];
      in[static_cast<size_t>(v)] = adding;
      const double sign = adding ? 1.0 : -1.0;
      nu_sum += sign * g.nu(v);
      size += adding ? 1 : -1;
      bmu += sign * g.halo_degree(v);
      for (int e : g.incident_edges(v)) {
        const Edge& ed = g.edge(e);
        const int w = ed.tail == v ? ed.head : ed.tail;
        // After the flip: edge is boundary iff exactly one endpoint is in.
        if (in[static_cast<size_t>(w)] != in[static_cast<size_t>(v)])
          bmu += ed.mu;
        else
          bmu -= ed.mu;
      }
      if (size > opts.max_subset_size) continue;
      ++res.subsets_evaluated;
      res.c_d = std::max(res.c_d, ratio_of(nu_sum, bmu));
    }
    return res;
  }

  if (!opts.allow_sampling)
    throw PreconditionError(
        "isoperimetric constant: graph exceeds the exhaustive enumeration cap (" +
        std::to_string(opts.exhaustive_node_cap) + " nodes); enable sampling");

  res.sampled = true;
  // All singletons, then seeded random subsets.
  for (int v = 0; v < n; ++v) {
    ++res.subsets_evaluated;
    const int one[1] = {v};
    res.c_d = std::max(res.c_d, ratio_of(g.nu(v), boundary_mu(g, one)));
  }
  std::mt19937_64 rng(opts.seed);
  std::vector<int> perm(static_cast<size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  const int max_k = std::min(opts.max_subset_size, n);
  std::uniform_int_distribution<int> size_dist(1, std::max(1, max_k));
  for (int s = 0; s < opts.sample_count; ++s) {
    const int k = size_dist(rng);
    for (int i = 0; i < k; ++i) {
      std::uniform_int_distribution<int> pick(i, n - 1);
      std::swap(perm[static_cast<size_t>(i)], perm[static_cast<size_t>(pick(rng))]);
    }
    std::span<const int> subset(perm.data(), static_cast<size_t>(k));
    double nu_sum = 0.0;
    for (int v : subset) nu_sum += g.nu(v);
    ++res.subsets_evaluated;
    res.c_d = std::max(res.c_d, ratio_of(nu_sum, boundary_mu(g, subset)));
  }
  return res;
}

ExhaustionFamily::ExhaustionFamily(const Graph& ambient, std::vector<std::vector<int>> levels)
    : ambient_(&ambient), levels_(std::move(levels)) {
  if (levels_.empty()) throw PreconditionError("exhaustion family: no levels");
  std::vector<char> prev;
  size_t prev_size = 0;
  for (size_t i = 0; i < levels_.size(); ++i) {
    auto mask = subset_mask(ambient, {levels_[i].data(), levels_[i].size()}, "exhaustion level");
    if (levels_[i].empty()) throw PreconditionError("exhaustion family: empty level");
    if (i > 0) {
      if (levels_[i].size() <= prev_size)
        throw PreconditionError("exhaustion family: levels must grow strictly");
      for (size_t v = 0; v < prev.size(); ++v)
        if (prev[v] && !mask[v])
          throw PreconditionError("exhaustion family: levels must be nested");
    }
    prev = std::move(mask);
    prev_size = levels_[i].size();
  }
}

bool ExhaustionFamily::covers(std::span<const int> region) const {
  const auto& last = levels_.back();
  std::vector<char> mask(static_cast<size_t>(ambient_->node_count()), 0);
  for (int v : last) mask[static_cast<size_t>(v)] = 1;
  return std::all_of(region.begin(), region.end(),
                     [&](int v) { return mask[static_cast<size_t>(v)]; });
}

ExhaustionFamily lattice_centered_family(const Graph& box, std::span<const int> sides) {
  if (!box.has_coordinates())
    throw PreconditionError("lattice_centered_family: graph carries no coordinates");
  auto c0 = box.coordinates(0);
  const size_t dim = c0.size();
  std::vector<int> lo(c0.begin(), c0.end()), hi(c0.begin(), c0.end());
  for (int v = 1; v < box.node_count(); ++v) {
    auto c = box.coordinates(v);
    for (size_t i = 0; i < dim; ++i) {
      lo[i] = std::min(lo[i], c[i]);
      hi[i] = std::max(hi[i], c[i]);
    }
  }
  std::vector<std::vector<int>> levels;
  for (int side : sides) {
    if (side < 1) throw PreconditionError("lattice_centered_family: side must be >= 1");
    std::vector<int> level;
    for (int v = 0; v < box.node_count(); ++v) {
      auto c = box.coordinates(v);
      bool inside = true;
      for (size_t i = 0; i < dim; ++i) {
        const int span = hi[i] - lo[i] + 1;
        const int start = lo[i] + (span - side) / 2;
        if (c[i] < start || c[i] >= start + side) {
          inside = false;
          break;
        }
      }
      if (inside) level.push_back(v);
    }
    levels.push_back(std::move(level));
  }
  return ExhaustionFamily(box, std::move(levels));
}

}  // namespace plap
