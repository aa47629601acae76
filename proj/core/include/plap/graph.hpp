#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace plap {

/// Error categories. The CLI maps them onto exit codes:
/// ParseError -> 2, PreconditionError -> 3, SolverError -> 4.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct PreconditionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Real-valued function on the node set, one entry per node in index order.
using NodeFunction = Eigen::VectorXd;
/// Real-valued function on the edge set, one entry per edge in list order.
using EdgeFunction = Eigen::VectorXd;

/// Oriented edge tail -> head with weight mu > 0. The orientation is a
/// stored parametrization; all operators are orientation-neutral.
struct Edge {
  int tail = -1;
  int head = -1;
  double mu = 1.0;
};

/// Weighted, simple, oriented-edge graph with node measure nu and edge
/// measure mu. Node identifiers are opaque strings in files and dense
/// integer indices internally. Immutable after construction; safe to share
/// across threads for read-only use.
///
/// A node may additionally carry a positive "halo degree": extra mu-mass of
/// edges toward an implicit ambient layer (lattice neighbors outside the
/// box, or neighbors dropped by induced_subgraph). Halo is metadata, not
/// explicit nodes; it feeds the Dirichlet absorption terms and ambient
/// boundary/degree counting, and is ignored by the pure Neumann operator.
class Graph {
 public:
  int node_count() const { return static_cast<int>(nu_.size()); }
  int edge_count() const { return static_cast<int>(edges_.size()); }

  const std::string& node_id(int v) const { return ids_[static_cast<size_t>(v)]; }
  /// Index of a node id; PreconditionError if unknown.
  int node_index(const std::string& id) const;
  std::optional<int> find_node(const std::string& id) const;

  double nu(int v) const { return nu_[static_cast<size_t>(v)]; }
  double halo_degree(int v) const { return halo_[static_cast<size_t>(v)]; }
  bool has_halo() const { return has_halo_; }

  const Edge& edge(int e) const { return edges_[static_cast<size_t>(e)]; }
  const std::vector<Edge>& edges() const { return edges_; }
  std::span<const int> incident_edges(int v) const {
    const auto& inc = incident_[static_cast<size_t>(v)];
    return {inc.data(), inc.size()};
  }

  /// Total node measure nu(V).
  double total_nu() const { return total_nu_; }

  /// Ambient mu-degree of a node: sum of incident edge weights plus the
  /// halo degree.
  double node_mu(int v) const;

  /// True if the graph was built by a lattice generator; then nodes carry
  /// integer coordinates.
  bool has_coordinates() const { return !coords_.empty(); }
  std::span<const int> coordinates(int v) const;

 private:
  friend class GraphBuilder;
  Graph() = default;

  std::vector<std::string> ids_;
  std::unordered_map<std::string, int> index_;
  std::vector<double> nu_;
  std::vector<Edge> edges_;
  std::vector<double> halo_;
  std::vector<std::vector<int>> incident_;
  std::vector<int> coords_;  // flattened, coord_dim_ per node
  int coord_dim_ = 0;
  double total_nu_ = 0.0;
  bool has_halo_ = false;
};

/// Single-use builder enforcing the graph invariants: positive weights,
/// unique ids, existing endpoints, no self-loops, at most one edge per
/// unordered node pair.
class GraphBuilder {
 public:
  GraphBuilder& add_node(const std::string& id, double nu = 1.0);
  GraphBuilder& add_edge(const std::string& tail, const std::string& head, double mu = 1.0);
  GraphBuilder& add_halo(const std::string& id, double extra_mu_degree);
  /// Attach integer coordinates to a node (lattice generators only).
  GraphBuilder& set_coordinates(const std::string& id, std::span<const int> coords);

  /// Validates and produces the immutable graph. The builder is spent
  /// afterwards. PreconditionError on an empty node set.
  Graph build();

 private:
  Graph g_;
  std::unordered_map<std::uint64_t, char> edge_keys_;
  int coord_dim_ = -1;
  bool built_ = false;
};

/// Axis-aligned box {0,...,n-1}^d in the integer lattice with unit-spaced
/// nearest-neighbor edges. With halo set, every missing lattice neighbor of
/// a boundary node contributes `mu` to that node's halo degree.
struct LatticeSpec {
  int d = 1;
  int n = 1;
  bool halo = false;
  double nu = 1.0;
  double mu = 1.0;
};

Graph lattice_box(const LatticeSpec& spec);
Graph path_graph(int n, double nu = 1.0, double mu = 1.0);
Graph cycle_graph(int n, double nu = 1.0, double mu = 1.0);

/// Node index of the lattice point with the given coordinates.
int lattice_node(const Graph& g, std::span<const int> coords);
/// Center node of a lattice box (coordinate (n-1)/2 rounded down per axis).
int lattice_center(const Graph& g);

/// (I^T f)(e) = f(head) - f(tail): the discrete gradient along the stored
/// orientation. Flipping one edge's orientation flips only that entry's sign.
EdgeFunction incidence_transpose_apply(const Graph& g, const NodeFunction& f);

/// (I u)(v) = sum_e iota_{v,e} u(e) with iota = -1 at the tail and +1 at the
/// head: the discrete divergence.
NodeFunction incidence_apply(const Graph& g, const EdgeFunction& u);

/// min over nodes of nu(v) / node_mu(v). Positive on every nonempty finite
/// graph; +infinity when every node has zero mu-degree.
double ulf_constant(const Graph& g);

/// Edges with exactly one endpoint in the subset. Halo edges are not listed
/// (they are not in the edge set); boundary_mu accounts for them.
std::vector<int> boundary_edges(const Graph& g, std::span<const int> subset);

/// mu(boundary of subset): weights of edges leaving the subset plus the halo
/// degree of every subset node (ambient neighbors are always outside).
double boundary_mu(const Graph& g, std::span<const int> subset);

bool is_connected(const Graph& g);

/// Induced subgraph on `keep`: nodes and inner edges keep their weights;
/// every dropped edge adds its mu to the halo degree of the kept endpoint.
Graph induced_subgraph(const Graph& g, std::span<const int> keep);

struct IsoOptions {
  /// Only subsets up to this cardinality enter the search.
  int max_subset_size = std::numeric_limits<int>::max();
  /// Hard cap for exhaustive 2^n enumeration.
  int exhaustive_node_cap = 24;
  /// Above the cap, randomized subset sampling must be opted into.
  bool allow_sampling = false;
  int sample_count = 20000;
  std::uint64_t seed = 0x1d5a2f53u;
};

struct IsoResult {
  /// Smallest admissible C_d over the enumerated family:
  /// max over subsets of nu(V0)^{(d-1)/d} / mu(boundary V0).
  double c_d = 0.0;
  std::uint64_t subsets_evaluated = 0;
  bool sampled = false;
};

/// Brute-force estimate of the d-isoperimetric constant. Subsets with empty
/// boundary are skipped: a finite graph without halo never constrains C_d
/// through its full node set, so the estimate targets the ambient graph that
/// the halo metadata encodes. Exhaustive up to exhaustive_node_cap nodes
/// (Gray-code sweep); beyond that, seeded random subsets plus all singletons,
/// gated by allow_sampling.
IsoResult isoperimetric_constant_bruteforce(const Graph& g, double d,
                                            const IsoOptions& opts = {});

/// Growing family of node subsets V_1 subset V_2 subset ... of an ambient
/// graph, the finite window sequence of an exhaustion.
class ExhaustionFamily {
 public:
  /// Validates strict growth and nonemptiness; keeps a pointer to the
  /// ambient graph, which must outlive the family.
  ExhaustionFamily(const Graph& ambient, std::vector<std::vector<int>> levels);

  const Graph& ambient() const { return *ambient_; }
  int level_count() const { return static_cast<int>(levels_.size()); }
  std::span<const int> level(int i) const {
    const auto& l = levels_[static_cast<size_t>(i)];
    return {l.data(), l.size()};
  }
  /// True if the last level contains every node of `region`.
  bool covers(std::span<const int> region) const;

 private:
  const Graph* ambient_;
  std::vector<std::vector<int>> levels_;
};

/// Centered sub-boxes of a lattice box, one per requested side length, as an
/// exhaustion family (sides must be strictly increasing).
ExhaustionFamily lattice_centered_family(const Graph& box, std::span<const int> sides);

}  // namespace plap
