#include <doctest.h>

#include "support.hpp"

#include <random>

using namespace plap;
using namespace plap::testing;

TEST_CASE("g_p pointwise") {
  CHECK(g_p(3.0, -2.0) == doctest::Approx(-4.0));
  CHECK(g_p(1.5, 0.0) == 0.0);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> gauss;
  for (int i = 0; i < 200; ++i) {
    const double x = gauss(rng);
    CHECK(g_p(2.0, x) == doctest::Approx(x));       // identity at p = 2
    CHECK(g_p(2.7, -x) == doctest::Approx(-g_p(2.7, x)));  // odd
  }
  // strictly increasing on a sorted sample
  std::vector<double> xs;
  for (int i = 0; i < 50; ++i) xs.push_back(gauss(rng));
  std::sort(xs.begin(), xs.end());
  for (size_t i = 1; i < xs.size(); ++i)
    if (xs[i] > xs[i - 1]) CHECK(g_p(1.3, xs[i]) > g_p(1.3, xs[i - 1]));
}

TEST_CASE("p-Laplacian pointwise examples") {
  SUBCASE("constant data is an equilibrium") {
    const Graph g = path3_graph();
    const NodeFunction out = p_laplacian(g, Exponent(3.0), nf({2.0, 2.0, 2.0}));
    CHECK(out.cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("path, p = 3") {
    const Graph g = path3_graph();
    const NodeFunction out = p_laplacian(g, Exponent(3.0), nf({0.0, 1.0, 3.0}));
    CHECK(out[0] == doctest::Approx(-1.0));
    CHECK(out[1] == doctest::Approx(-3.0));
    CHECK(out[2] == doctest::Approx(4.0));
    double weighted = 0.0;
    for (int v = 0; v < 3; ++v) weighted += out[v] * g.nu(v);
    CHECK(std::abs(weighted) <= 1e-14);
  }
  SUBCASE("two-node linear case") {
    const Graph g = two_node_graph();
    const NodeFunction out = p_laplacian(g, Exponent(2.0), nf({0.0, 1.0}));
    CHECK(out[0] == doctest::Approx(-1.0));
    CHECK(out[1] == doctest::Approx(1.0));
  }
}

TEST_CASE("p-Laplacian matches the per-node oracle on random graphs") {
  std::mt19937_64 rng(17);
  for (double p : {1.5, 2.0, 2.5, 3.0, 4.0}) {
    const Graph g = random_connected_graph(14, 10, 50 + static_cast<int>(10 * p));
    const NodeFunction f = random_state(g, rng);
    const NodeFunction got = p_laplacian(g, Exponent(p), f);
    const NodeFunction want = p_laplacian_oracle(g, p, f);
    CHECK((got - want).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, want.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("nu-weighted sum of the operator output vanishes") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    const Graph g = random_connected_graph(20, 15, 900 + trial);
    const NodeFunction f = random_state(g, rng);
    const NodeFunction out = p_laplacian(g, Exponent(3.0), f);
    double weighted = 0.0, scale = 0.0;
    for (int v = 0; v < g.node_count(); ++v) {
      weighted += out[v] * g.nu(v);
      scale += std::abs(out[v]) * g.nu(v);
    }
    CHECK(std::abs(weighted) <= 1e-12 * std::max(1.0, scale));
  }
}

TEST_CASE("orientation neutrality") {
  std::mt19937_64 rng(31);
  const Graph g = random_connected_graph(12, 9, 77);
  const NodeFunction f = random_state(g, rng);
  const NodeFunction base = p_laplacian(g, Exponent(2.5), f);

  for (int trial = 0; trial < 8; ++trial) {
    GraphBuilder b;
    for (int v = 0; v < g.node_count(); ++v) b.add_node(g.node_id(v), g.nu(v));
    for (const Edge& ed : g.edges()) {
      if (rng() & 1)
        b.add_edge(g.node_id(ed.tail), g.node_id(ed.head), ed.mu);
      else
        b.add_edge(g.node_id(ed.head), g.node_id(ed.tail), ed.mu);
    }
    const Graph flipped = b.build();
    const NodeFunction out = p_laplacian(flipped, Exponent(2.5), f);
    CHECK((out - base).cwiseAbs().maxCoeff() <= 1e-15);
  }
}

TEST_CASE("p = 2 agrees with the assembled linear Laplacian") {
  std::mt19937_64 rng(41);
  const Graph g = random_connected_graph(16, 12, 123);
  const NodeFunction f = random_state(g, rng);
  const Eigen::SparseMatrix<double> K = laplacian_matrix(g);
  NodeFunction want = K * f;
  for (int v = 0; v < g.node_count(); ++v) want[v] /= g.nu(v);
  const NodeFunction got = p_laplacian(g, Exponent(2.0), f);
  CHECK((got - want).cwiseAbs().maxCoeff() <= 1e-14 * std::max(1.0, want.cwiseAbs().maxCoeff()));
}

TEST_CASE("truncated operator") {
  SUBCASE("V_n = V with no halo is bitwise the Neumann operator") {
    std::mt19937_64 rng(5);
    const Graph g = random_connected_graph(10, 6, 200);
    const NodeFunction f = random_state(g, rng);
    DirichletTruncation tr;
    for (int v = 0; v < g.node_count(); ++v) tr.nodes.push_back(v);
    const NodeFunction a = p_laplacian(g, Exponent(2.5), f);
    const NodeFunction b = truncated_p_laplacian(g, tr, Exponent(2.5), f);
    for (int v = 0; v < g.node_count(); ++v) CHECK(a[v] == b[v]);
  }
  SUBCASE("interior truncation on a path") {
    const Graph g = path3_graph();
    DirichletTruncation tr{{1}};
    const NodeFunction out = truncated_p_laplacian(g, tr, Exponent(2.0), nf({0.0, 1.0, 0.0}));
    CHECK(out[1] == doctest::Approx(2.0));  // absorption toward both cut edges
    CHECK(out[0] == doctest::Approx(0.0));  // h vanishes there
    CHECK(out[2] == doctest::Approx(0.0));
  }
  SUBCASE("outside-node branch") {
    const Graph g = path3_graph();
    DirichletTruncation tr{{1}};
    const NodeFunction out = truncated_p_laplacian(g, tr, Exponent(2.0), nf({2.0, 0.0, 0.0}));
    // v1 is outside V_n: -(1/nu) g_p(h) * mu(edges into V_n) = -2.
    CHECK(out[0] == doctest::Approx(-2.0));
  }
  SUBCASE("pure absorption on a single halo node") {
    GraphBuilder b;
    b.add_node("v").add_halo("v", 2.0);
    const Graph g = b.build();
    DirichletTruncation tr{{0}};
    const NodeFunction out = truncated_p_laplacian(g, tr, Exponent(1.5), nf({4.0}));
    CHECK(out[0] == doctest::Approx(4.0));  // |4|^{-1/2} * 4 * 2
  }
}

TEST_CASE("energy") {
  SUBCASE("constant is flat under Neumann") {
    const Graph g = path3_graph();
    CHECK(energy(g, std::nullopt, Exponent(3.0), nf({5.0, 5.0, 5.0})) == 0.0);
  }
  SUBCASE("two-node quadratic") {
    const Graph g = two_node_graph();
    CHECK(energy(g, std::nullopt, Exponent(2.0), nf({0.0, 1.0})) == doctest::Approx(0.5));
  }
  SUBCASE("path cubic") {
    const Graph g = path3_graph();
    CHECK(energy(g, std::nullopt, Exponent(3.0), nf({0.0, 1.0, 3.0})) == doctest::Approx(3.0));
  }
  SUBCASE("Dirichlet energy vanishes only at zero") {
    const Graph g = lattice_box({1, 3, true, 1.0, 1.0});
    DirichletTruncation tr{{0, 1, 2}};
    CHECK(energy(g, tr, Exponent(2.0), nf({0.0, 0.0, 0.0})) == 0.0);
    CHECK(energy(g, tr, Exponent(2.0), nf({1.0, 1.0, 1.0})) > 0.0);  // halo absorption
  }
}

TEST_CASE("gradient check certifies the energy/operator pairing") {
  std::mt19937_64 rng(59);
  const Graph g = random_connected_graph(12, 10, 321);
  SUBCASE("p = 2") {
    for (int t = 0; t < 5; ++t)
      CHECK(gradient_check(g, std::nullopt, Exponent(2.0), random_state(g, rng), 1e-5) <= 1e-7);
  }
  SUBCASE("p = 4") {
    for (int t = 0; t < 5; ++t)
      CHECK(gradient_check(g, std::nullopt, Exponent(4.0), random_state(g, rng), 1e-4) <= 1e-5);
  }
  SUBCASE("p = 1.5 away from the degenerate locus") {
    for (int t = 0; t < 5; ++t)
      CHECK(gradient_check(g, std::nullopt, Exponent(1.5), random_state(g, rng), 1e-6) <= 1e-5);
  }
  SUBCASE("constant data gives zero error") {
    CHECK(gradient_check(g, std::nullopt, Exponent(2.0), NodeFunction::Constant(12, 3.0), 1e-5) ==
          0.0);
  }
  SUBCASE("Dirichlet truncation") {
    const Graph box = lattice_box({2, 3, true, 1.0, 1.0});
    DirichletTruncation tr;
    for (int v = 0; v < box.node_count(); ++v) tr.nodes.push_back(v);
    for (int t = 0; t < 3; ++t)
      CHECK(gradient_check(box, tr, Exponent(3.0), random_state(box, rng), 1e-4) <= 1e-5);
  }
}

TEST_CASE("compensated summation stays consistent with the plain kernel") {
  std::mt19937_64 rng(61);
  const Graph g = random_connected_graph(18, 14, 17);
  const NodeFunction f = random_state(g, rng);
  const NodeFunction a = p_laplacian(g, Exponent(3.0), f, false);
  const NodeFunction b = p_laplacian(g, Exponent(3.0), f, true);
  CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-13 * std::max(1.0, a.cwiseAbs().maxCoeff()));
}

TEST_CASE("exponent validation") {
  CHECK_THROWS_AS(Exponent(1.0), PreconditionError);
  CHECK_THROWS_AS(Exponent(0.5), PreconditionError);
  CHECK(Exponent(3.0).conjugate() == doctest::Approx(1.5));
}
