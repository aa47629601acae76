#include <doctest.h>

#include "support.hpp"

#include <Eigen/Dense>

#include <random>

using namespace plap;
using namespace plap::testing;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Trajectory synthetic_two_node(double p, double a, double b, double t_max, double h,
                              bool dirichlet = false) {
  Trajectory tr;
  tr.meta.p = p;
  tr.meta.dirichlet = dirichlet;
  for (double t = 0.0; t <= t_max * (1.0 + 1e-12); t += h) {
    tr.times.push_back(t);
    tr.states.push_back(two_node_state(p, a, b, t));
  }
  return tr;
}

}  // namespace

TEST_CASE("weighted norms") {
  GraphBuilder b;
  b.add_node("a", 1.0).add_node("b", 3.0).add_edge("a", "b", 1.0);
  const Graph g = b.build();
  SUBCASE("zero function") {
    for (double q : {1.0, 2.0, kInf}) CHECK(lq_norm(g, nf({0.0, 0.0}), q) == 0.0);
  }
  SUBCASE("l1 with weights") { CHECK(lq_norm(g, nf({1.0, 1.0}), 1.0) == doctest::Approx(4.0)); }
  SUBCASE("weighted sup puts the weight inside") {
    CHECK(lq_norm(g, nf({1.0, 1.0}), kInf) == doctest::Approx(3.0));
    CHECK(sup_norm(nf({1.0, 1.0})) == doctest::Approx(1.0));
  }
  SUBCASE("q < 1 rejected") { CHECK_THROWS_AS(lq_norm(g, nf({1.0, 1.0}), 0.5), PreconditionError); }
  SUBCASE("edge norm") {
    CHECK(lp_mu_norm(g, nf({2.0}), 2.0) == doctest::Approx(2.0));
  }
}

TEST_CASE("mass") {
  GraphBuilder b;
  b.add_node("a", 2.0).add_node("b", 1.0).add_edge("a", "b", 1.0);
  const Graph g = b.build();
  CHECK(mass(g, nf({0.0, 0.0})) == 0.0);
  CHECK(mass(g, nf({1.0, 0.0})) == doctest::Approx(2.0));
  const Graph p3 = path3_graph();
  CHECK(mass(p3, nf({0.0, 1.0, 3.0})) == doctest::Approx(4.0));
}

TEST_CASE("exponent bookkeeping") {
  SUBCASE("d=2, p=1.25") {
    const Exponents ex = exponents(2.0, 1.25);
    REQUIRE(ex.m.has_value());
    CHECK(*ex.m == doctest::Approx(1.2).epsilon(1e-14));
    CHECK(*ex.s == doctest::Approx(0.36).epsilon(1e-14));
    CHECK(*ex.p_star == doctest::Approx(10.0 / 3).epsilon(1e-14));
    CHECK(*ex.q == doctest::Approx(5.0).epsilon(1e-14));
  }
  SUBCASE("m requires p < 2d/(d+1)") {
    const Exponents ex = exponents(3.0, 1.5);
    CHECK_FALSE(ex.m.has_value());
    CHECK(ex.p_star.has_value());
  }
  SUBCASE("p = 1 keeps p* only") {
    const Exponents ex = exponents(2.0, 1.0);
    CHECK_FALSE(ex.m.has_value());
    CHECK_FALSE(ex.q.has_value());
    REQUIRE(ex.p_star.has_value());
    CHECK(*ex.p_star == doctest::Approx(2.0));
  }
  SUBCASE("identities across the valid range") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> dd(2.0, 6.0);
    for (int i = 0; i < 500; ++i) {
      const double d = dd(rng);
      std::uniform_real_distribution<double> dp(1.0 + 1e-6, 2.0 * d / (d + 1.0) - 1e-6);
      const double p = dp(rng);
      const Exponents ex = exponents(d, p);
      REQUIRE(ex.m.has_value());
      // The data-space exponent d(2-p)/p is m itself.
      CHECK(std::abs(*ex.m - d * (2.0 - p) / p) <= 1e-14 * std::max(1.0, *ex.m));
      REQUIRE(ex.p_star.has_value());
      CHECK(std::abs((1.0 - p / *ex.p_star) - p / d) <= 1e-14);
    }
  }
  SUBCASE("bad parameters named") { CHECK_THROWS_AS(exponents(1.0, 1.25), PreconditionError); }
}

TEST_CASE("extinction bound") {
  SUBCASE("direct substitution") {
    const ExtinctionBound b = extinction_bound(2.0, 1.25, 1.0, 1.0);
    // Printed closed form, evaluated independently here.
    const double m = 1.2;
    const double want = 2.0 * std::pow(m + 1.25 - 2.0, 1.25) /
                        (1.25 * 1.0 * m * (m - 1.0) * std::pow(0.75, 1.25));
    CHECK(b.T0 == doctest::Approx(want).epsilon(1e-14));
    CHECK(b.m == doctest::Approx(1.2));
    // Consistency of the two arrangements: T0 = d/(p Cbar) f0^{2-p}.
    CHECK(b.T0 == doctest::Approx(2.0 / (1.25 * b.cbar)).epsilon(1e-13));
  }
  SUBCASE("homogeneity: doubling the data norm scales by 2^{2-p}") {
    const ExtinctionBound b1 = extinction_bound(2.0, 1.25, 1.0, 1.0);
    const ExtinctionBound b2 = extinction_bound(2.0, 1.25, 1.0, 2.0);
    CHECK(b2.T0 == doctest::Approx(std::pow(2.0, 0.75) * b1.T0).epsilon(1e-13));
  }
  SUBCASE("p -> 1 limit") {
    CHECK(extinction_bound_p1_limit(2.0, 1.0, 1.0) == doctest::Approx(1.0));
  }
  SUBCASE("preconditions named") {
    CHECK_THROWS_AS(extinction_bound(1.5, 1.25, 1.0, 1.0), PreconditionError);
    CHECK_THROWS_AS(extinction_bound(2.0, 1.0, 1.0, 1.0), PreconditionError);
    CHECK_THROWS_AS(extinction_bound(2.0, 1.4, 1.0, 1.0), PreconditionError);  // >= 2d/(d+1)
    CHECK_THROWS_AS(extinction_bound(2.0, 1.25, 0.0, 1.0), PreconditionError);
    CHECK_THROWS_AS(extinction_bound(2.0, 1.25, 1.0, 0.0), PreconditionError);
  }
}

TEST_CASE("difference-quotient lemma") {
  SUBCASE("strict interior point") {
    const LemmaFolResult r = lemma_fol_check(2.0, 1.0, 1.25, 2.0);
    CHECK(r.pass);
    CHECK(r.margin > 0.0);
  }
  SUBCASE("near-equality degenerates to equality") {
    const double b = 1.7;
    const LemmaFolResult r = lemma_fol_check(b * (1.0 + 1e-6), b, 1.25, 2.0);
    CHECK(r.pass);
    CHECK(r.lhs / r.rhs == doctest::Approx(1.0).epsilon(1e-3));
  }
  SUBCASE("p = 1 edge: s = m - 1") {
    const LemmaFolResult r = lemma_fol_check(3.0, 0.5, 1.0, 2.0);
    CHECK(r.pass);
  }
  SUBCASE("randomized sweep") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> dd(1.5, 6.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
      const double d = dd(rng);
      std::uniform_real_distribution<double> dp(1.0, 2.0 * d / (d + 1.0) - 1e-9);
      const double p = dp(rng);
      const double b = std::exp(6.0 * unit(rng) - 3.0);
      const double a = b * (1.0 + 1e-6 + 3.0 * unit(rng));
      CHECK(lemma_fol_check(a, b, p, d).pass);
    }
  }
  SUBCASE("preconditions") {
    CHECK_THROWS_AS(lemma_fol_check(1.0, 2.0, 1.25, 2.0), PreconditionError);
    CHECK_THROWS_AS(lemma_fol_check(2.0, 1.0, 1.5, 2.0), PreconditionError);
  }
}

TEST_CASE("operator mapping bound") {
  SUBCASE("zero input") {
    const Graph g = two_node_graph();
    const OperatorBoundResult r = operator_bound_check(g, 3.0, 2.0, nf({0.0, 0.0}));
    CHECK(r.pass);
    CHECK(r.ratio == 0.0);
  }
  SUBCASE("two-node p=3 q=2 achieves half the bound") {
    const Graph g = two_node_graph();
    const OperatorBoundResult r = operator_bound_check(g, 3.0, 2.0, nf({0.0, 1.0}));
    CHECK(r.lhs == doctest::Approx(2.0));
    CHECK(r.bound == doctest::Approx(4.0));
    CHECK(r.pass);
  }
  SUBCASE("randomized sweep on lattice boxes") {
    std::mt19937_64 rng(7);
    const Graph g = lattice_box({2, 4, false, 1.0, 1.0});
    std::uniform_real_distribution<double> dp(1.1, 4.0);
    for (int i = 0; i < 200; ++i) {
      const double p = dp(rng);
      std::uniform_real_distribution<double> dq(std::max(1.0, p - 1.0), 6.0);
      const double q = dq(rng);
      CHECK(operator_bound_check(g, p, q, random_state(g, rng)).pass);
    }
  }
  SUBCASE("q below p-1 and q = inf rejected") {
    const Graph g = two_node_graph();
    CHECK_THROWS_AS(operator_bound_check(g, 3.0, 1.5, nf({0.0, 1.0})), PreconditionError);
    CHECK_THROWS_AS(operator_bound_check(g, 3.0, kInf, nf({0.0, 1.0})), PreconditionError);
  }
}

TEST_CASE("Sobolev ratio check") {
  SUBCASE("p = 1 on a halo box: the coarea regime tops out at C_d") {
    const Graph g = lattice_box({2, 4, true, 1.0, 1.0});
    SobolevOptions opts;
    opts.samples = 48;
    const SobolevResult r = sobolev_check(g, 2.0, 1.0, opts);
    CHECK(r.worst_ratio == doctest::Approx(0.25).epsilon(1e-6));
    CHECK(r.c_d == doctest::Approx(0.25));
    CHECK(r.within_reference);
  }
  SUBCASE("delta ratio computed directly") {
    // ||delta||_{l2} / (4 unit boundary edges) on the ambient lattice.
    const Graph g = lattice_box({2, 5, true, 1.0, 1.0});
    NodeFunction f = NodeFunction::Zero(g.node_count());
    f[lattice_center(g)] = 1.0;
    const EdgeFunction grad = incidence_transpose_apply(g, f);
    CHECK(lq_norm(g, f, 2.0) / lp_mu_norm(g, grad, 1.0) == doctest::Approx(0.25));
  }
  SUBCASE("p = 1.2 stays within the reference constant") {
    const Graph g = lattice_box({2, 4, true, 1.0, 1.0});
    const SobolevResult r = sobolev_check(g, 2.0, 1.2);
    CHECK(r.within_reference);
    CHECK(r.worst_ratio > 0.0);
  }
  SUBCASE("requires halo") {
    const Graph g = lattice_box({2, 3, false, 1.0, 1.0});
    CHECK_THROWS_AS(sobolev_check(g, 2.0, 1.0), PreconditionError);
  }
}

TEST_CASE("Poincare constant") {
  SUBCASE("two-node graph: lambda_1 = 2") {
    CHECK(poincare_constant(two_node_graph()) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  }
  SUBCASE("4-cycle: lambda_1 = 2, against a dense oracle") {
    const Graph g = cycle_graph(4);
    const Eigen::MatrixXd K = Eigen::MatrixXd(laplacian_matrix(g));
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K, Eigen::EigenvaluesOnly);
    CHECK(poincare_constant(g) == doctest::Approx(1.0 / std::sqrt(es.eigenvalues()[1])).epsilon(1e-10));
    CHECK(poincare_constant(g) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-10));
  }
  SUBCASE("iterative path agrees with the chain spectrum") {
    // 600-node path: lambda_1 = 4 sin^2(pi / 1200).
    const Graph g = lattice_box({1, 600, false, 1.0, 1.0});
    const double lam1 = 4.0 * std::pow(std::sin(M_PI / 1200.0), 2);
    CHECK(poincare_constant(g) == doctest::Approx(1.0 / std::sqrt(lam1)).epsilon(1e-6));
  }
  SUBCASE("post-check holds on random data") {
    const Graph g = cycle_graph(6);
    const double C = poincare_constant(g);
    CHECK(poincare_post_check(g, C, 1000, 42) <= 1e-10);
  }
  SUBCASE("disconnected graphs rejected") {
    GraphBuilder b;
    b.add_node("a").add_node("b");
    CHECK_THROWS_AS(poincare_constant(b.build()), PreconditionError);
  }
}

TEST_CASE("decay fit") {
  const Graph g = two_node_graph();
  SUBCASE("p = 3 closed form slopes to -2") {
    const Trajectory tr = synthetic_two_node(3.0, 0.0, 1.0, 400.0, 0.5);
    const DecayFit fit = decay_fit(g, tr, 3.0, 20.0, 400.0);
    CHECK_FALSE(fit.zero_signal);
    CHECK(fit.slope == doctest::Approx(-2.0).epsilon(0.025));
    CHECK(std::isfinite(fit.bound_constant));
    CHECK(fit.bound_constant > 0.0);
  }
  SUBCASE("p = 4 slopes to -1") {
    const Trajectory tr = synthetic_two_node(4.0, 0.0, 1.0, 400.0, 0.5);
    const DecayFit fit = decay_fit(g, tr, 4.0, 20.0, 400.0);
    CHECK(fit.slope == doctest::Approx(-1.0).epsilon(0.025));
  }
  SUBCASE("window stability of the bound constant") {
    const Trajectory tr = synthetic_two_node(3.0, 0.0, 1.0, 400.0, 0.5);
    const DecayFit f1 = decay_fit(g, tr, 3.0, 20.0, 200.0);
    const DecayFit f2 = decay_fit(g, tr, 3.0, 20.0, 400.0);
    CHECK(std::abs(f2.bound_constant - f1.bound_constant) <= 0.2 * f1.bound_constant);
  }
  SUBCASE("flat signal is reported, not fitted") {
    const Trajectory tr = synthetic_two_node(3.0, 1.0, 1.0, 10.0, 0.5);
    const DecayFit fit = decay_fit(g, tr, 3.0, 1.0, 10.0);
    CHECK(fit.zero_signal);
  }
  SUBCASE("preconditions") {
    const Trajectory tr = synthetic_two_node(3.0, 0.0, 1.0, 10.0, 0.5);
    CHECK_THROWS_AS(decay_fit(g, tr, 2.0, 1.0, 5.0), PreconditionError);
    CHECK_THROWS_AS(decay_fit(g, tr, 3.0, 0.0, 5.0), PreconditionError);
    CHECK_THROWS_AS(decay_fit(g, tr, 3.0, 1.0, 50.0), PreconditionError);
  }
}

TEST_CASE("energy inequality along a Dirichlet flow") {
  SUBCASE("scalar closed form: E' = -2.4 E^{p/p*} exactly") {
    // One absorbing node of halo degree 2, p = 1.25, d = 2, k = 0:
    // u(t) = (1 - 1.5 t)^{4/3}, E = u^{1.2} = (1 - 1.5 t)^{1.6}.
    GraphBuilder b;
    b.add_node("v").add_halo("v", 2.0);
    const Graph g = b.build();
    Trajectory tr;
    tr.meta.p = 1.25;
    tr.meta.dirichlet = true;
    for (double t = 0.0; t <= 0.5 + 1e-12; t += 0.002) {
      tr.times.push_back(t);
      tr.states.push_back(nf({std::pow(1.0 - 1.5 * t, 4.0 / 3.0)}));
    }
    const EnergyInequalityResult r = energy_inequality_check(g, tr, 2.0, 1.25, 0.0);
    CHECK(r.pass);
    CHECK(r.cbar == doctest::Approx(2.4).epsilon(1e-3));
    CHECK(r.integrated_violation <= 1e-6);
  }
  SUBCASE("level above the data is trivial") {
    GraphBuilder b;
    b.add_node("v").add_halo("v", 2.0);
    const Graph g = b.build();
    Trajectory tr;
    tr.meta.p = 1.25;
    tr.meta.dirichlet = true;
    for (double t = 0.0; t <= 0.1 + 1e-12; t += 0.01) {
      tr.times.push_back(t);
      tr.states.push_back(nf({0.5}));
    }
    const EnergyInequalityResult r = energy_inequality_check(g, tr, 2.0, 1.25, 10.0);
    CHECK(r.trivial);
    CHECK(r.pass);
  }
  SUBCASE("Neumann trajectories rejected") {
    Trajectory tr = synthetic_two_node(1.25, 0.0, 1.0, 1.0, 0.01);
    CHECK_THROWS_AS(energy_inequality_check(two_node_graph(), tr, 2.0, 1.25, 0.0),
                    PreconditionError);
  }
}

TEST_CASE("regularity probe") {
  SUBCASE("smooth p = 4 closed form: bounded orders, Lipschitz top derivative") {
    Trajectory tr = synthetic_two_node(4.0, 0.0, 1.0, 2.0, 0.01);
    const RegularityReport rep = regularity_probe(tr, 4.0, 1);
    REQUIRE(rep.orders.size() == 4);
    for (const auto& o : rep.orders) {
      CHECK(std::isfinite(o.max_abs));
      CHECK(o.max_abs < 1e4);
    }
    CHECK(rep.verdict);
    CHECK(rep.hoelder_exponent >= 0.85);
  }
  SUBCASE("engineered C^{2,1/2} kink is detected") {
    // u(t) = |t - 1|^{2.5}: second derivative 3.75 |t-1|^{1/2}.
    Trajectory tr;
    tr.meta.p = 2.5;
    for (double t = 0.0; t <= 2.0 + 1e-12; t += 0.001) {
      tr.times.push_back(t);
      tr.states.push_back(nf({std::pow(std::abs(t - 1.0), 2.5), 0.0}));
    }
    const RegularityReport rep = regularity_probe(tr, 2.5, 0);
    CHECK(rep.hoelder_order == 2);
    CHECK(rep.hoelder_exponent == doctest::Approx(0.5).epsilon(0.3));
    CHECK(rep.verdict);
  }
  SUBCASE("constant trajectory carries no signal") {
    Trajectory tr = synthetic_two_node(3.0, 2.0, 2.0, 1.0, 0.01);
    const RegularityReport rep = regularity_probe(tr, 3.0, 0);
    for (const auto& o : rep.orders) CHECK(o.max_abs <= 1e-12);
    CHECK(rep.no_signal);
    CHECK(rep.verdict);
  }
  SUBCASE("insufficient samples rejected") {
    Trajectory tr = synthetic_two_node(3.0, 0.0, 1.0, 0.02, 0.01);
    CHECK_THROWS_AS(regularity_probe(tr, 3.0, 0), PreconditionError);
  }
}

TEST_CASE("check_* family") {
  const Graph g = two_node_graph();
  const Trajectory tr = synthetic_two_node(3.0, 0.0, 1.0, 2.0, 0.1);
  SUBCASE("identical trajectories contract with margin zero") {
    const PropertyReport rep = check_contraction(g, tr, tr, 1e-9);
    CHECK(rep.pass);
    CHECK(rep.margin == 0.0);
  }
  SUBCASE("mass holds on the closed form") {
    const PropertyReport rep = check_mass_conservation(g, tr, 1e-12);
    CHECK(rep.pass);
    CHECK(rep.margin <= 1e-13);
  }
  SUBCASE("lq monotonicity on the closed form") {
    for (double q : {1.0, 2.0, kInf}) CHECK(check_lq_monotonicity(g, tr, q, 1e-12).pass);
  }
  SUBCASE("positivity margins") {
    CHECK(check_positivity(g, synthetic_two_node(3.0, 0.2, 1.0, 2.0, 0.1)).pass);
    CHECK(check_positivity(g, tr).pass);  // (0,1) data turns positive for t > 0
    CHECK_FALSE(check_positivity(g, synthetic_two_node(3.0, -0.5, 1.0, 2.0, 0.1)).pass);
  }
  SUBCASE("order preservation needs aligned grids") {
    Trajectory other = synthetic_two_node(3.0, 0.0, 1.0, 2.0, 0.2);
    CHECK_THROWS_AS(check_order_preservation(g, tr, other, 1e-9), PreconditionError);
  }
}
