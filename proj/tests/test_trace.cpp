#include <gtest/gtest.h>

#include <algorithm>

#include "dformkit/trace.hpp"
#include "dformkit/random_forms.hpp"
#include "oracles.hpp"

using namespace dformkit;

namespace {

Network path3() { return Network::unlabeled(3, {{0, 1, 1.0}, {1, 2, 1.0}}); }
Network triangle() { return Network::unlabeled(3, {{0, 1, 1.0}, {1, 2, 1.0}, {0, 2, 1.0}}); }

}  // namespace

TEST(Trace, PathEndpointsGiveSeriesConductance) {
  // Brute force: min over m of (1-m)^2 + m^2 is 1/2, so c = 1/2.
  const double m = oracle::golden_min([](double v) { return (1 - v) * (1 - v) + v * v; }, -1, 2);
  const double brute = (1 - m) * (1 - m) + m * m;
  EXPECT_NEAR(brute, 0.5, 1e-12);

  const TraceResult tr = trace(assemble(path3()), {0, 2});
  EXPECT_NEAR(-tr.traced(0, 1), brute, 1e-12);
  EXPECT_NEAR(tr.traced(0, 0), brute, 1e-12);
  EXPECT_TRUE(is_markov(tr.traced).markov);
}

TEST(Trace, FullSubsetIsIdentity) {
  const FormMatrix a = assemble(triangle());
  const TraceResult tr = trace(a, {0, 1, 2});
  EXPECT_EQ(tr.traced, a);
  EXPECT_EQ(tr.extension.rows(), 0);
  const Function f = Eigen::Vector3d(0.3, -1, 2);
  EXPECT_EQ(harmonic_extension(tr, f), f);
}

TEST(Trace, TriangleTwoVertices) {
  // Interior value m minimizes (1-m)^2 + m^2 + 1 -> 3/2.
  const double m = oracle::golden_min([](double v) { return (1 - v) * (1 - v) + v * v; }, -1, 2);
  const double brute = (1 - m) * (1 - m) + m * m + 1.0;
  const TraceResult tr = trace(assemble(triangle()), {0, 1});
  EXPECT_NEAR(-tr.traced(0, 1), brute, 1e-12);
  EXPECT_NEAR(-tr.traced(0, 1), 1.5, 1e-12);
}

TEST(Trace, MatchesGaussSeidelOracle) {
  random::Engine rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    const Network net = random::network(rng, {.min_vertices = 4, .max_vertices = 12, .killing_probability = 0.2});
    const auto perm = random::permutation(rng, net.size());
    const std::size_t k = random::integer(rng, 1, net.size() - 1);
    std::vector<std::size_t> subset(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(k));
    const TraceResult tr = trace(assemble(net), subset);
    const Eigen::MatrixXd expected = oracle::gauss_seidel_trace(net, subset);
    EXPECT_LE((tr.traced.matrix() - expected).cwiseAbs().maxCoeff(), 1e-9 * assemble(net).scale());
  }
}

TEST(Trace, SingularInteriorNamesComponent) {
  // {2,3} is a component without killing that does not touch U = {0,1}.
  const Network net = Network::unlabeled(4, {{0, 1, 1.0}, {2, 3, 1.0}});
  try {
    trace(assemble(net), {0, 1});
    FAIL() << "expected singular solve";
  } catch (const NumericalError& e) {
    EXPECT_EQ(e.code(), "singular_solve");
    EXPECT_NE(std::string(e.what()).find("{2,3}"), std::string::npos);
  }
  // With killing on that component the trace exists.
  const Network killed = Network::unlabeled(4, {{0, 1, 1.0}, {2, 3, 1.0}}, Eigen::Vector4d(0, 0, 0, 1));
  EXPECT_NO_THROW(trace(assemble(killed), {0, 1}));
}

TEST(Trace, RejectsBadSubsets) {
  const FormMatrix a = assemble(path3());
  EXPECT_THROW(trace(a, {}), ValidationError);
  EXPECT_THROW(trace(a, {0, 0}), ValidationError);
  EXPECT_THROW(trace(a, {5}), ValidationError);
}

TEST(Trace, TowerProperty) {
  random::Engine rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const Network net = random::network(rng, {.min_vertices = 3, .killing_probability = 0.2});
    const FormMatrix a = assemble(net);
    const auto perm = random::permutation(rng, net.size());
    const std::size_t k2 = random::integer(rng, 2, net.size());
    const std::size_t k1 = random::integer(rng, 1, k2 - 1);
    const std::vector<std::size_t> u2(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(k2));
    std::vector<std::size_t> positions(k1), u1(k1);
    for (std::size_t i = 0; i < k1; ++i) {
      positions[i] = i;
      u1[i] = u2[i];
    }
    const TraceResult outer = trace(a, u2);
    const TraceResult nested = trace(outer.traced, positions);
    const TraceResult direct = trace(a, u1);
    EXPECT_LE((nested.traced.matrix() - direct.traced.matrix()).cwiseAbs().maxCoeff(), 1e-9 * a.scale());
  }
}

TEST(Trace, PreservesMarkovAndEnergyOfExtension) {
  random::Engine rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    const Network net = random::network(rng, {.min_vertices = 3, .killing_probability = 0.3});
    const FormMatrix a = assemble(net);
    const auto perm = random::permutation(rng, net.size());
    const std::size_t k = random::integer(rng, 1, net.size() - 1);
    const std::vector<std::size_t> subset(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(k));
    const TraceResult tr = trace(a, subset);
    { const auto rep = is_markov(tr.traced); EXPECT_TRUE(rep.markov) << (rep.violations.empty() ? "" : rep.violations.front().describe()) << " k=" << k << " n=" << net.size(); }
    const Function f = random::function(rng, k);
    const Function g = harmonic_extension(tr, f);
    for (std::size_t i = 0; i < k; ++i) EXPECT_EQ(g[static_cast<Eigen::Index>(subset[i])], f[static_cast<Eigen::Index>(i)]);
    const double target = evaluate(tr.traced, f);
    EXPECT_NEAR(evaluate(a, g), target, 1e-10 * a.scale());
    // Any other extension has at least this energy.
    const int candidates = trial < 10 ? 10000 : 100;
    for (int s = 0; s < candidates; ++s) {
      Function other = g;
      for (std::size_t w : tr.interior) other[static_cast<Eigen::Index>(w)] += random::uniform(rng, -0.5, 0.5);
      EXPECT_GE(evaluate(a, other), target - 1e-10 * a.scale());
    }
  }
}

TEST(HarmonicExtension, Examples) {
  const TraceResult tr = trace(assemble(path3()), {0, 2});
  const Function g = harmonic_extension(tr, Eigen::Vector2d(1, 0));
  // Oracle: interior minimizer of (1-m)^2 + m^2.
  const double m = oracle::golden_min([](double v) { return (1 - v) * (1 - v) + v * v; }, -1, 2);
  EXPECT_NEAR(g[1], m, 1e-7);  // golden section resolves only ~sqrt(eps)
  EXPECT_NEAR(g[1], 0.5, 1e-15);
  EXPECT_EQ(g[0], 1.0);
  EXPECT_EQ(g[2], 0.0);
  const Function c = harmonic_extension(tr, Eigen::Vector2d(0.7, 0.7));
  EXPECT_NEAR(c[1], 0.7, 1e-15);
  EXPECT_THROW(harmonic_extension(tr, Eigen::Vector3d(1, 2, 3)), ValidationError);
}

TEST(EffectiveResistance, Examples) {
  const FormMatrix edge = assemble(Network::unlabeled(2, {{0, 1, 4.0}}));
  EXPECT_DOUBLE_EQ(effective_resistance(edge, 0, 1), 0.25);
  EXPECT_NEAR(effective_resistance(assemble(path3()), 0, 2), 2.0, 1e-14);
  const FormMatrix tri = assemble(triangle());
  for (std::size_t x = 0; x < 3; ++x) {
    for (std::size_t y = 0; y < 3; ++y) {
      if (x != y) EXPECT_NEAR(effective_resistance(tri, x, y), 2.0 / 3.0, 1e-14);
    }
  }
}

TEST(EffectiveResistance, ErrorRegimes) {
  const FormMatrix killed = assemble(Network::unlabeled(2, {{0, 1, 1.0}}, Eigen::Vector2d(1, 0)));
  try {
    effective_resistance(killed, 0, 1);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.code(), "unsupported_regime");
  }
  const FormMatrix split = assemble(Network::unlabeled(4, {{0, 1, 1.0}, {2, 3, 1.0}}));
  try {
    effective_resistance(split, 0, 2);
    FAIL();
  } catch (const NumericalError& e) {
    EXPECT_EQ(e.code(), "infinite_resistance");
  }
  // A floating component elsewhere does not affect R within a component.
  EXPECT_DOUBLE_EQ(effective_resistance(split, 0, 1), 1.0);
  EXPECT_THROW(resistance_matrix(split), NumericalError);
}

TEST(ResistanceMatrix, Examples) {
  const Eigen::MatrixXd r = resistance_matrix(assemble(Network::unlabeled(2, {{0, 1, 1.0}})));
  EXPECT_NEAR(r(0, 1), 1.0, 1e-14);
  EXPECT_EQ(r(0, 0), 0.0);
  const Eigen::MatrixXd t = resistance_matrix(assemble(triangle()));
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(t(i, j), i == j ? 0.0 : 2.0 / 3.0, 1e-14);
  }
}

TEST(ResistanceMatrix, AgreesWithTwoPointTraceAndIsAMetric) {
  random::Engine rng(21);
  for (int trial = 0; trial < 60; ++trial) {
    const Network net = random::network(rng, {});
    const FormMatrix a = assemble(net);
    const Eigen::MatrixXd r = resistance_matrix(a);
    const double scale = r.maxCoeff();
    const std::size_t n = net.size();
    for (std::size_t x = 0; x < n; ++x) {
      for (std::size_t y = x + 1; y < n; ++y) {
        EXPECT_NEAR(r(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y)), effective_resistance(a, x, y), 1e-9 * scale);
      }
    }
    for (Eigen::Index x = 0; x < r.rows(); ++x) {
      for (Eigen::Index y = 0; y < r.rows(); ++y) {
        EXPECT_EQ(r(x, y), r(y, x));
        for (Eigen::Index z = 0; z < r.rows(); ++z) EXPECT_LE(r(x, z), r(x, y) + r(y, z) + 1e-9 * scale);
      }
    }
  }
}

TEST(ResistanceMatrix, RayleighMonotonicity) {
  random::Engine rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    const Network net = random::network(rng, {.min_vertices = 3, .max_vertices = 15});
    std::vector<Edge> edges = net.edges();
    const std::size_t which = random::integer(rng, 0, edges.size() - 1);
    edges[which].c *= random::uniform(rng, 1.0, 5.0);
    const Network stronger = Network::unlabeled(net.size(), edges);
    const Eigen::MatrixXd before = resistance_matrix(assemble(net));
    const Eigen::MatrixXd after = resistance_matrix(assemble(stronger));
    EXPECT_LE((after - before).maxCoeff(), 1e-9 * before.maxCoeff());
  }
}

TEST(SupFormula, BoundedByResistanceAndAttainedAtHarmonicExtension) {
  random::Engine rng(29);
  for (int trial = 0; trial < 40; ++trial) {
    const Network net = random::network(rng, {.min_vertices = 3, .max_vertices = 12});
    const FormMatrix a = assemble(net);
    const std::size_t x = 0, y = net.size() - 1;
    const double r = effective_resistance(a, x, y);
    const Function h = harmonic_extension(trace(a, {x, y}), Eigen::Vector2d(1, 0));
    EXPECT_NEAR(sup_formula_value(a, x, y, h), r, 1e-9 * r);
    for (int s = 0; s < 200; ++s) {
      EXPECT_LE(sup_formula_value(a, x, y, random::function(rng, net.size())), r + 1e-9 * r);
    }
  }
}

TEST(SupFormula, AffineInvarianceAndErrors) {
  const FormMatrix a = assemble(path3());
  const Function u = Eigen::Vector3d(0.2, 1.0, -0.4);
  const double v = sup_formula_value(a, 0, 2, u);
  EXPECT_NEAR(sup_formula_value(a, 0, 2, Function(3.0 * u.array() + 7.0)), v, 1e-14);
  const FormMatrix edge = assemble(Network::unlabeled(2, {{0, 1, 1.0}}));
  EXPECT_DOUBLE_EQ(sup_formula_value(edge, 0, 1, Eigen::Vector2d(1, 0)), 1.0);
  EXPECT_THROW(sup_formula_value(a, 0, 2, Function::Constant(3, 2.0)), ValidationError);
}
