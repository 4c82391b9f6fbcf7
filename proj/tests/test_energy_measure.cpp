#include <gtest/gtest.h>

#include <cmath>

#include "dformkit/energy_measure.hpp"
#include "dformkit/random_forms.hpp"

using namespace dformkit;

namespace {

// sum over edges at x of c (f(x)-f(y))^2 / 2 plus kappa f(x)^2 / 2, from the edge list.
Eigen::VectorXd edge_masses(const Network& net, const Function& f) {
  Eigen::VectorXd m = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(net.size()));
  for (const auto& e : net.edges()) {
    const auto u = static_cast<Eigen::Index>(e.u), v = static_cast<Eigen::Index>(e.v);
    const double d = f[u] - f[v];
    m[u] += 0.5 * e.c * d * d;
    m[v] += 0.5 * e.c * d * d;
  }
  for (Eigen::Index x = 0; x < m.size(); ++x) m[x] += 0.5 * net.killing()[x] * f[x] * f[x];
  return m;
}

double scale_of(const FormMatrix& a, const Function& f) {
  return a.scale() * std::max(1.0, f.cwiseAbs().maxCoeff() * f.cwiseAbs().maxCoeff());
}

}  // namespace

TEST(EnergyMeasure, UnitEdge) {
  const FormMatrix a = assemble(Network::unlabeled(2, {{0, 1, 1.0}}));
  const auto g = energy_measure(a, Eigen::Vector2d(1, 0));
  EXPECT_EQ(g.masses, Eigen::Vector2d(0.5, 0.5));
  EXPECT_EQ(g.total, 1.0);
  EXPECT_EQ(g.total, evaluate(a, Eigen::Vector2d(1, 0)));
}

TEST(EnergyMeasure, EdgeWithKilling) {
  const FormMatrix a = assemble(Network::unlabeled(2, {{0, 1, 1.0}}, Eigen::Vector2d(1, 2)));
  const auto g = energy_measure(a, Eigen::Vector2d(1, 0));
  EXPECT_EQ(g.masses, Eigen::Vector2d(1.0, 0.5));
  EXPECT_EQ(g.total, 1.5);
  EXPECT_EQ(g.total, evaluate(a, Eigen::Vector2d(1, 0)) - 0.5 * 1.0);
}

TEST(EnergyMeasure, ConstantFunctionHasNoMass) {
  const FormMatrix a = assemble(Network::unlabeled(3, {{0, 1, 2.0}, {1, 2, 0.5}}));
  const auto g = energy_measure(a, Function::Constant(3, 4.0));
  EXPECT_EQ(g.masses, Eigen::VectorXd::Zero(3));
}

TEST(EnergyMeasure, RejectsNonMarkov) {
  Eigen::Matrix2d m;
  m << 1, 0.5, 0.5, 1;
  EXPECT_THROW(energy_measure(FormMatrix(m), Eigen::Vector2d(1, 0)), ValidationError);
}

TEST(EnergyMeasure, MatchesEdgeListAndTotalIdentity) {
  random::Engine rng(73);
  for (int trial = 0; trial < 500; ++trial) {
    const Network net = random::network(rng, {.killing_probability = 0.4});
    const FormMatrix a = assemble(net);
    const Function f = random::function(rng, net.size(), -2.0, 2.0);
    const auto g = energy_measure(a, f);
    const double scale = scale_of(a, f);
    EXPECT_GE(g.masses.minCoeff(), 0.0);
    EXPECT_LE((g.masses - edge_masses(net, f)).cwiseAbs().maxCoeff(), 1e-12 * scale);
    double killing_part = 0.0;
    for (Eigen::Index x = 0; x < f.size(); ++x) killing_part += net.killing()[x] * f[x] * f[x];
    EXPECT_NEAR(g.total, evaluate(a, f) - 0.5 * killing_part, 1e-12 * scale * static_cast<double>(net.size()));
  }
}

TEST(TestIdentity, IndicatorRecoversMass) {
  random::Engine rng(79);
  const Network net = random::network(rng, {.min_vertices = 10, .max_vertices = 10, .killing_probability = 0.3});
  const FormMatrix a = assemble(net);
  const Function f = random::function(rng, net.size());
  const auto g = energy_measure(a, f);
  for (std::size_t x = 0; x < net.size(); ++x) {
    const auto r = test_identity(a, f, Function::Unit(static_cast<Eigen::Index>(net.size()), static_cast<Eigen::Index>(x)));
    EXPECT_EQ(r.lhs, 2.0 * g.masses[static_cast<Eigen::Index>(x)]);
    EXPECT_NEAR(r.rhs, r.lhs, 1e-12 * scale_of(a, f));
  }
}

TEST(TestIdentity, ConstantPhiOnConservativeForm) {
  random::Engine rng(83);
  const Network net = random::network(rng, {});
  const FormMatrix a = assemble(net);
  const Function f = random::function(rng, net.size());
  const auto r = test_identity(a, f, Function::Ones(static_cast<Eigen::Index>(net.size())));
  const double scale = scale_of(a, f) * static_cast<double>(net.size());
  EXPECT_NEAR(r.lhs, 2.0 * evaluate(a, f), 1e-12 * scale);
  EXPECT_NEAR(r.rhs, 2.0 * evaluate(a, f), 1e-12 * scale);
}

TEST(TestIdentity, RandomPhiOnTwentyVertexForms) {
  random::Engine rng(89);
  for (int trial = 0; trial < 200; ++trial) {
    const Network net = random::network(rng, {.min_vertices = 20, .max_vertices = 20, .killing_probability = 0.3});
    const FormMatrix a = assemble(net);
    const Function f = random::function(rng, 20);
    const Function phi = random::function(rng, 20);
    // Oracle: 2 sum phi Gamma with Gamma from the edge list.
    const double expected = 2.0 * phi.dot(edge_masses(net, f));
    const auto r = test_identity(a, f, phi);
    const double scale = scale_of(a, f) * 20.0;
    EXPECT_NEAR(r.lhs, expected, 1e-12 * scale);
    EXPECT_NEAR(r.rhs, expected, 1e-12 * scale);
  }
}

TEST(PushforwardGamma, SeparatedAndMergedAndConstant) {
  const FormMatrix a = assemble(Network::unlabeled(3, {{0, 2, 1.0}, {1, 2, 1.0}}));
  const Function f = Eigen::Vector3d(1, 1, 0);
  const auto gamma = energy_measure(a, f);

  const auto sep = embed(AlgebraSpec({"a", "b", "c"}, {Eigen::Vector3d(1, 2, 3)}));
  EXPECT_EQ(pushforward_gamma(gamma, sep).masses, gamma.masses);

  const auto merged = embed(AlgebraSpec({"a", "b", "c"}, {Eigen::Vector3d(0, 0, 1)}));
  const auto summed = pushforward_gamma(gamma, merged);
  const auto direct = energy_measure(transfer_form(a, merged), to_classes(f, merged));
  EXPECT_EQ(summed.masses, direct.masses);
  EXPECT_EQ(summed.masses, Eigen::Vector2d(1, 1));

  const auto zero = pushforward_gamma(energy_measure(a, Function::Constant(3, 2.0)), merged);
  EXPECT_EQ(zero.masses, Eigen::Vector2d(0, 0));
  EXPECT_EQ(energy_measure(transfer_form(a, merged), Eigen::Vector2d(2, 2)).masses, Eigen::Vector2d(0, 0));
}

TEST(PushforwardGamma, ConsistentOnRandomQuotients) {
  random::Engine rng(97);
  for (int trial = 0; trial < 200; ++trial) {
    const Network net = random::network(rng, {.killing_probability = 0.3});
    const FormMatrix a = assemble(net);
    Eigen::VectorXd gen(static_cast<Eigen::Index>(net.size()));
    for (Eigen::Index i = 0; i < gen.size(); ++i) gen[i] = static_cast<double>(random::integer(rng, 0, 4));
    std::vector<std::string> labels(net.size(), "v");
    const auto emb = embed(AlgebraSpec(labels, {gen}));
    const Function fhat = random::function(rng, emb.class_count());
    const Function f = from_classes(fhat, emb);
    const auto lhs = pushforward_gamma(energy_measure(a, f), emb);
    const auto rhs = energy_measure(transfer_form(a, emb), fhat);
    EXPECT_LE((lhs.masses - rhs.masses).cwiseAbs().maxCoeff(), 1e-12 * scale_of(a, f) * static_cast<double>(net.size()));
  }
}

TEST(Counterexample, EnergyStaysOneWhileSetMassHalves) {
  const auto rows = counterexample_demo(4, 12, {0.0, 0.5, 1.0});
  ASSERT_EQ(rows.size(), 9u);
  for (const auto& r : rows) {
    EXPECT_NEAR(r.energy, 1.0, 1e-12);
    EXPECT_NEAR(r.gamma_set, std::ldexp(1.0, 1 - static_cast<int>(r.level)), 1e-15);
    EXPECT_LE(r.gamma_set, 3.0 * std::ldexp(1.0, 1 - static_cast<int>(r.level)));
  }
  EXPECT_TRUE(std::isnan(rows.front().ratio));
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_NEAR(rows[i].ratio, 0.5, 1e-6);
}

TEST(Counterexample, AllPointsCarryTheWholeMass) {
  std::vector<double> all;
  for (int k = 0; k <= 8; ++k) all.push_back(k / 8.0);
  const auto rows = counterexample_demo(3, 3, all);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_NEAR(rows[0].gamma_set, 1.0, 1e-14);
}

TEST(Counterexample, ConstantProfileIsZeroAndErrors) {
  const auto rows = counterexample_demo(2, 5, {0.0, 0.5}, [](double) { return 1.0; });
  for (const auto& r : rows) {
    EXPECT_EQ(r.energy, 0.0);
    EXPECT_EQ(r.gamma_set, 0.0);
  }
  EXPECT_THROW(counterexample_demo(2, 5, {0.3}), ValidationError);
  EXPECT_THROW(counterexample_demo(1, 5, {0.25}), ValidationError);
  EXPECT_THROW(counterexample_demo(2, 13, {0.5}), ValidationError);
  EXPECT_THROW(counterexample_demo(5, 2, {0.5}), ValidationError);
}
