#include <gtest/gtest.h>

#include <cmath>

#include "dformkit/random_forms.hpp"
#include "dformkit/sequences.hpp"
#include "oracles.hpp"

using namespace dformkit;

namespace {

Function sample(const Network& net, double (*fn)(double)) {
  Function f(static_cast<Eigen::Index>(net.size()));
  for (std::size_t i = 0; i < net.size(); ++i) f[static_cast<Eigen::Index>(i)] = fn(std::stod(net.vertices()[i]));
  return f;
}

// Closed-form Riemann sum: 2^n sum_k ((k+1)^2 - k^2)^2 / 16^n = 4/3 - 1/(3 4^n).
double x_squared_energy(std::size_t n) { return 4.0 / 3.0 - 1.0 / (3.0 * std::ldexp(1.0, 2 * static_cast<int>(n))); }

}  // namespace

TEST(Dyadic, LevelStructure) {
  const Network l2 = dyadic_interval_level(2);
  EXPECT_EQ(l2.size(), 5u);
  EXPECT_EQ(l2.vertices()[1], "0.25");
  for (const auto& e : l2.edges()) EXPECT_EQ(e.c, 4.0);
  EXPECT_THROW(dyadic_interval_level(21), ValidationError);
  EXPECT_THROW(build_dyadic_interval(21), ValidationError);
}

TEST(Dyadic, CompatibleAtEveryLevel) {
  const auto seq = build_dyadic_interval(12);
  const auto report = check_compatibility(seq);
  EXPECT_TRUE(report.compatible);
  ASSERT_EQ(report.deviation.size(), 12u);
  for (double d : report.deviation) EXPECT_LE(d, 1e-12);
}

TEST(Dyadic, TraceMatchesGaussSeidelOracle) {
  const auto seq = build_dyadic_interval(3);
  for (std::size_t n = 0; n < 3; ++n) {
    const Eigen::MatrixXd expected = oracle::gauss_seidel_trace(seq.network(n + 1), seq.inclusions()[n]);
    EXPECT_LE((expected - seq.form(n).matrix()).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Dyadic, ResistanceIsOneAtEveryLevel) {
  for (std::size_t n = 0; n <= 10; ++n) {
    const Network net = dyadic_interval_level(n);
    EXPECT_NEAR(effective_resistance(assemble(net), 0, net.size() - 1), 1.0, 1e-12);
  }
}

TEST(Dyadic, LinearProfileIsConstantOne) {
  const auto seq = build_dyadic_interval(8);
  const auto profile = energy_profile(seq, sample(seq.network(8), [](double x) { return x; }));
  EXPECT_FALSE(profile.warning);
  for (double e : profile.energies) EXPECT_NEAR(e, 1.0, 1e-12);
  const auto lim = limit_energy_estimate(seq, sample(seq.network(8), [](double x) { return x; }));
  EXPECT_NEAR(lim.estimate, 1.0, 1e-12);
  EXPECT_NEAR(lim.last_increment, 0.0, 1e-12);
}

TEST(Dyadic, ConstantProfileIsZero) {
  const auto seq = build_dyadic_interval(5);
  const Function c = Function::Constant(static_cast<Eigen::Index>(seq.network(5).size()), 2.5);
  for (double e : energy_profile(seq, c).energies) EXPECT_EQ(e, 0.0);
  const auto lim = limit_energy_estimate(seq, c);
  EXPECT_EQ(lim.estimate, 0.0);
  EXPECT_EQ(lim.last_increment, 0.0);
}

TEST(Dyadic, SquareProfileFollowsRiemannSums) {
  const auto seq = build_dyadic_interval(8);
  const auto profile = energy_profile(seq, sample(seq.network(8), [](double x) { return x * x; }));
  EXPECT_TRUE(profile.monotone());
  for (std::size_t n = 0; n <= 8; ++n) EXPECT_NEAR(profile.energies[n], x_squared_energy(n), 1e-12);
  for (std::size_t n = 1; n <= 8; ++n) EXPECT_GT(profile.energies[n], profile.energies[n - 1]);
  const auto lim = limit_energy_estimate(seq, sample(seq.network(8), [](double x) { return x * x; }));
  EXPECT_NEAR(lim.estimate, 4.0 / 3.0, 1e-2);
  EXPECT_GT(lim.last_increment, 0.0);
}

TEST(Sequences, LimitEstimateNeedsThreeLevels) {
  const auto seq = build_dyadic_interval(1);
  EXPECT_THROW(limit_energy_estimate(seq, Function::Zero(3)), ValidationError);
}

TEST(Sequences, PerturbedConductanceIsDetected) {
  const double delta = 1e-3;
  auto seq = build_dyadic_interval(3);
  std::vector<Network> nets = seq.networks();
  nets[0] = Network(nets[0].vertices(), {{0, 1, 1.0 + delta}});
  const CompatibleSequence perturbed(nets, seq.inclusions());
  const auto report = check_compatibility(perturbed);
  EXPECT_FALSE(report.compatible);
  EXPECT_NEAR(report.deviation[0], delta, 1e-12);
  EXPECT_LE(report.deviation[1], 1e-12);
  const auto profile = energy_profile(perturbed, Function::LinSpaced(9, 0, 1));
  EXPECT_TRUE(profile.warning.has_value());
}

TEST(Sequences, RejectsInvalidInclusions) {
  const Network a = Network::unlabeled(2, {{0, 1, 1.0}});
  const Network b = Network::unlabeled(3, {{0, 1, 2.0}, {1, 2, 2.0}});
  EXPECT_THROW(CompatibleSequence({a, b}, {{0, 0}}), ValidationError);
  EXPECT_THROW(CompatibleSequence({a, b}, {{0, 3}}), ValidationError);
  EXPECT_THROW(CompatibleSequence({a, b}, {}), ValidationError);
  EXPECT_THROW(CompatibleSequence({a, b}, {{0}}), ValidationError);
  EXPECT_NO_THROW(CompatibleSequence({a, b}, {{0, 2}}));
}

TEST(Sequences, HandWrittenPathRefinementIsCompatible) {
  const Network a = Network::unlabeled(2, {{0, 1, 1.0}});
  const Network b = Network::unlabeled(3, {{0, 1, 2.0}, {1, 2, 2.0}});
  const CompatibleSequence seq({a, b}, {{0, 2}});
  EXPECT_TRUE(check_compatibility(seq).compatible);
  const Eigen::MatrixXd expected = oracle::gauss_seidel_trace(b, {0, 2});
  EXPECT_NEAR(expected(0, 1), -1.0, 1e-12);
}

TEST(Sequences, RestrictionFollowsComposedInclusions) {
  const auto seq = build_dyadic_interval(3);
  const Function f = Function::LinSpaced(9, 0, 8);
  EXPECT_EQ(seq.restrict_to(f, 1), Function(Eigen::Vector3d(0, 4, 8)));
  EXPECT_EQ(seq.embedding(0, 3), (std::vector<std::size_t>{0, 8}));
  EXPECT_THROW(seq.restrict_to(Function::Zero(4), 0), ValidationError);
}

TEST(Sequences, ProfilesAreMonotoneForRandomFunctions) {
  random::Engine rng(43);
  const auto dyadic = build_dyadic_interval(6);
  const auto gasket = build_sierpinski_gasket(4);
  for (int k = 0; k < 100; ++k) {
    const auto pd = energy_profile(dyadic, random::function(rng, dyadic.network(6).size()));
    EXPECT_FALSE(pd.warning);
    EXPECT_TRUE(pd.monotone());
    const auto pg = energy_profile(gasket, random::function(rng, gasket.network(4).size()));
    EXPECT_FALSE(pg.warning);
    EXPECT_TRUE(pg.monotone());
  }
}

TEST(Gasket, LevelZeroIsUnitTriangle) {
  const auto seq = build_sierpinski_gasket(0);
  EXPECT_EQ(seq.network(0).size(), 3u);
  const FormMatrix a = seq.form(0);
  EXPECT_NEAR(effective_resistance(a, 0, 1), 2.0 / 3.0, 1e-15);
}

TEST(Gasket, VertexAndEdgeCounts) {
  const auto seq = build_sierpinski_gasket(4);
  for (std::size_t m = 0; m <= 4; ++m) {
    const double p = std::pow(3.0, static_cast<double>(m));
    EXPECT_EQ(seq.network(m).size(), static_cast<std::size_t>(3 * (p + 1) / 2));
    EXPECT_EQ(seq.network(m).edges().size(), static_cast<std::size_t>(3 * p));
  }
  EXPECT_THROW(build_sierpinski_gasket(9), ValidationError);
  EXPECT_THROW(build_sierpinski_gasket(2, -1.0), ValidationError);
}

TEST(Gasket, LevelOneCompatibilityAgainstOracle) {
  const auto seq = build_sierpinski_gasket(1);
  const auto report = check_compatibility(seq);
  EXPECT_LE(report.deviation[0], 1e-12);
  const Eigen::MatrixXd expected = oracle::gauss_seidel_trace(seq.network(1), seq.inclusions()[0]);
  EXPECT_LE((expected - seq.form(0).matrix()).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Gasket, CompatibleThroughLevelFour) {
  const auto report = check_compatibility(build_sierpinski_gasket(4));
  EXPECT_TRUE(report.compatible);
  for (double d : report.deviation) EXPECT_LE(d, 1e-10);
}

TEST(Gasket, CornerResistanceRatioIsLevelIndependent) {
  const auto seq = build_sierpinski_gasket(5);
  std::vector<double> r;
  for (std::size_t m = 0; m <= 5; ++m) r.push_back(effective_resistance(seq.form(m), 0, 1));
  std::vector<double> ratio;
  for (std::size_t m = 0; m + 1 < r.size(); ++m) ratio.push_back(r[m + 1] / r[m]);
  for (double q : ratio) EXPECT_NEAR(q, ratio.front(), 1e-10);
  EXPECT_NEAR(r.back(), 2.0 / 3.0, 1e-10);
}

TEST(Gasket, WrongFactorIsIncompatible) {
  EXPECT_FALSE(check_compatibility(build_sierpinski_gasket(2, 1.6)).compatible);
  EXPECT_FALSE(check_compatibility(build_sierpinski_gasket(2, 2.0)).compatible);
}

TEST(Gasket, CalibrationRecoversFiveThirds) {
  EXPECT_NEAR(calibrate_gasket_factor(), 5.0 / 3.0, 1e-6);
}
