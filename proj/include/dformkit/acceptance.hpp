#pragma once

// The nine acceptance experiments, shared by the acceptance test binary and
// the `reproduce-all` command. Each returns a pass flag and a one-line
// summary of the worst observed deviation against its tolerance.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dformkit/beurling_deny.hpp"
#include "dformkit/energy_measure.hpp"
#include "dformkit/format.hpp"
#include "dformkit/forms.hpp"
#include "dformkit/gelfand.hpp"
#include "dformkit/markov.hpp"
#include "dformkit/random_forms.hpp"
#include "dformkit/sequences.hpp"
#include "dformkit/trace.hpp"

namespace dformkit::acceptance {

struct Config {
  bool quick = false;
  double gasket_factor = kGasketFactor;
  std::uint64_t seed = 20240601;
  unsigned threads = 0;
};

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
};

namespace detail {

/// Tracks the worst value of (observed / allowed) over many checks.
struct Worst {
  double ratio = 0.0;
  std::string where;
  std::size_t checks = 0;
  void record(double observed, double allowed, const std::string& label) {
    ++checks;
    const double r = allowed > 0.0 ? observed / allowed : (observed > 0.0 ? INFINITY : 0.0);
    if (!(r <= ratio) || std::isnan(r)) {
      ratio = std::isnan(r) ? INFINITY : r;
      where = label;
    }
  }
  bool ok() const { return ratio <= 1.0; }
  std::string summary() const {
    return std::to_string(checks) + " checks, worst deviation/tolerance " + format_double(ratio) +
           (where.empty() ? "" : " (" + where + ")");
  }
};

inline std::vector<std::size_t> prefix(const std::vector<std::size_t>& v, std::size_t k) {
  return {v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k)};
}

inline double max_abs(const Eigen::MatrixXd& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

inline Function sample_dyadic(const Network& net, const std::function<double(double)>& fn) {
  Function f(static_cast<Eigen::Index>(net.size()));
  for (std::size_t i = 0; i < net.size(); ++i) f[static_cast<Eigen::Index>(i)] = fn(std::stod(net.vertices()[i]));
  return f;
}

inline AlgebraSpec random_spec(random::Engine& rng, std::size_t n, bool separated) {
  std::vector<std::string> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = "x" + std::to_string(i);
  std::vector<Eigen::VectorXd> gens;
  const std::size_t k = random::integer(rng, 1, 3);
  for (std::size_t j = 0; j < k; ++j) {
    Eigen::VectorXd g(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < g.size(); ++i) {
      g[i] = separated && j == 0 ? static_cast<double>(i) : static_cast<double>(random::integer(rng, 0, 2));
    }
    gens.push_back(std::move(g));
  }
  return AlgebraSpec(std::move(labels), std::move(gens));
}

}  // namespace detail

/// Unit contraction never increases energy.
inline CriterionResult markov_contraction(const Config& cfg) {
  random::Engine rng(cfg.seed + 1);
  detail::Worst w;
  for (int t = 0; t < 1000; ++t) {
    const Network net = random::network(rng, {.min_vertices = 1, .max_vertices = 30, .connected = t % 4 != 0,
                                              .killing_probability = t % 2 ? 0.3 : 0.0});
    const FormMatrix a = assemble(net);
    const Function u = random::function(rng, net.size(), -1.5, 2.5);
    const double scale = a.scale() * std::max(1.0, u.cwiseAbs().maxCoeff() * u.cwiseAbs().maxCoeff());
    w.record(std::max(0.0, evaluate(a, unit_contraction(u)) - evaluate(a, u)), 1e-12 * scale, "form " + std::to_string(t));
  }
  return {1, "Markov contraction", w.ok(), w.summary()};
}

/// Trace of a trace equals the direct trace.
inline CriterionResult trace_tower(const Config& cfg) {
  random::Engine rng(cfg.seed + 2);
  detail::Worst w;
  for (int t = 0; t < 500; ++t) {
    const Network net = random::network(rng, {.min_vertices = 3, .max_vertices = 30, .killing_probability = t % 3 ? 0.0 : 0.3});
    const FormMatrix a = assemble(net);
    const auto perm = random::permutation(rng, net.size());
    const std::size_t k2 = random::integer(rng, 2, net.size());
    const std::size_t k1 = random::integer(rng, 1, k2 - 1);
    std::vector<std::size_t> positions(k1);
    std::iota(positions.begin(), positions.end(), std::size_t{0});
    const TraceResult outer = trace(a, detail::prefix(perm, k2));
    const TraceResult nested = trace(outer.traced, positions);
    const TraceResult direct = trace(a, detail::prefix(perm, k1));
    w.record(detail::max_abs(nested.traced.matrix() - direct.traced.matrix()), 1e-9 * a.scale(), "triple " + std::to_string(t));
  }
  return {2, "Trace tower", w.ok(), w.summary()};
}

/// Triangle inequality for R and the sup formula bound.
inline CriterionResult resistance_metric(const Config& cfg) {
  random::Engine rng(cfg.seed + 3);
  detail::Worst tri, sup;
  for (int t = 0; t < 200; ++t) {
    const Network net = random::network(rng, {.min_vertices = 2, .max_vertices = 30});
    const FormMatrix a = assemble(net);
    const Eigen::MatrixXd r = resistance_matrix(a);
    const double scale = std::max(detail::max_abs(r), 1e-300);
    const auto n = r.rows();
    double excess = 0.0;
    for (Eigen::Index x = 0; x < n; ++x) {
      for (Eigen::Index y = 0; y < n; ++y) {
        for (Eigen::Index z = 0; z < n; ++z) excess = std::max(excess, r(x, z) - r(x, y) - r(y, z));
      }
    }
    tri.record(excess, 1e-9 * scale, "network " + std::to_string(t));
    const int draws = 10000;
    double sup_excess = 0.0;
    for (int s = 0; s < draws; ++s) {
      const std::size_t x = random::integer(rng, 0, net.size() - 1);
      std::size_t y = random::integer(rng, 0, net.size() - 2);
      if (y >= x) ++y;
      const Function u = random::function(rng, net.size());
      sup_excess = std::max(sup_excess, sup_formula_value(a, x, y, u) - r(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y)));
    }
    sup.record(std::max(0.0, sup_excess), 1e-9 * scale, "network " + std::to_string(t));
  }
  return {3, "Resistance metric", tri.ok() && sup.ok(), "triangle: " + tri.summary() + "; sup formula: " + sup.summary()};
}

/// Compatibility of the dyadic and gasket sequences and energy monotonicity.
inline CriterionResult compatibility_monotonicity(const Config& cfg) {
  random::Engine rng(cfg.seed + 4);
  const std::size_t dyadic_levels = cfg.quick ? 10 : 12;
  const std::size_t gasket_levels = cfg.quick ? 5 : 6;
  bool ok = true;
  std::string detail;

  const auto dyadic = build_dyadic_interval(dyadic_levels);
  const auto dr = check_compatibility(dyadic, 1e-9);
  const double dmax = *std::max_element(dr.relative.begin(), dr.relative.end());
  ok = ok && dr.compatible;
  detail += "dyadic<=" + std::to_string(dyadic_levels) + " max rel dev " + format_double(dmax);

  const auto gasket = build_sierpinski_gasket(gasket_levels, cfg.gasket_factor);
  const auto gr = check_compatibility(gasket, 1e-9);
  const double gmax = *std::max_element(gr.relative.begin(), gr.relative.end());
  ok = ok && gr.compatible;
  detail += "; gasket<=" + std::to_string(gasket_levels) + " (factor " + format_double(cfg.gasket_factor) +
            ") max rel dev " + format_double(gmax);

  int nonmonotone = 0;
  for (int k = 0; k < 100; ++k) {
    if (!energy_profile(dyadic, random::function(rng, dyadic.network(dyadic_levels).size()), dr).monotone()) ++nonmonotone;
    if (!energy_profile(gasket, random::function(rng, gasket.network(gasket_levels).size()), gr).monotone()) ++nonmonotone;
  }
  ok = ok && nonmonotone == 0;
  detail += "; non-monotone profiles " + std::to_string(nonmonotone) + "/200";

  const auto level8 = build_dyadic_interval(8);
  const auto r8 = check_compatibility(level8);
  const auto linear = energy_profile(level8, detail::sample_dyadic(level8.network(8), [](double x) { return x; }), r8);
  double lin_dev = 0.0;
  for (double e : linear.energies) lin_dev = std::max(lin_dev, std::abs(e - 1.0));
  const auto square = energy_profile(level8, detail::sample_dyadic(level8.network(8), [](double x) { return x * x; }), r8);
  const double sq_dev = std::abs(square.energies.back() - 4.0 / 3.0);
  ok = ok && lin_dev <= 1e-12 && sq_dev <= 1e-2;
  detail += "; f=x max |E_n-1| " + format_double(lin_dev) + "; f=x^2 |E_8-4/3| " + format_double(sq_dev);
  return {4, "Compatibility and monotonicity", ok, detail};
}

/// Exact roundtrip and the bilinear identity of the jump/killing split.
inline CriterionResult beurling_deny_roundtrip(const Config& cfg) {
  random::Engine rng(cfg.seed + 5);
  int mismatches = 0;
  detail::Worst w;
  for (int t = 0; t < 500; ++t) {
    const Network net = random::network(rng, {.min_vertices = 1, .max_vertices = 30, .connected = t % 5 != 0,
                                              .killing_probability = 0.4});
    const FormMatrix a = assemble(net);
    const auto d = decompose(a);
    if (!(recompose(d) == a)) ++mismatches;
    for (int k = 0; k < 100; ++k) {
      const Function f = random::function(rng, net.size());
      const Function g = random::function(rng, net.size());
      const double scale = a.scale() * std::max(1.0, f.cwiseAbs().maxCoeff() * g.cwiseAbs().maxCoeff());
      w.record(std::abs(jump_killing_energy(d, f, g) - evaluate(a, f, g)), 1e-12 * scale, "matrix " + std::to_string(t));
    }
  }
  return {5, "Beurling-Deny roundtrip and uniqueness", mismatches == 0 && w.ok(),
          "roundtrip mismatches " + std::to_string(mismatches) + "/500; bilinear identity: " + w.summary()};
}

/// Defining identity, total mass and pushforward consistency of energy measures.
inline CriterionResult energy_measure_identities(const Config& cfg) {
  random::Engine rng(cfg.seed + 6);
  detail::Worst identity, total, push;
  int errors = 0;
  for (int t = 0; t < 500; ++t) {
    const Network net = random::network(rng, {.min_vertices = 1, .max_vertices = 30, .killing_probability = 0.4});
    const FormMatrix a = assemble(net);
    const Function f = random::function(rng, net.size(), -2.0, 2.0);
    const double scale = dformkit::detail::energy_scale(a, f);
    try {
      const EnergyMeasure g = energy_measure(a, f);
      identity.record(g.identity_gap, 1e-12 * scale, "form " + std::to_string(t));
      double killing = 0.0;
      for (Eigen::Index x = 0; x < f.size(); ++x) killing += net.killing()[x] * f[x] * f[x];
      total.record(std::abs(g.total - (evaluate(a, f) - 0.5 * killing)), 1e-12 * scale, "form " + std::to_string(t));
    } catch (const Error&) {
      ++errors;
    }
  }
  for (int t = 0; t < 100; ++t) {
    const Network net = random::network(rng, {.min_vertices = 2, .max_vertices = 30, .killing_probability = 0.3});
    const FormMatrix a = assemble(net);
    const auto emb = embed(detail::random_spec(rng, net.size(), false));
    const Function fhat = random::function(rng, emb.class_count(), -2.0, 2.0);
    const Function f = from_classes(fhat, emb);
    const double scale = dformkit::detail::energy_scale(a, f);
    try {
      const auto lhs = pushforward_gamma(energy_measure(a, f), emb);
      const auto rhs = energy_measure(transfer_form(a, emb), fhat);
      push.record(detail::max_abs(lhs.masses - rhs.masses), 1e-12 * scale, "quotient " + std::to_string(t));
    } catch (const Error&) {
      ++errors;
    }
  }
  const bool ok = errors == 0 && identity.ok() && total.ok() && push.ok();
  return {6, "Energy-measure identities", ok,
          "identity: " + identity.summary() + "; total mass: " + total.summary() + "; pushforward: " + push.summary() +
              (errors ? "; errors " + std::to_string(errors) : "")};
}

/// Energy stays 1 while the energy measure of {0, 1/2, 1} halves per level.
inline CriterionResult counterexample(const Config&) {
  const auto rows = counterexample_demo(4, 12, {0.0, 0.5, 1.0});
  double energy_dev = 0.0, ratio_dev = 0.0;
  for (const auto& r : rows) {
    energy_dev = std::max(energy_dev, std::abs(r.energy - 1.0));
    if (!std::isnan(r.ratio)) ratio_dev = std::max(ratio_dev, std::abs(r.ratio - 0.5));
  }
  const bool ok = rows.size() == 9 && energy_dev <= 1e-12 && ratio_dev <= 1e-6;
  return {7, "Counterexample reproduction", ok,
          "levels 4-12: max |E_n-1| " + format_double(energy_dev) + ", max |ratio-0.5| " + format_double(ratio_dev) +
              ", Gamma_12(S) " + format_double(rows.back().gamma_set)};
}

/// Exact mass preservation, L2 isometry, and the truncated geometric measure.
inline CriterionResult isometry_injection(const Config& cfg) {
  random::Engine rng(cfg.seed + 8);
  int mass_errors = 0;
  detail::Worst iso;
  for (int t = 0; t < 100; ++t) {
    const bool separated = t % 2 == 0;
    const std::size_t n = random::integer(rng, 1, 50);
    const auto emb = embed(detail::random_spec(rng, n, separated));
    Eigen::VectorXd w(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = std::pow(10.0, random::uniform(rng, -6, 6));
    const AtomicMeasure mu(w);
    if (!(pushforward(mu, emb).total == mu.total())) ++mass_errors;
    const Function f = from_classes(random::function(rng, emb.class_count(), -3.0, 3.0), emb);
    const auto r = l2_isometry_check(f, mu, emb);
    iso.record(r.difference, 1e-12 * std::max(1.0, r.lhs), (separated ? "separated " : "quotient ") + std::to_string(t));
  }
  // Truncated geometric measure on the first 20 rationals of [0,1].
  std::vector<double> q;
  for (int d = 1; q.size() < 20; ++d) {
    for (int p = 0; p <= d && q.size() < 20; ++p) {
      if (std::gcd(p, d) == 1) q.push_back(static_cast<double>(p) / d);
    }
  }
  Eigen::VectorXd g(20), w(20);
  std::vector<std::string> labels(20);
  for (int k = 0; k < 20; ++k) {
    g[k] = q[static_cast<std::size_t>(k)];
    w[k] = std::ldexp(1.0, -(k + 1));
    labels[static_cast<std::size_t>(k)] = "q" + std::to_string(k + 1);
  }
  const auto emb = embed(AlgebraSpec(labels, {g}));
  const double total = pushforward(AtomicMeasure(w), emb).total;
  const bool geometric = emb.separated && total == 1.0 - std::ldexp(1.0, -20);
  return {8, "L2 isometry and measure injection", mass_errors == 0 && iso.ok() && geometric,
          "mass mismatches " + std::to_string(mass_errors) + "/100; isometry: " + iso.summary() +
              "; truncated geometric mass " + format_double(total)};
}

/// Hitting probabilities and commute times on path-3, triangle and gasket level 2.
inline CriterionResult process_identities(const Config& cfg) {
  const std::size_t n_traj = cfg.quick ? 10'000 : 100'000;
  // Relative commute tolerance scales like 1/sqrt(n) below the full count.
  const double commute_tol = 0.05 * std::sqrt(100'000.0 / static_cast<double>(n_traj));
  SimOptions opt;
  opt.seed = cfg.seed + 9;
  opt.n_trajectories = n_traj;
  opt.threads = cfg.threads;

  struct Case {
    std::string name;
    Network net;
    std::size_t a, b, x0;
  };
  const std::vector<Case> cases{
      {"path-3", Network::unlabeled(3, {{0, 1, 1.0}, {1, 2, 1.0}}), 0, 2, 1},
      {"triangle", Network::unlabeled(3, {{0, 1, 1.0}, {1, 2, 1.0}, {0, 2, 1.0}}), 0, 1, 2},
      {"gasket-2", build_sierpinski_gasket(2).network(2), 0, 1, 3},
  };
  detail::Worst hit, commute;
  bool deterministic = true;
  for (const auto& c : cases) {
    const FormMatrix a = assemble(c.net);
    const AtomicMeasure mu(Eigen::VectorXd::Ones(static_cast<Eigen::Index>(c.net.size())));
    const GeneratorSpec g = build_generator(a, mu);
    const Function u = harmonic_extension(trace(a, {c.a, c.b}), Eigen::Vector2d(1, 0));
    const Estimate h = hitting_probability(g, c.a, c.b, c.x0, opt);
    hit.record(std::abs(h.value - u[static_cast<Eigen::Index>(c.x0)]), 4.0 * h.se, c.name);
    const double expected = effective_resistance(a, c.a, c.b) * mu.total();
    const Estimate ct = commute_time(g, c.a, c.b, opt);
    commute.record(std::abs(ct.value - expected), commute_tol * expected, c.name);

    SimOptions single = opt, multi = opt;
    single.threads = 1;
    multi.threads = 4;
    single.n_trajectories = multi.n_trajectories = std::min<std::size_t>(n_traj, 20'000);
    deterministic = deterministic && hitting_probability(g, c.a, c.b, c.x0, single) == hitting_probability(g, c.a, c.b, c.x0, multi) &&
                    commute_time(g, c.a, c.b, single) == commute_time(g, c.a, c.b, multi) &&
                    simulate(g, c.x0, 5.0, single) == simulate(g, c.x0, 5.0, multi);
  }
  return {9, "Process identities", hit.ok() && commute.ok() && deterministic,
          std::to_string(n_traj) + " trajectories; hitting (4 SE): " + hit.summary() + "; commute (" +
              format_double(100.0 * commute_tol) + "%): " + commute.summary() +
              "; thread determinism " + (deterministic ? "bit-identical" : "MISMATCH")};
}

inline std::vector<std::function<CriterionResult(const Config&)>> criteria() {
  return {markov_contraction,       trace_tower,     resistance_metric,  compatibility_monotonicity,
          beurling_deny_roundtrip,  energy_measure_identities, counterexample, isometry_injection,
          process_identities};
}

/// Runs every criterion; exceptions are reported as failures of that criterion.
inline std::vector<CriterionResult> run_all(const Config& cfg,
                                            const std::function<void(const CriterionResult&)>& on_result = {}) {
  std::vector<CriterionResult> out;
  int id = 0;
  for (const auto& fn : criteria()) {
    ++id;
    CriterionResult r;
    try {
      r = fn(cfg);
    } catch (const std::exception& e) {
      r = {id, "criterion " + std::to_string(id), false, std::string("exception: ") + e.what()};
    }
    if (on_result) on_result(r);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace dformkit::acceptance
