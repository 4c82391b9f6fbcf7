#pragma once

// The mu-symmetric continuous-time Markov chain of a finite Dirichlet form:
// jump rates q(x,y) = c(x,y)/mu(x), killing rates kappa(x)/mu(x), and an
// explicit cemetery state. Every trajectory draws from its own counter-based
// stream, and estimators sum per-trajectory values pairwise in index order,
// so results are a pure function of (generator, query, seed, n) regardless
// of the thread count.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "dformkit/beurling_deny.hpp"
#include "dformkit/errors.hpp"
#include "dformkit/forms.hpp"
#include "dformkit/numerics.hpp"
#include "dformkit/rng.hpp"

namespace dformkit {

struct GeneratorSpec {
  Eigen::MatrixXd conductance;  ///< symmetric c(x,y), zero diagonal
  Eigen::VectorXd mu;
  Eigen::MatrixXd rates;        ///< q(x,y) = c(x,y)/mu(x)
  Eigen::VectorXd killing;      ///< k(x) = kappa(x)/mu(x)
  Eigen::VectorXd holding;      ///< lambda(x) = sum_y q(x,y) + k(x)

  /// Per vertex: targets and cumulative probabilities; target == size() is the cemetery.
  std::vector<std::vector<std::size_t>> targets;
  std::vector<std::vector<double>> cumulative;

  std::size_t size() const noexcept { return static_cast<std::size_t>(mu.size()); }
  std::size_t cemetery() const noexcept { return size(); }
  bool conservative() const { return (killing.array() == 0.0).all(); }
};

inline GeneratorSpec build_generator(const FormMatrix& a, const AtomicMeasure& mu) {
  if (mu.size() != a.size()) {
    throw ValidationError("measure has " + std::to_string(mu.size()) + " atoms but the form acts on " +
                          std::to_string(a.size()) + " vertices");
  }
  for (std::size_t x = 0; x < mu.size(); ++x) {
    if (!(mu[x] > 0.0)) {
      throw ValidationError("vertex " + std::to_string(x) +
                                " has zero mass; the process needs every point to have positive measure",
                            "zero_mass");
    }
  }
  const JumpKillingDecomposition d = decompose(a);
  const auto n = static_cast<Eigen::Index>(a.size());
  GeneratorSpec g;
  g.conductance = 2.0 * d.jump;
  g.mu = mu.weights();
  g.rates = Eigen::MatrixXd::Zero(n, n);
  g.killing = Eigen::VectorXd::Zero(n);
  g.holding = Eigen::VectorXd::Zero(n);
  g.targets.resize(static_cast<std::size_t>(n));
  g.cumulative.resize(static_cast<std::size_t>(n));
  for (Eigen::Index x = 0; x < n; ++x) {
    double total = 0.0;
    for (Eigen::Index y = 0; y < n; ++y) {
      if (y == x || g.conductance(x, y) == 0.0) continue;
      g.rates(x, y) = g.conductance(x, y) / g.mu[x];
      total += g.rates(x, y);
    }
    g.killing[x] = d.kappa[x] / g.mu[x];
    total += g.killing[x];
    g.holding[x] = total;
    if (total == 0.0) continue;
    auto& tg = g.targets[static_cast<std::size_t>(x)];
    auto& cu = g.cumulative[static_cast<std::size_t>(x)];
    double acc = 0.0;
    for (Eigen::Index y = 0; y < n; ++y) {
      if (g.rates(x, y) == 0.0) continue;
      acc += g.rates(x, y);
      tg.push_back(static_cast<std::size_t>(y));
      cu.push_back(acc / total);
    }
    if (g.killing[x] > 0.0) {
      tg.push_back(g.cemetery());
      cu.push_back(1.0);
    }
    cu.back() = 1.0;
  }
  return g;
}

/// max over pairs of |mu(x) q(x,y) - mu(y) q(y,x)| / c(x,y). Zero in exact
/// arithmetic; a few ulps in floating point.
inline double detailed_balance_defect(const GeneratorSpec& g) {
  double worst = 0.0;
  const auto n = static_cast<Eigen::Index>(g.size());
  for (Eigen::Index x = 0; x < n; ++x) {
    for (Eigen::Index y = x + 1; y < n; ++y) {
      const double c = g.conductance(x, y);
      if (c == 0.0) continue;
      worst = std::max(worst, std::abs(g.mu[x] * g.rates(x, y) - g.mu[y] * g.rates(y, x)) / c);
    }
  }
  return worst;
}

struct Estimate {
  double value = 0.0;
  double se = 0.0;  ///< sample standard deviation / sqrt(n)

  friend bool operator==(const Estimate&, const Estimate&) = default;
};

struct SimResult {
  std::size_t n_trajectories = 0;
  std::vector<Estimate> occupation;  ///< fraction of [0, horizon] spent at each vertex
  Estimate killed;                   ///< fraction of trajectories absorbed in the cemetery

  friend bool operator==(const SimResult&, const SimResult&) = default;
};

struct OccupationReport {
  double distance = 0.0;  ///< L1 distance of mean occupation from mu / mu(V)
  double band = 0.0;      ///< 3 * sum of per-vertex standard errors
  std::vector<Estimate> occupation;
  Eigen::VectorXd target;
};

struct SimOptions {
  std::uint64_t seed = 1;
  std::size_t n_trajectories = 1000;
  unsigned threads = 0;  ///< 0 picks the hardware concurrency
  std::uint64_t max_jumps = 100'000'000;
};

namespace detail {

// Stream ids: query tag in the top byte, trajectory index below.
enum class StreamTag : std::uint64_t { Simulate = 1, Hit = 2, CommuteForward = 3, CommuteBackward = 4, Occupy = 5 };

inline std::uint64_t stream_id(StreamTag tag, std::size_t i) {
  return (static_cast<std::uint64_t>(tag) << 56) | static_cast<std::uint64_t>(i);
}

template <class Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
  unsigned t = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
  t = static_cast<unsigned>(std::min<std::size_t>(t, std::max<std::size_t>(count, 1)));
  if (t <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(t);
  for (unsigned w = 0; w < t; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < count; i += t) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

inline Estimate summarize(std::span<const double> values) {
  Estimate e;
  const auto n = values.size();
  if (n == 0) return e;
  e.value = pairwise_sum(values) / static_cast<double>(n);
  if (n > 1) {
    std::vector<double> sq(n);
    for (std::size_t i = 0; i < n; ++i) sq[i] = (values[i] - e.value) * (values[i] - e.value);
    e.se = std::sqrt(pairwise_sum(sq) / static_cast<double>(n - 1) / static_cast<double>(n));
  }
  return e;
}

inline std::size_t next_state(const GeneratorSpec& g, std::size_t x, double u) {
  const auto& cu = g.cumulative[x];
  const auto it = std::lower_bound(cu.begin(), cu.end(), u);
  const auto k = static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - cu.begin(), static_cast<std::ptrdiff_t>(cu.size()) - 1));
  return g.targets[x][k];
}

inline double holding_time(const GeneratorSpec& g, std::size_t x, CounterRng& rng) {
  return -std::log(rng.uniform()) / g.holding[static_cast<Eigen::Index>(x)];
}

inline void require_vertex(const GeneratorSpec& g, std::size_t x, const char* what) {
  if (x >= g.size()) {
    throw ValidationError(std::string(what) + " vertex " + std::to_string(x) + " is out of range", "invalid_vertex");
  }
}

inline void require_conservative(const GeneratorSpec& g, const char* query) {
  if (!g.conservative()) {
    throw ValidationError(std::string(query) + " requires a generator without killing", "unsupported_regime");
  }
}

inline std::vector<std::size_t> components(const GeneratorSpec& g) {
  return connected_components(FormMatrix(-g.conductance));
}

}  // namespace detail

/// Runs n trajectories from x0 up to `horizon`; killing moves a trajectory to
/// the cemetery, where it stays.
inline SimResult simulate(const GeneratorSpec& g, std::size_t x0, double horizon, const SimOptions& opt) {
  detail::require_vertex(g, x0, "start");
  if (!(horizon > 0.0)) throw ValidationError("horizon must be positive");
  if (opt.n_trajectories < 1) throw ValidationError("need at least one trajectory");
  const std::size_t n = g.size();
  const std::size_t count = opt.n_trajectories;
  std::vector<double> occupancy(count * n, 0.0);
  std::vector<double> killed(count, 0.0);
  detail::parallel_for(count, opt.threads, [&](std::size_t i) {
    CounterRng rng(opt.seed, detail::stream_id(detail::StreamTag::Simulate, i));
    std::size_t x = x0;
    double t = 0.0;
    double* occ = occupancy.data() + i * n;
    for (std::uint64_t jumps = 0;; ++jumps) {
      if (g.holding[static_cast<Eigen::Index>(x)] == 0.0) {
        occ[x] += horizon - t;
        break;
      }
      const double dt = detail::holding_time(g, x, rng);
      if (t + dt >= horizon) {
        occ[x] += horizon - t;
        break;
      }
      occ[x] += dt;
      t += dt;
      x = detail::next_state(g, x, rng.uniform());
      if (x == g.cemetery()) {
        killed[i] = 1.0;
        break;
      }
      if (jumps >= opt.max_jumps) throw NumericalError("jump_limit", "trajectory exceeded the jump limit");
    }
    for (std::size_t v = 0; v < n; ++v) occ[v] /= horizon;
  });
  SimResult r;
  r.n_trajectories = count;
  std::vector<double> column(count);
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t i = 0; i < count; ++i) column[i] = occupancy[i * n + v];
    r.occupation.push_back(detail::summarize(column));
  }
  r.killed = detail::summarize(killed);
  return r;
}

/// P_{x0}(hit a before b), estimated from the embedded jump chain.
inline Estimate hitting_probability(const GeneratorSpec& g, std::size_t a, std::size_t b, std::size_t x0,
                                    const SimOptions& opt) {
  detail::require_vertex(g, a, "target");
  detail::require_vertex(g, b, "target");
  detail::require_vertex(g, x0, "start");
  if (a == b) throw ValidationError("hitting targets must differ");
  detail::require_conservative(g, "hitting probability");
  if (x0 == a) return {1.0, 0.0};
  if (x0 == b) return {0.0, 0.0};
  const auto comp = detail::components(g);
  if (comp[x0] != comp[a] && comp[x0] != comp[b]) {
    throw ValidationError("neither target is reachable from vertex " + std::to_string(x0), "unreachable");
  }
  std::vector<double> hits(opt.n_trajectories, 0.0);
  detail::parallel_for(opt.n_trajectories, opt.threads, [&](std::size_t i) {
    CounterRng rng(opt.seed, detail::stream_id(detail::StreamTag::Hit, i));
    std::size_t x = x0;
    for (std::uint64_t jumps = 0; x != a && x != b; ++jumps) {
      if (jumps >= opt.max_jumps) throw NumericalError("jump_limit", "trajectory exceeded the jump limit");
      x = detail::next_state(g, x, rng.uniform());
    }
    hits[i] = x == a ? 1.0 : 0.0;
  });
  return detail::summarize(hits);
}

namespace detail {

inline std::vector<double> hitting_times(const GeneratorSpec& g, std::size_t from, std::size_t to,
                                         StreamTag tag, const SimOptions& opt) {
  std::vector<double> times(opt.n_trajectories, 0.0);
  parallel_for(opt.n_trajectories, opt.threads, [&](std::size_t i) {
    CounterRng rng(opt.seed, stream_id(tag, i));
    std::size_t x = from;
    double t = 0.0;
    for (std::uint64_t jumps = 0; x != to; ++jumps) {
      if (jumps >= opt.max_jumps) throw NumericalError("jump_limit", "trajectory exceeded the jump limit");
      t += holding_time(g, x, rng);
      x = next_state(g, x, rng.uniform());
    }
    times[i] = t;
  });
  return times;
}

}  // namespace detail

/// E_x T_y + E_y T_x for the continuous-time chain; equals R(x,y) mu(V).
inline Estimate commute_time(const GeneratorSpec& g, std::size_t x, std::size_t y, const SimOptions& opt) {
  detail::require_vertex(g, x, "commute");
  detail::require_vertex(g, y, "commute");
  detail::require_conservative(g, "commute time");
  if (x == y) return {0.0, 0.0};
  const auto comp = detail::components(g);
  if (comp[x] != comp[y]) {
    throw ValidationError("vertices " + std::to_string(x) + " and " + std::to_string(y) + " are not connected",
                          "unreachable");
  }
  const auto forward = detail::hitting_times(g, x, y, detail::StreamTag::CommuteForward, opt);
  const auto backward = detail::hitting_times(g, y, x, detail::StreamTag::CommuteBackward, opt);
  const Estimate f = detail::summarize(forward);
  const Estimate b = detail::summarize(backward);
  return {f.value + b.value, std::sqrt(f.se * f.se + b.se * b.se)};
}

/// Occupation over [0, horizon] from a mu-distributed start, compared with
/// the stationary law mu / mu(V).
inline OccupationReport occupation_check(const GeneratorSpec& g, double horizon, const SimOptions& opt) {
  detail::require_conservative(g, "occupation check");
  if (!(horizon > 0.0)) throw ValidationError("horizon must be positive");
  const auto comp = detail::components(g);
  const std::size_t ncomp = component_count(comp);
  if (ncomp > 1) {
    std::string report = "chain is reducible with " + std::to_string(ncomp) + " components:";
    for (std::size_t c = 0; c < ncomp; ++c) {
      report += " {";
      bool first = true;
      for (std::size_t v = 0; v < comp.size(); ++v) {
        if (comp[v] != c) continue;
        report += (first ? "" : ",") + std::to_string(v);
        first = false;
      }
      report += "}";
    }
    throw ValidationError(report, "reducible");
  }
  const std::size_t n = g.size();
  const double mass = exact_sum(std::span<const double>(g.mu.data(), n));
  std::vector<double> start_cdf(n);
  double acc = 0.0;
  for (std::size_t v = 0; v < n; ++v) {
    acc += g.mu[static_cast<Eigen::Index>(v)];
    start_cdf[v] = acc / mass;
  }
  start_cdf.back() = 1.0;

  const std::size_t count = opt.n_trajectories;
  std::vector<double> occupancy(count * n, 0.0);
  detail::parallel_for(count, opt.threads, [&](std::size_t i) {
    CounterRng rng(opt.seed, detail::stream_id(detail::StreamTag::Occupy, i));
    std::size_t x = static_cast<std::size_t>(std::lower_bound(start_cdf.begin(), start_cdf.end(), rng.uniform()) -
                                             start_cdf.begin());
    double t = 0.0;
    double* occ = occupancy.data() + i * n;
    for (std::uint64_t jumps = 0;; ++jumps) {
      if (g.holding[static_cast<Eigen::Index>(x)] == 0.0) {
        occ[x] += horizon - t;
        break;
      }
      const double dt = detail::holding_time(g, x, rng);
      if (t + dt >= horizon) {
        occ[x] += horizon - t;
        break;
      }
      occ[x] += dt;
      t += dt;
      x = detail::next_state(g, x, rng.uniform());
      if (jumps >= opt.max_jumps) throw NumericalError("jump_limit", "trajectory exceeded the jump limit");
    }
    for (std::size_t v = 0; v < n; ++v) occ[v] /= horizon;
  });
  OccupationReport r;
  r.target = g.mu / mass;
  std::vector<double> column(count);
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t i = 0; i < count; ++i) column[i] = occupancy[i * n + v];
    const Estimate e = detail::summarize(column);
    r.occupation.push_back(e);
    r.distance += std::abs(e.value - r.target[static_cast<Eigen::Index>(v)]);
    r.band += 3.0 * e.se;
  }
  return r;
}

}  // namespace dformkit
