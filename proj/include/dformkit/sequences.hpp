#pragma once

// Increasing sequences of finite resistance forms linked by the trace
// relation, their energy profiles, and the two standard builders.

#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dformkit/errors.hpp"
#include "dformkit/format.hpp"
#include "dformkit/forms.hpp"
#include "dformkit/trace.hpp"

namespace dformkit {

/// Standard energy renormalization of the Sierpinski gasket.
inline constexpr double kGasketFactor = 5.0 / 3.0;
inline constexpr double kCompatibilityTolerance = 1e-9;

/// Levels V_0 ⊂ V_1 ⊂ ... with inclusion maps. inclusions[n][i] is the index in
/// level n+1 of vertex i of level n. Compatibility is checked, never assumed.
class CompatibleSequence {
 public:
  CompatibleSequence(std::vector<Network> levels, std::vector<std::vector<std::size_t>> inclusions)
      : networks_(std::move(levels)), inclusions_(std::move(inclusions)) {
    if (networks_.empty()) throw ValidationError("sequence has no levels");
    if (inclusions_.size() + 1 != networks_.size()) {
      throw ValidationError("sequence with " + std::to_string(networks_.size()) + " levels needs " +
                                std::to_string(networks_.size() - 1) + " inclusion maps, got " +
                                std::to_string(inclusions_.size()),
                            "invalid_inclusion");
    }
    for (std::size_t n = 0; n < inclusions_.size(); ++n) {
      const auto& map = inclusions_[n];
      if (map.size() != networks_[n].size()) {
        throw ValidationError("inclusion " + std::to_string(n) + " has " + std::to_string(map.size()) +
                                  " entries for a level of " + std::to_string(networks_[n].size()) + " vertices",
                              "invalid_inclusion");
      }
      std::vector<bool> hit(networks_[n + 1].size(), false);
      for (std::size_t i = 0; i < map.size(); ++i) {
        if (map[i] >= hit.size()) {
          throw ValidationError("inclusion " + std::to_string(n) + " maps vertex " + std::to_string(i) +
                                    " out of range",
                                "invalid_inclusion");
        }
        if (hit[map[i]]) {
          throw ValidationError("inclusion " + std::to_string(n) + " is not injective at target " +
                                    std::to_string(map[i]),
                                "invalid_inclusion");
        }
        hit[map[i]] = true;
      }
    }
  }

  std::size_t level_count() const noexcept { return networks_.size(); }
  std::size_t top_level() const noexcept { return networks_.size() - 1; }
  const std::vector<Network>& networks() const noexcept { return networks_; }
  const Network& network(std::size_t n) const { return networks_.at(n); }
  /// Dense form of level n, assembled on demand.
  FormMatrix form(std::size_t n) const { return assemble(networks_.at(n)); }
  const std::vector<std::vector<std::size_t>>& inclusions() const noexcept { return inclusions_; }

  /// Index in level `to` of each vertex of level `from` (from <= to).
  std::vector<std::size_t> embedding(std::size_t from, std::size_t to) const {
    if (from > to || to >= networks_.size()) throw ValidationError("invalid level range for embedding");
    std::vector<std::size_t> idx(networks_[from].size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    for (std::size_t n = from; n < to; ++n) {
      for (auto& v : idx) v = inclusions_[n][v];
    }
    return idx;
  }

  /// Pointwise restriction of a top-level function to level n.
  Function restrict_to(const Function& f, std::size_t n) const {
    if (static_cast<std::size_t>(f.size()) != networks_.back().size()) {
      throw ValidationError("function has length " + std::to_string(f.size()) + " but the top level has " +
                            std::to_string(networks_.back().size()) + " vertices");
    }
    const auto idx = embedding(n, top_level());
    Function out(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) out[static_cast<Eigen::Index>(i)] = f[static_cast<Eigen::Index>(idx[i])];
    return out;
  }

 private:
  std::vector<Network> networks_;
  std::vector<std::vector<std::size_t>> inclusions_;
};

struct CompatibilityReport {
  std::vector<double> deviation;  ///< max |Trace(A_{n+1}) - A_n| for n = 0..N-1
  std::vector<double> relative;   ///< deviation / max |A_n|
  double tolerance = kCompatibilityTolerance;
  bool compatible = true;
};

inline CompatibilityReport check_compatibility(const CompatibleSequence& seq, double tol = kCompatibilityTolerance) {
  CompatibilityReport report;
  report.tolerance = tol;
  for (std::size_t n = 0; n + 1 < seq.level_count(); ++n) {
    const FormMatrix coarse = seq.form(n);
    const TraceResult tr = trace(seq.form(n + 1), seq.inclusions()[n]);
    const double dev = (tr.traced.matrix() - coarse.matrix()).cwiseAbs().maxCoeff();
    const double rel = dev / coarse.scale();
    report.deviation.push_back(dev);
    report.relative.push_back(rel);
    if (!(rel <= tol)) report.compatible = false;
  }
  return report;
}

struct EnergyProfile {
  std::vector<double> energies;  ///< E_{V_n}(f|V_n, f|V_n), n = 0..N
  std::optional<std::string> warning;

  /// Non-decreasing up to `tol` times the largest energy.
  bool monotone(double tol = 1e-12) const {
    double top = 0.0;
    for (double e : energies) top = std::max(top, std::abs(e));
    const double slack = tol * std::max(top, 1.0);
    for (std::size_t i = 1; i < energies.size(); ++i) {
      if (energies[i] < energies[i - 1] - slack) return false;
    }
    return true;
  }
};

/// Profile against a compatibility report computed once for the sequence.
inline EnergyProfile energy_profile(const CompatibleSequence& seq, const Function& f,
                                    const CompatibilityReport& report) {
  EnergyProfile profile;
  for (std::size_t n = 0; n < seq.level_count(); ++n) {
    const Function fn = seq.restrict_to(f, n);
    profile.energies.push_back(network_energy(seq.network(n), fn));
  }
  if (!report.compatible) {
    profile.warning = "sequence is not compatible at tolerance " + format_double(report.tolerance) +
                      "; the profile need not be monotone";
  }
  return profile;
}

inline EnergyProfile energy_profile(const CompatibleSequence& seq, const Function& f) {
  return energy_profile(seq, f, check_compatibility(seq));
}

struct LimitEstimate {
  double estimate = 0.0;
  double last_increment = 0.0;
};

/// Top-level energy and final increment of the monotone profile.
inline LimitEstimate limit_energy_estimate(const CompatibleSequence& seq, const Function& f) {
  if (seq.level_count() < 3) throw ValidationError("limit estimate needs at least 3 levels");
  LimitEstimate out;
  std::vector<double> energies;
  for (std::size_t n = 0; n < seq.level_count(); ++n) {
    energies.push_back(network_energy(seq.network(n), seq.restrict_to(f, n)));
  }
  out.estimate = energies.back();
  out.last_increment = energies.back() - energies[energies.size() - 2];
  return out;
}

/// Level n of the dyadic interval: vertices k 2^-n, 0 <= k <= 2^n, with
/// neighbor conductances 2^n and no killing.
inline Network dyadic_interval_level(std::size_t n) {
  if (n > 20) throw ValidationError("dyadic interval builder accepts at most 20 levels");
  const std::size_t segments = std::size_t{1} << n;
  const double c = std::ldexp(1.0, static_cast<int>(n));
  std::vector<std::string> labels(segments + 1);
  std::vector<Edge> edges;
  edges.reserve(segments);
  for (std::size_t k = 0; k <= segments; ++k) {
    labels[k] = format_double(std::ldexp(static_cast<double>(k), -static_cast<int>(n)));
    if (k < segments) edges.push_back({k, k + 1, c});
  }
  return Network(std::move(labels), std::move(edges));
}

/// Dyadic interval levels 0..levels; vertex k of level n maps to 2k.
inline CompatibleSequence build_dyadic_interval(std::size_t levels) {
  if (levels > 20) throw ValidationError("dyadic interval builder accepts at most 20 levels");
  std::vector<Network> nets;
  std::vector<std::vector<std::size_t>> incl;
  for (std::size_t n = 0; n <= levels; ++n) {
    nets.push_back(dyadic_interval_level(n));
    if (n > 0) {
      std::vector<std::size_t> map((std::size_t{1} << (n - 1)) + 1);
      for (std::size_t k = 0; k < map.size(); ++k) map[k] = 2 * k;
      incl.push_back(std::move(map));
    }
  }
  return CompatibleSequence(std::move(nets), std::move(incl));
}

/// Sierpinski gasket approximations, levels 0..levels. Level 0 is the unit
/// triangle; level m has 3^m cells whose edges carry conductance factor^m.
/// Vertices of level m-1 come first in level m, so every inclusion is a prefix map.
inline CompatibleSequence build_sierpinski_gasket(std::size_t levels, double factor = kGasketFactor) {
  if (levels > 8) throw ValidationError("gasket builder accepts at most 8 levels");
  if (!(factor > 0.0) || !std::isfinite(factor)) throw ValidationError("gasket factor must be positive");
  using Point = std::pair<long, long>;  // triangular lattice coordinates at scale 2^levels
  const long side = 1L << levels;
  std::map<Point, std::size_t> index;
  std::vector<Point> order;
  auto lookup = [&](const Point& p) {
    auto [it, inserted] = index.emplace(p, order.size());
    if (inserted) order.push_back(p);
    return it->second;
  };
  using Cell = std::array<Point, 3>;
  std::vector<Cell> cells{Cell{Point{0, 0}, Point{side, 0}, Point{0, side}}};

  std::vector<Network> nets;
  std::vector<std::vector<std::size_t>> incl;
  for (std::size_t m = 0; m <= levels; ++m) {
    if (m > 0) {
      std::vector<Cell> next;
      next.reserve(cells.size() * 3);
      auto mid = [](const Point& a, const Point& b) { return Point{(a.first + b.first) / 2, (a.second + b.second) / 2}; };
      for (const Cell& c : cells) {
        const Point m01 = mid(c[0], c[1]), m02 = mid(c[0], c[2]), m12 = mid(c[1], c[2]);
        next.push_back({c[0], m01, m02});
        next.push_back({m01, c[1], m12});
        next.push_back({m02, m12, c[2]});
      }
      cells = std::move(next);
    }
    const double c = std::pow(factor, static_cast<double>(m));
    std::vector<Edge> edges;
    edges.reserve(cells.size() * 3);
    const std::size_t previous = order.size();
    for (const Cell& cell : cells) {
      const std::size_t a = lookup(cell[0]), b = lookup(cell[1]), d = lookup(cell[2]);
      edges.push_back({a, b, c});
      edges.push_back({b, d, c});
      edges.push_back({a, d, c});
    }
    std::vector<std::string> labels(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
      labels[i] = format_double(static_cast<double>(order[i].first) / static_cast<double>(side)) + ";" +
                  format_double(static_cast<double>(order[i].second) / static_cast<double>(side));
    }
    nets.emplace_back(std::move(labels), std::move(edges));
    if (m > 0) {
      std::vector<std::size_t> map(previous);
      for (std::size_t i = 0; i < previous; ++i) map[i] = i;
      incl.push_back(std::move(map));
    }
  }
  return CompatibleSequence(std::move(nets), std::move(incl));
}

/// Searches the conductance factor r for which the level-1 gasket traces back
/// onto the unit triangle. Bisection on the monotone map r -> c_eff(r) - 1.
inline double calibrate_gasket_factor(double tol = 1e-12) {
  auto corner_conductance = [](double r) {
    const auto seq = build_sierpinski_gasket(1, r);
    return -trace(seq.form(1), {0, 1, 2}).traced(0, 1);
  };
  double lo = 1.0, hi = 3.0;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (corner_conductance(mid) < 1.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace dformkit
