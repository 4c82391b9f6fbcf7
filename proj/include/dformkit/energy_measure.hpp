#pragma once

// Pointwise energy measures of finite Markov forms. For a point x,
//
//   Gamma(f)({x}) = E(1_x f, f) - 1/2 E(1_x, f^2)
//                 = 1/2 sum_y c(x,y) (f(x)-f(y))^2 + 1/2 kappa(x) f(x)^2,
//
// so that 2 sum_x phi(x) Gamma(f)({x}) = 2 E(phi f, f) - E(phi, f^2) and the
// total mass is E(f,f) - 1/2 sum_x kappa(x) f(x)^2.

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dformkit/errors.hpp"
#include "dformkit/forms.hpp"
#include "dformkit/gelfand.hpp"
#include "dformkit/numerics.hpp"
#include "dformkit/sequences.hpp"

namespace dformkit {

inline constexpr double kEnergyTolerance = 1e-12;
inline constexpr double kNegativeMassClamp = 1e-14;

struct EnergyMeasure {
  Eigen::VectorXd masses;
  double total = 0.0;
  double identity_gap = 0.0;  ///< max |defining identity - closed form| over points
};

namespace detail {

inline double total_of(const Eigen::VectorXd& v) {
  return exact_sum(std::span<const double>(v.data(), static_cast<std::size_t>(v.size())));
}

/// Magnitude against which energy-measure tolerances are scaled.
inline double energy_scale(const FormMatrix& a, const Function& f) {
  const double fmax = f.size() == 0 ? 0.0 : f.cwiseAbs().maxCoeff();
  return a.scale() * std::max(1.0, fmax * fmax);
}

}  // namespace detail

/// Energy measure of f. Both the defining identity and the closed form are
/// computed and must agree within 1e-12 * scale; the closed form is returned.
inline EnergyMeasure energy_measure(const FormMatrix& a, const Function& f) {
  require_markov(a);
  check_dimension(a, f, "f");
  const auto& m = a.matrix();
  const Eigen::Index n = m.rows();
  const double scale = detail::energy_scale(a, f);

  const Eigen::VectorXd af = m * f;
  const Eigen::VectorXd af2 = m * f.cwiseProduct(f);
  EnergyMeasure out;
  out.masses.resize(n);
  for (Eigen::Index x = 0; x < n; ++x) {
    double jump = 0.0;
    double row_sum = 0.0;
    for (Eigen::Index y = 0; y < n; ++y) {
      row_sum += m(x, y);
      if (y == x) continue;
      const double d = f[x] - f[y];
      jump += -m(x, y) * d * d;
    }
    double closed = 0.5 * jump + 0.5 * row_sum * f[x] * f[x];
    // E(1_x f, f) = f(x) (A f)(x) and E(1_x, f^2) = (A f^2)(x).
    const double identity = f[x] * af[x] - 0.5 * af2[x];
    out.identity_gap = std::max(out.identity_gap, std::abs(identity - closed));
    if (closed < 0.0) {
      if (closed < -kNegativeMassClamp * scale) {
        throw NumericalError("negative_energy_mass", "energy mass at vertex " + std::to_string(x) + " is " +
                                                         format_double(closed) + "; input is not Markov");
      }
      closed = 0.0;
    }
    out.masses[x] = closed;
  }
  if (!(out.identity_gap <= kEnergyTolerance * scale)) {
    throw NumericalError("identity_mismatch", "energy measure defining identity and closed form differ by " +
                                                  format_double(out.identity_gap));
  }
  out.total = detail::total_of(out.masses);
  return out;
}

struct IdentityCheck {
  double lhs = 0.0;  ///< 2 sum_x phi(x) Gamma(f)({x})
  double rhs = 0.0;  ///< 2 E(phi f, f) - E(phi, f^2)
};

inline IdentityCheck test_identity(const FormMatrix& a, const Function& f, const Function& phi) {
  check_dimension(a, phi, "phi");
  const EnergyMeasure gamma = energy_measure(a, f);
  IdentityCheck out;
  out.lhs = 2.0 * phi.dot(gamma.masses);
  out.rhs = 2.0 * evaluate(a, phi.cwiseProduct(f), f) - evaluate(a, phi, f.cwiseProduct(f));
  return out;
}

/// Image of an energy measure under the class map: masses summed per class.
inline EnergyMeasure pushforward_gamma(const EnergyMeasure& gamma, const EmbeddingResult& emb) {
  if (static_cast<std::size_t>(gamma.masses.size()) != emb.point_count()) {
    throw ValidationError("energy measure has " + std::to_string(gamma.masses.size()) +
                          " masses but the embedding has " + std::to_string(emb.point_count()) + " points");
  }
  EnergyMeasure out;
  out.masses = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(emb.class_count()));
  for (std::size_t c = 0; c < emb.class_count(); ++c) {
    std::vector<double> members;
    for (std::size_t x : emb.classes[c]) members.push_back(gamma.masses[static_cast<Eigen::Index>(x)]);
    out.masses[static_cast<Eigen::Index>(c)] = exact_sum(members);
  }
  out.total = detail::total_of(out.masses);
  return out;
}

struct CounterexampleRow {
  std::size_t level = 0;
  double energy = 0.0;      ///< E_n(f) for f(x) = x
  double gamma_set = 0.0;   ///< Gamma_n(f)(S)
  double ratio = std::nan("");  ///< gamma_set / previous row's gamma_set
};

/// For f(x) = x on dyadic interval levels min_level..max_level: the energy
/// stays 1 while the energy measure of the fixed finite set S decays like
/// 2^{1-n}, so no fixed set of points carries the energy in the limit.
/// `profile` replaces f(x) = x when given.
inline std::vector<CounterexampleRow> counterexample_demo(std::size_t min_level, std::size_t max_level,
                                                          const std::vector<double>& set,
                                                          const std::function<double(double)>& profile = {}) {
  if (min_level > max_level) throw ValidationError("min level exceeds max level");
  if (max_level > 12) throw ValidationError("counterexample demo accepts at most 12 levels");
  std::vector<std::size_t> coarse_index;
  for (double s : set) {
    const double k = std::ldexp(s, static_cast<int>(min_level));
    if (!(s >= 0.0 && s <= 1.0) || k != std::floor(k)) {
      throw ValidationError("point " + format_double(s) + " is not a dyadic point of level " +
                            std::to_string(min_level));
    }
    coarse_index.push_back(static_cast<std::size_t>(k));
  }
  std::vector<CounterexampleRow> rows;
  for (std::size_t n = min_level; n <= max_level; ++n) {
    const Network net = dyadic_interval_level(n);
    Function f(static_cast<Eigen::Index>(net.size()));
    for (Eigen::Index k = 0; k < f.size(); ++k) {
      const double x = std::ldexp(static_cast<double>(k), -static_cast<int>(n));
      f[k] = profile ? profile(x) : x;
    }
    const FormMatrix a = assemble(net);
    const EnergyMeasure gamma = energy_measure(a, f);
    CounterexampleRow row;
    row.level = n;
    row.energy = evaluate(a, f);
    std::vector<double> in_set;
    for (std::size_t k : coarse_index) {
      in_set.push_back(gamma.masses[static_cast<Eigen::Index>(k << (n - min_level))]);
    }
    row.gamma_set = exact_sum(in_set);
    if (!rows.empty() && rows.back().gamma_set != 0.0) row.ratio = row.gamma_set / rows.back().gamma_set;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace dformkit
