#pragma once

// Traces of forms onto vertex subsets (Schur complements / Kron reduction),
// harmonic extension, and the effective resistance metric.

#include <algorithm>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dformkit/errors.hpp"
#include "dformkit/forms.hpp"

namespace dformkit {

/// Reciprocal condition estimates below this mark an interior block as singular.
inline constexpr double kSingularRcond = 1e-13;

struct TraceResult {
  std::vector<std::size_t> subset;    ///< U, in the order requested
  std::vector<std::size_t> interior;  ///< W = V \ U, increasing
  FormMatrix traced;                  ///< E_U, indexed like `subset`
  Eigen::MatrixXd extension;          ///< H = -A_WW^{-1} A_WU, |W| x |U|

  std::size_t vertex_count() const noexcept { return subset.size() + interior.size(); }
};

namespace detail {

inline std::string join_indices(const std::vector<std::size_t>& v) {
  std::string s = "{";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(v[i]);
  }
  return s + "}";
}

inline Eigen::MatrixXd submatrix(const Eigen::MatrixXd& a, const std::vector<std::size_t>& rows,
                                 const std::vector<std::size_t>& cols) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          a(static_cast<Eigen::Index>(rows[i]), static_cast<Eigen::Index>(cols[j]));
    }
  }
  return out;
}

/// Interior components that neither touch U nor carry killing make A_WW singular.
inline void check_floating_components(const FormMatrix& a, const std::vector<std::size_t>& interior,
                                      const std::vector<bool>& in_subset) {
  const std::size_t m = interior.size();
  constexpr std::size_t unset = static_cast<std::size_t>(-1);
  std::vector<std::size_t> comp(m, unset);
  const double kill_eps = kDefaultTolerance * a.scale();
  for (std::size_t s = 0; s < m; ++s) {
    if (comp[s] != unset) continue;
    std::vector<std::size_t> members{s};
    comp[s] = s;
    bool anchored = false;
    for (std::size_t k = 0; k < members.size(); ++k) {
      const std::size_t x = interior[members[k]];
      double row_sum = 0.0;
      for (std::size_t y = 0; y < a.size(); ++y) {
        row_sum += a(x, y);
        if (y == x || a(x, y) == 0.0) continue;
        if (in_subset[y]) anchored = true;
      }
      if (row_sum > kill_eps) anchored = true;
      for (std::size_t t = 0; t < m; ++t) {
        if (comp[t] == unset && a(x, interior[t]) != 0.0) {
          comp[t] = s;
          members.push_back(t);
        }
      }
    }
    if (!anchored) {
      std::vector<std::size_t> verts;
      for (std::size_t t : members) verts.push_back(interior[t]);
      std::sort(verts.begin(), verts.end());
      throw NumericalError("singular_solve", "interior component " + join_indices(verts) +
                                                 " is disconnected from the subset and carries no killing");
    }
  }
}

}  // namespace detail

/// Trace of the form onto `subset`: A_UU - A_UW A_WW^{-1} A_WU together with
/// the harmonic extension operator.
inline TraceResult trace(const FormMatrix& a, const std::vector<std::size_t>& subset) {
  const std::size_t n = a.size();
  if (subset.empty()) throw ValidationError("trace subset must be nonempty");
  std::vector<bool> in_subset(n, false);
  for (std::size_t x : subset) {
    if (x >= n) throw ValidationError("trace subset index " + std::to_string(x) + " is out of range");
    if (in_subset[x]) throw ValidationError("trace subset lists vertex " + std::to_string(x) + " twice");
    in_subset[x] = true;
  }
  TraceResult out;
  out.subset = subset;
  for (std::size_t x = 0; x < n; ++x) {
    if (!in_subset[x]) out.interior.push_back(x);
  }
  const auto& m = a.matrix();
  Eigen::MatrixXd a_uu = detail::submatrix(m, out.subset, out.subset);
  if (out.interior.empty()) {
    out.traced = FormMatrix(std::move(a_uu));
    out.extension = Eigen::MatrixXd(0, static_cast<Eigen::Index>(subset.size()));
    return out;
  }
  detail::check_floating_components(a, out.interior, in_subset);

  const Eigen::MatrixXd a_ww = detail::submatrix(m, out.interior, out.interior);
  const Eigen::MatrixXd a_wu = detail::submatrix(m, out.interior, out.subset);
  Eigen::LLT<Eigen::MatrixXd> llt(a_ww);
  if (llt.info() != Eigen::Success || llt.rcond() < kSingularRcond) {
    throw NumericalError("singular_solve", "interior block of the trace onto " + detail::join_indices(subset) +
                                               " is numerically singular");
  }
  const Eigen::MatrixXd x = llt.solve(a_wu);
  Eigen::MatrixXd t = a_uu - a_wu.transpose() * x;
  if (is_markov(a).markov) {
    // Rebuild the diagonal from off-diagonals and the traced killing
    // k_U = kappa_U - A_UW A_WW^{-1} kappa_W, so no cancellation leaves a
    // spurious negative row sum.
    const double eps = kDefaultTolerance * a.scale();
    Eigen::VectorXd kappa = m.rowwise().sum();
    for (Eigen::Index i = 0; i < kappa.size(); ++i) {
      if (kappa[i] <= eps) kappa[i] = 0.0;
    }
    Eigen::VectorXd k_w(static_cast<Eigen::Index>(out.interior.size()));
    for (std::size_t i = 0; i < out.interior.size(); ++i) k_w[static_cast<Eigen::Index>(i)] = kappa[static_cast<Eigen::Index>(out.interior[i])];
    Eigen::VectorXd k_u = -a_wu.transpose() * llt.solve(k_w);
    for (std::size_t i = 0; i < subset.size(); ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      k_u[ii] = std::max(0.0, k_u[ii]) + kappa[static_cast<Eigen::Index>(subset[i])];
    }
    t = 0.5 * (t + t.transpose()).eval();
    for (Eigen::Index i = 0; i < t.rows(); ++i) {
      double off = 0.0;
      for (Eigen::Index j = 0; j < t.cols(); ++j) {
        if (i == j) continue;
        t(i, j) = std::min(t(i, j), 0.0);
        off += t(i, j);
      }
      t(i, i) = k_u[i] - off;
    }
    out.traced = FormMatrix(std::move(t));
  } else {
    out.traced = FormMatrix::symmetrized(t);
  }
  out.extension = -x;
  return out;
}

/// Energy-minimizing extension of boundary values `f` (indexed like tr.subset).
inline Function harmonic_extension(const TraceResult& tr, const Function& f) {
  if (static_cast<std::size_t>(f.size()) != tr.subset.size()) {
    throw ValidationError("boundary data has length " + std::to_string(f.size()) + " but the subset has " +
                          std::to_string(tr.subset.size()) + " vertices");
  }
  Function g(static_cast<Eigen::Index>(tr.vertex_count()));
  for (std::size_t i = 0; i < tr.subset.size(); ++i) g[static_cast<Eigen::Index>(tr.subset[i])] = f[static_cast<Eigen::Index>(i)];
  if (!tr.interior.empty()) {
    const Eigen::VectorXd inner = tr.extension * f;
    for (std::size_t i = 0; i < tr.interior.size(); ++i) {
      g[static_cast<Eigen::Index>(tr.interior[i])] = inner[static_cast<Eigen::Index>(i)];
    }
  }
  return g;
}

namespace detail {

inline void require_resistance_regime(const FormMatrix& a) {
  if (!is_conservative(a)) {
    throw ValidationError("effective resistance is only defined for forms without killing", "unsupported_regime");
  }
}

}  // namespace detail

/// R(x,y) = 1 / c_eff where c_eff is the conductance of the trace onto {x,y}.
/// Only the connected component containing x is used.
inline double effective_resistance(const FormMatrix& a, std::size_t x, std::size_t y) {
  const std::size_t n = a.size();
  if (x >= n || y >= n) throw ValidationError("resistance query vertex out of range");
  detail::require_resistance_regime(a);
  if (x == y) return 0.0;
  const auto comp = connected_components(a);
  if (comp[x] != comp[y]) {
    throw NumericalError("infinite_resistance", "vertices " + std::to_string(x) + " and " + std::to_string(y) +
                                                    " lie in different components; resistance is infinite");
  }
  std::vector<std::size_t> members;
  std::size_t ix = 0, iy = 0;
  for (std::size_t v = 0; v < n; ++v) {
    if (comp[v] != comp[x]) continue;
    if (v == x) ix = members.size();
    if (v == y) iy = members.size();
    members.push_back(v);
  }
  const FormMatrix sub(detail::submatrix(a.matrix(), members, members));
  const TraceResult tr = trace(sub, {ix, iy});
  const double c_eff = -tr.traced(0, 1);
  if (!(c_eff > 0.0)) {
    throw NumericalError("infinite_resistance", "two-point trace has nonpositive conductance");
  }
  return 1.0 / c_eff;
}

/// Symmetric matrix of all pairwise effective resistances, zero diagonal.
/// Uses the pseudoinverse identity R = P_xx + P_yy - 2 P_xy with
/// P = (A + J/n)^{-1} - J/n, which agrees with the two-point trace.
inline Eigen::MatrixXd resistance_matrix(const FormMatrix& a) {
  const std::size_t n = a.size();
  detail::require_resistance_regime(a);
  const auto comp = connected_components(a);
  if (component_count(comp) > 1) {
    std::size_t other = 0;
    while (comp[other] == comp[0]) ++other;
    throw NumericalError("infinite_resistance", "network is disconnected (vertices 0 and " + std::to_string(other) +
                                                    " are not joined); resistance is infinite");
  }
  const auto ni = static_cast<Eigen::Index>(n);
  const double inv_n = 1.0 / static_cast<double>(n);
  const Eigen::MatrixXd shifted = a.matrix() + Eigen::MatrixXd::Constant(ni, ni, inv_n);
  Eigen::LLT<Eigen::MatrixXd> llt(shifted);
  if (llt.info() != Eigen::Success || llt.rcond() < kSingularRcond) {
    throw NumericalError("singular_solve", "grounded Laplacian is numerically singular");
  }
  const Eigen::MatrixXd p = llt.solve(Eigen::MatrixXd::Identity(ni, ni));
  Eigen::MatrixXd r(ni, ni);
  for (Eigen::Index i = 0; i < ni; ++i) {
    r(i, i) = 0.0;
    for (Eigen::Index j = i + 1; j < ni; ++j) {
      const double v = p(i, i) + p(j, j) - p(i, j) - p(j, i);
      r(i, j) = v;
      r(j, i) = v;
    }
  }
  return r;
}

/// (u(x)-u(y))^2 / E(u,u); bounded above by R(x,y).
inline double sup_formula_value(const FormMatrix& a, std::size_t x, std::size_t y, const Function& u) {
  if (x >= a.size() || y >= a.size()) throw ValidationError("sup formula vertex out of range");
  const double energy = evaluate(a, u);
  if (!(energy > 0.0)) throw ValidationError("sup formula undefined: E(u,u) = 0", "zero_energy");
  const double d = u[static_cast<Eigen::Index>(x)] - u[static_cast<Eigen::Index>(y)];
  return d * d / energy;
}

}  // namespace dformkit
