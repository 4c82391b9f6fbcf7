#pragma once

// Discrete Beurling-Deny representation of a finite Markov form:
//
//   E(f,g) = sum_{x != y} J(x,y) (f(x)-f(y)) (g(x)-g(y)) + sum_x kappa(x) f(x) g(x)
//
// The double sum runs over ORDERED pairs, so J(x,y) = c(x,y)/2, i.e. half the
// conductance. The strongly local part is identically zero on a finite
// discrete state space and is not stored.

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "dformkit/errors.hpp"
#include "dformkit/forms.hpp"

namespace dformkit {

struct JumpKillingDecomposition {
  Eigen::MatrixXd jump;   ///< J(x,y) on ordered pairs, zero diagonal
  Eigen::VectorXd kappa;  ///< killing weights

  static constexpr bool local_part_is_zero = true;

  std::size_t size() const noexcept { return static_cast<std::size_t>(kappa.size()); }

  void validate() const {
    if (jump.rows() != jump.cols() || jump.rows() != kappa.size()) {
      throw ValidationError("jump matrix and killing vector have inconsistent sizes");
    }
    for (Eigen::Index x = 0; x < jump.rows(); ++x) {
      if (!std::isfinite(kappa[x]) || kappa[x] < 0.0) {
        throw ValidationError("kappa(" + std::to_string(x) + ") = " + std::to_string(kappa[x]) + " is negative");
      }
      if (jump(x, x) != 0.0) throw ValidationError("J has a nonzero diagonal entry at " + std::to_string(x));
      for (Eigen::Index y = x + 1; y < jump.cols(); ++y) {
        if (!std::isfinite(jump(x, y)) || jump(x, y) < 0.0) {
          throw ValidationError("J(" + std::to_string(x) + "," + std::to_string(y) + ") is negative");
        }
        if (jump(x, y) != jump(y, x)) {
          throw ValidationError("J is not symmetric at (" + std::to_string(x) + "," + std::to_string(y) + ")");
        }
      }
    }
  }
};

/// Splits a Markov form into jump kernel and killing measure. Off-diagonal
/// entries that are positive but within tolerance are read as zero.
inline JumpKillingDecomposition decompose(const FormMatrix& a, double tol = kDefaultTolerance) {
  require_markov(a, tol);
  const auto& m = a.matrix();
  const Eigen::Index n = m.rows();
  JumpKillingDecomposition d{Eigen::MatrixXd::Zero(n, n), Eigen::VectorXd::Zero(n)};
  for (Eigen::Index x = 0; x < n; ++x) {
    for (Eigen::Index y = 0; y < n; ++y) {
      if (x != y && m(x, y) < 0.0) d.jump(x, y) = -m(x, y) / 2.0;
    }
  }
  // kappa(x) is the row sum. It is chosen among the doubles closest to the
  // exact row sum so that recompose() reproduces A(x,x) bit for bit.
  for (Eigen::Index x = 0; x < n; ++x) {
    double off = 0.0;
    for (Eigen::Index y = 0; y < n; ++y) {
      if (y != x) off += 2.0 * d.jump(x, y);
    }
    double k = std::max(0.0, m(x, x) - off);
    for (int step = 0; step < 16 && off + k != m(x, x); ++step) {
      if (off + k < m(x, x)) {
        k = std::nextafter(k, std::numeric_limits<double>::infinity());
      } else if (k > 0.0) {
        k = std::nextafter(k, 0.0);
      } else {
        break;
      }
    }
    d.kappa[x] = k;
  }
  return d;
}

/// Inverse of decompose(): A(x,y) = -2 J(x,y), A(x,x) = sum_y 2 J(x,y) + kappa(x),
/// summed in increasing column order.
inline FormMatrix recompose(const JumpKillingDecomposition& d) {
  d.validate();
  const Eigen::Index n = d.kappa.size();
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index x = 0; x < n; ++x) {
    double diag = 0.0;
    for (Eigen::Index y = 0; y < n; ++y) {
      if (y == x) continue;
      a(x, y) = -2.0 * d.jump(x, y);
      diag += 2.0 * d.jump(x, y);
    }
    a(x, x) = diag + d.kappa[x];
  }
  return FormMatrix(std::move(a));
}

/// Right-hand side of the representation, evaluated term by term.
inline double jump_killing_energy(const JumpKillingDecomposition& d, const Function& f, const Function& g) {
  const Eigen::Index n = d.kappa.size();
  if (f.size() != n || g.size() != n) throw ValidationError("function length does not match decomposition");
  double jump_part = 0.0;
  for (Eigen::Index x = 0; x < n; ++x) {
    for (Eigen::Index y = 0; y < n; ++y) {
      if (x != y) jump_part += d.jump(x, y) * (f[x] - f[y]) * (g[x] - g[y]);
    }
  }
  double killing_part = 0.0;
  for (Eigen::Index x = 0; x < n; ++x) killing_part += d.kappa[x] * f[x] * g[x];
  return jump_part + killing_part;
}

}  // namespace dformkit
