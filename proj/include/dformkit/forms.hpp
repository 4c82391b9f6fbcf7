#pragma once

// Finite symmetric Dirichlet forms realized as dense matrices.
//
// Sign convention: a form E(f,g) = f^T A g where A is the weighted graph
// Laplacian plus a diagonal killing term,
//   A(x,y) = -c(x,y)                        for x != y
//   A(x,x) = sum_{y != x} c(x,y) + kappa(x)
// so that E(f,f) = sum_{x<y} c(x,y) (f(x)-f(y))^2 + sum_x kappa(x) f(x)^2.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dformkit/errors.hpp"
#include "dformkit/format.hpp"
#include "dformkit/numerics.hpp"

namespace dformkit {

/// Real function on the vertex set, indexed by vertex position.
using Function = Eigen::VectorXd;

/// Default relative tolerance for symmetry and Markov checks.
inline constexpr double kDefaultTolerance = 1e-10;

struct Edge {
  std::size_t u = 0;
  std::size_t v = 0;
  double c = 0.0;  ///< conductance, strictly positive
};

/// Finite weighted graph with killing weights; the carrier of a finite
/// Dirichlet form. Validated on construction and immutable afterwards.
class Network {
 public:
  Network(std::vector<std::string> vertices, std::vector<Edge> edges,
          Eigen::VectorXd killing = Eigen::VectorXd())
      : vertices_(std::move(vertices)), edges_(std::move(edges)), killing_(std::move(killing)) {
    if (killing_.size() == 0) killing_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(vertices_.size()));
    validate();
  }

  /// Network whose labels are the decimal vertex indices.
  static Network unlabeled(std::size_t n, std::vector<Edge> edges,
                           Eigen::VectorXd killing = Eigen::VectorXd()) {
    std::vector<std::string> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = std::to_string(i);
    return Network(std::move(labels), std::move(edges), std::move(killing));
  }

  std::size_t size() const noexcept { return vertices_.size(); }
  const std::vector<std::string>& vertices() const noexcept { return vertices_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const Eigen::VectorXd& killing() const noexcept { return killing_; }
  bool has_killing() const { return (killing_.array() > 0.0).any(); }

 private:
  void validate() const {
    const auto n = vertices_.size();
    if (static_cast<std::size_t>(killing_.size()) != n) {
      throw ValidationError("killing vector has length " + std::to_string(killing_.size()) +
                            " but the network has " + std::to_string(n) + " vertices");
    }
    for (std::size_t x = 0; x < n; ++x) {
      const double k = killing_[static_cast<Eigen::Index>(x)];
      if (!std::isfinite(k) || k < 0.0) {
        throw ValidationError("killing weight at vertex " + std::to_string(x) + " is " +
                              std::to_string(k) + "; must be finite and nonnegative");
      }
    }
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (std::size_t i = 0; i < edges_.size(); ++i) {
      const Edge& e = edges_[i];
      const std::string where = "edge " + std::to_string(i) + " {" + std::to_string(e.u) + "," +
                                std::to_string(e.v) + "}";
      if (e.u >= n || e.v >= n) throw ValidationError(where + " references a vertex out of range");
      if (e.u == e.v) throw ValidationError(where + " is a self-loop");
      if (!std::isfinite(e.c) || e.c <= 0.0) {
        throw ValidationError(where + " has conductance " + std::to_string(e.c) +
                              "; must be finite and strictly positive");
      }
      if (!seen.emplace(std::min(e.u, e.v), std::max(e.u, e.v)).second) {
        throw ValidationError(where + " duplicates an earlier edge");
      }
    }
  }

  std::vector<std::string> vertices_;
  std::vector<Edge> edges_;
  Eigen::VectorXd killing_;
};

/// Dense symmetric matrix realizing E(f,g) = f^T A g. Exact symmetry is
/// enforced on construction; the Markov sign pattern is checked separately
/// by is_markov().
class FormMatrix {
 public:
  FormMatrix() = default;

  explicit FormMatrix(Eigen::MatrixXd a) : a_(std::move(a)) {
    if (a_.rows() != a_.cols()) {
      throw ValidationError("form matrix must be square, got " + std::to_string(a_.rows()) + "x" +
                            std::to_string(a_.cols()));
    }
    for (Eigen::Index i = 0; i < a_.rows(); ++i) {
      for (Eigen::Index j = 0; j < a_.cols(); ++j) {
        if (!std::isfinite(a_(i, j))) {
          throw ValidationError("form matrix entry (" + std::to_string(i) + "," + std::to_string(j) +
                                ") is not finite");
        }
        if (j > i && a_(i, j) != a_(j, i)) {
          throw ValidationError("form matrix is not symmetric at (" + std::to_string(i) + "," +
                                std::to_string(j) + ")");
        }
      }
    }
  }

  /// Symmetrizes (A + A^T)/2 first; for results of floating-point algebra.
  static FormMatrix symmetrized(const Eigen::MatrixXd& a) {
    if (a.rows() != a.cols()) throw ValidationError("form matrix must be square");
    Eigen::MatrixXd s = 0.5 * (a + a.transpose());
    return FormMatrix(std::move(s));
  }

  std::size_t size() const noexcept { return static_cast<std::size_t>(a_.rows()); }
  const Eigen::MatrixXd& matrix() const noexcept { return a_; }
  double operator()(std::size_t i, std::size_t j) const {
    return a_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }

  /// max |A(x,y)|, or 1 for the zero form. Reference magnitude for tolerances.
  double scale() const {
    const double m = a_.size() == 0 ? 0.0 : a_.cwiseAbs().maxCoeff();
    return m > 0.0 ? m : 1.0;
  }

  /// Row sums, i.e. the killing weights of a Markov form.
  Eigen::VectorXd row_sums() const { return a_.rowwise().sum(); }

  friend bool operator==(const FormMatrix& l, const FormMatrix& r) {
    return l.a_.rows() == r.a_.rows() && l.a_.cols() == r.a_.cols() && l.a_ == r.a_;
  }

 private:
  Eigen::MatrixXd a_;
};

/// Nonnegative weights on an enumerated finite (truncated countable) set.
class AtomicMeasure {
 public:
  AtomicMeasure() = default;

  explicit AtomicMeasure(Eigen::VectorXd weights) : weights_(std::move(weights)) {
    for (Eigen::Index i = 0; i < weights_.size(); ++i) {
      if (!std::isfinite(weights_[i]) || weights_[i] < 0.0) {
        throw ValidationError("measure weight at index " + std::to_string(i) + " is " +
                              std::to_string(weights_[i]) + "; must be finite and nonnegative");
      }
    }
    total_ = exact_sum(std::span<const double>(weights_.data(), static_cast<std::size_t>(weights_.size())));
  }

  std::size_t size() const noexcept { return static_cast<std::size_t>(weights_.size()); }
  const Eigen::VectorXd& weights() const noexcept { return weights_; }
  double operator[](std::size_t i) const { return weights_[static_cast<Eigen::Index>(i)]; }
  double total() const noexcept { return total_; }
  bool everywhere_positive() const { return weights_.size() > 0 && (weights_.array() > 0.0).all(); }

 private:
  Eigen::VectorXd weights_;
  double total_ = 0.0;
};

/// Laplacian-plus-killing matrix of a network. Each diagonal entry is the sum
/// of the row's conductances in increasing column order, plus the killing weight.
inline FormMatrix assemble(const Network& net) {
  const auto n = static_cast<Eigen::Index>(net.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (const Edge& e : net.edges()) {
    const auto u = static_cast<Eigen::Index>(e.u);
    const auto v = static_cast<Eigen::Index>(e.v);
    a(u, v) = -e.c;
    a(v, u) = -e.c;
  }
  for (Eigen::Index x = 0; x < n; ++x) {
    double diag = 0.0;
    for (Eigen::Index y = 0; y < n; ++y) {
      if (y != x) diag += -a(x, y);
    }
    a(x, x) = diag + net.killing()[x];
  }
  return FormMatrix(std::move(a));
}

inline void check_dimension(const FormMatrix& a, const Function& f, const char* what) {
  if (static_cast<std::size_t>(f.size()) != a.size()) {
    throw ValidationError(std::string(what) + " has length " + std::to_string(f.size()) +
                          " but the form acts on " + std::to_string(a.size()) + " vertices");
  }
}

/// E(f,g) = f^T A g.
inline double evaluate(const FormMatrix& a, const Function& f, const Function& g) {
  check_dimension(a, f, "f");
  check_dimension(a, g, "g");
  return f.dot(a.matrix() * g);
}

inline double evaluate(const FormMatrix& a, const Function& f) { return evaluate(a, f, f); }

/// E(f,f) computed from the edge list, without assembling the matrix.
inline double network_energy(const Network& net, const Function& f) {
  if (static_cast<std::size_t>(f.size()) != net.size()) {
    throw ValidationError("f has length " + std::to_string(f.size()) + " but the network has " +
                          std::to_string(net.size()) + " vertices");
  }
  double e = 0.0;
  for (const Edge& edge : net.edges()) {
    const double d = f[static_cast<Eigen::Index>(edge.u)] - f[static_cast<Eigen::Index>(edge.v)];
    e += edge.c * d * d;
  }
  for (Eigen::Index x = 0; x < f.size(); ++x) e += net.killing()[x] * f[x] * f[x];
  return e;
}

/// Componentwise clamp to [0,1].
inline Function unit_contraction(const Function& u) { return u.cwiseMax(0.0).cwiseMin(1.0); }

/// Componentwise u ^ 1 (Stone truncation).
inline Function truncate_one(const Function& u) { return u.cwiseMin(1.0); }

struct MarkovViolation {
  enum class Kind { PositiveOffDiagonal, NegativeRowSum };
  Kind kind;
  std::size_t row;
  std::size_t col;  ///< equals row for row-sum violations
  double value;

  std::string describe() const {
    if (kind == Kind::PositiveOffDiagonal) {
      return "off-diagonal entry (" + std::to_string(row) + "," + std::to_string(col) + ") = " +
             format_double(value) + " is positive";
    }
    return "row " + std::to_string(row) + " has negative row sum " + format_double(value);
  }
};

struct MarkovReport {
  bool markov = true;
  std::vector<MarkovViolation> violations;
};

/// Checks off-diagonals <= tol*scale and row sums >= -tol*scale.
inline MarkovReport is_markov(const FormMatrix& a, double tol = kDefaultTolerance) {
  MarkovReport report;
  const double eps = tol * a.scale();
  const auto& m = a.matrix();
  for (Eigen::Index x = 0; x < m.rows(); ++x) {
    for (Eigen::Index y = 0; y < m.cols(); ++y) {
      if (x != y && m(x, y) > eps) {
        report.violations.push_back({MarkovViolation::Kind::PositiveOffDiagonal,
                                     static_cast<std::size_t>(x), static_cast<std::size_t>(y), m(x, y)});
      }
    }
    const double rs = m.row(x).sum();
    if (rs < -eps) {
      report.violations.push_back({MarkovViolation::Kind::NegativeRowSum, static_cast<std::size_t>(x),
                                   static_cast<std::size_t>(x), rs});
    }
  }
  report.markov = report.violations.empty();
  return report;
}

inline void require_markov(const FormMatrix& a, double tol = kDefaultTolerance) {
  const auto report = is_markov(a, tol);
  if (!report.markov) {
    throw ValidationError("form is not Markov: " + report.violations.front().describe(), "not_markov");
  }
}

/// Connected components of the graph with an edge wherever A(x,y) != 0.
/// Component ids are assigned in order of their smallest vertex.
inline std::vector<std::size_t> connected_components(const FormMatrix& a) {
  const std::size_t n = a.size();
  constexpr std::size_t unset = static_cast<std::size_t>(-1);
  std::vector<std::size_t> comp(n, unset);
  std::size_t next = 0;
  std::vector<std::size_t> stack;
  for (std::size_t s = 0; s < n; ++s) {
    if (comp[s] != unset) continue;
    comp[s] = next;
    stack.push_back(s);
    while (!stack.empty()) {
      const std::size_t x = stack.back();
      stack.pop_back();
      for (std::size_t y = 0; y < n; ++y) {
        if (y != x && comp[y] == unset && a(x, y) != 0.0) {
          comp[y] = next;
          stack.push_back(y);
        }
      }
    }
    ++next;
  }
  return comp;
}

inline std::size_t component_count(const std::vector<std::size_t>& comp) {
  return comp.empty() ? 0 : *std::max_element(comp.begin(), comp.end()) + 1;
}

/// True when every row sum is within tol*scale of zero (no killing).
inline bool is_conservative(const FormMatrix& a, double tol = kDefaultTolerance) {
  return a.size() == 0 || a.row_sums().cwiseAbs().maxCoeff() <= tol * a.scale();
}

}  // namespace dformkit
