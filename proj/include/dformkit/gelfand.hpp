#pragma once

// Embedding of a finite point set through a finitely generated function
// algebra: x -> (g_1(x), ..., g_k(x)). Points with identical generator tuples
// collapse to one class; measures and forms are pushed to the classes.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dformkit/errors.hpp"
#include "dformkit/forms.hpp"
#include "dformkit/numerics.hpp"

namespace dformkit {

/// Points and generator value vectors (one vector per generator).
class AlgebraSpec {
 public:
  AlgebraSpec(std::vector<std::string> points, std::vector<Eigen::VectorXd> generators)
      : points_(std::move(points)), generators_(std::move(generators)) {
    if (generators_.empty()) throw ValidationError("algebra needs at least one generator");
    for (std::size_t j = 0; j < generators_.size(); ++j) {
      if (static_cast<std::size_t>(generators_[j].size()) != points_.size()) {
        throw ValidationError("generator " + std::to_string(j) + " has " + std::to_string(generators_[j].size()) +
                              " values for " + std::to_string(points_.size()) + " points");
      }
      if (!generators_[j].allFinite()) throw ValidationError("generator " + std::to_string(j) + " has non-finite values");
    }
  }

  std::size_t size() const noexcept { return points_.size(); }
  std::size_t generator_count() const noexcept { return generators_.size(); }
  const std::vector<std::string>& points() const noexcept { return points_; }
  const std::vector<Eigen::VectorXd>& generators() const noexcept { return generators_; }

 private:
  std::vector<std::string> points_;
  std::vector<Eigen::VectorXd> generators_;
};

struct EmbeddingResult {
  Eigen::MatrixXd images;                        ///< row x is iota(x) in R^k
  std::vector<std::vector<std::size_t>> classes;  ///< ordered by smallest member
  std::vector<std::size_t> class_of;             ///< point -> class index
  bool separated = true;

  std::size_t point_count() const noexcept { return class_of.size(); }
  std::size_t class_count() const noexcept { return classes.size(); }
};

/// Classes are formed by exact equality of generator tuples when
/// `tolerance` is 0; otherwise a point joins the first class whose
/// representative is within `tolerance` in max-norm.
inline EmbeddingResult embed(const AlgebraSpec& spec, double tolerance = 0.0) {
  const auto n = static_cast<Eigen::Index>(spec.size());
  const auto k = static_cast<Eigen::Index>(spec.generator_count());
  EmbeddingResult out;
  out.images.resize(n, k);
  for (Eigen::Index j = 0; j < k; ++j) out.images.col(j) = spec.generators()[static_cast<std::size_t>(j)];
  out.class_of.resize(spec.size());
  if (tolerance <= 0.0) {
    std::map<std::vector<double>, std::size_t> seen;
    for (Eigen::Index x = 0; x < n; ++x) {
      std::vector<double> key(static_cast<std::size_t>(k));
      // -0.0 and 0.0 compare equal but must also map to the same key.
      for (Eigen::Index j = 0; j < k; ++j) key[static_cast<std::size_t>(j)] = out.images(x, j) == 0.0 ? 0.0 : out.images(x, j);
      auto [it, inserted] = seen.emplace(std::move(key), out.classes.size());
      if (inserted) out.classes.emplace_back();
      out.classes[it->second].push_back(static_cast<std::size_t>(x));
      out.class_of[static_cast<std::size_t>(x)] = it->second;
    }
  } else {
    for (Eigen::Index x = 0; x < n; ++x) {
      std::size_t found = out.classes.size();
      for (std::size_t c = 0; c < out.classes.size(); ++c) {
        const auto rep = static_cast<Eigen::Index>(out.classes[c].front());
        if ((out.images.row(x) - out.images.row(rep)).cwiseAbs().maxCoeff() <= tolerance) {
          found = c;
          break;
        }
      }
      if (found == out.classes.size()) out.classes.emplace_back();
      out.classes[found].push_back(static_cast<std::size_t>(x));
      out.class_of[static_cast<std::size_t>(x)] = found;
    }
  }
  out.separated = out.classes.size() == spec.size();
  return out;
}

struct NonvanishingReport {
  bool vanishes_nowhere = true;
  std::vector<std::size_t> witnesses;  ///< points where every generator is zero
};

inline NonvanishingReport vanishes_nowhere(const AlgebraSpec& spec) {
  NonvanishingReport r;
  for (std::size_t x = 0; x < spec.size(); ++x) {
    bool any = false;
    for (const auto& g : spec.generators()) any = any || g[static_cast<Eigen::Index>(x)] != 0.0;
    if (!any) r.witnesses.push_back(x);
  }
  r.vanishes_nowhere = r.witnesses.empty();
  return r;
}

/// Image measure on classes: w_C = sum_{x in C} w_x. Atoms and total are
/// correctly rounded sums of the original weights, so the total equals the
/// source measure's total bit for bit.
struct PushforwardMeasure {
  Eigen::VectorXd atoms;
  double total = 0.0;
};

inline PushforwardMeasure pushforward(const AtomicMeasure& mu, const EmbeddingResult& emb) {
  if (mu.size() != emb.point_count()) {
    throw ValidationError("measure has " + std::to_string(mu.size()) + " atoms but the embedding has " +
                          std::to_string(emb.point_count()) + " points");
  }
  PushforwardMeasure out{Eigen::VectorXd::Zero(static_cast<Eigen::Index>(emb.class_count())), 0.0};
  std::vector<double> grouped;
  grouped.reserve(mu.size());
  for (std::size_t c = 0; c < emb.class_count(); ++c) {
    std::vector<double> members;
    for (std::size_t x : emb.classes[c]) members.push_back(mu[x]);
    out.atoms[static_cast<Eigen::Index>(c)] = exact_sum(members);
    grouped.insert(grouped.end(), members.begin(), members.end());
  }
  out.total = exact_sum(grouped);
  return out;
}

/// Values of a class-constant function on the classes. Throws if f is not
/// constant on some class (it is then not a function on the quotient).
inline Function to_classes(const Function& f, const EmbeddingResult& emb) {
  if (static_cast<std::size_t>(f.size()) != emb.point_count()) {
    throw ValidationError("function has length " + std::to_string(f.size()) + " but the embedding has " +
                          std::to_string(emb.point_count()) + " points");
  }
  Function out(static_cast<Eigen::Index>(emb.class_count()));
  for (std::size_t c = 0; c < emb.class_count(); ++c) {
    const auto& members = emb.classes[c];
    const double v = f[static_cast<Eigen::Index>(members.front())];
    for (std::size_t x : members) {
      if (f[static_cast<Eigen::Index>(x)] != v) {
        throw ValidationError("function is not constant on class " + std::to_string(c) + " (points " +
                                  std::to_string(members.front()) + " and " + std::to_string(x) + ")",
                              "not_in_algebra");
      }
    }
    out[static_cast<Eigen::Index>(c)] = v;
  }
  return out;
}

/// Class-constant function on the points from values on classes.
inline Function from_classes(const Function& fhat, const EmbeddingResult& emb) {
  if (static_cast<std::size_t>(fhat.size()) != emb.class_count()) throw ValidationError("class function has wrong length");
  Function out(static_cast<Eigen::Index>(emb.point_count()));
  for (std::size_t x = 0; x < emb.point_count(); ++x) out[static_cast<Eigen::Index>(x)] = fhat[static_cast<Eigen::Index>(emb.class_of[x])];
  return out;
}

struct IsometryCheck {
  double lhs = 0.0;  ///< ||f||_{L2(mu)}
  double rhs = 0.0;  ///< ||f^||_{L2(mu^)}
  double difference = 0.0;
};

inline IsometryCheck l2_isometry_check(const Function& f, const AtomicMeasure& mu, const EmbeddingResult& emb) {
  const Function fhat = to_classes(f, emb);
  const PushforwardMeasure muhat = pushforward(mu, emb);
  double lhs = 0.0;
  for (std::size_t x = 0; x < mu.size(); ++x) {
    const double v = f[static_cast<Eigen::Index>(x)];
    lhs += v * v * mu[x];
  }
  double rhs = 0.0;
  for (Eigen::Index c = 0; c < fhat.size(); ++c) rhs += fhat[c] * fhat[c] * muhat.atoms[c];
  IsometryCheck out;
  out.lhs = std::sqrt(lhs);
  out.rhs = std::sqrt(rhs);
  out.difference = std::abs(out.lhs - out.rhs);
  return out;
}

/// Form on the classes: A^ = P^T A P with P the class indicator matrix, so
/// that E^(f^, g^) = E(f, g) for class-constant f, g. The descent check
/// compares E(1_C, 1_D) against A^(C,D) for every class pair.
inline FormMatrix transfer_form(const FormMatrix& a, const EmbeddingResult& emb, double tol = 1e-12) {
  if (a.size() != emb.point_count()) {
    throw ValidationError("form acts on " + std::to_string(a.size()) + " vertices but the embedding has " +
                          std::to_string(emb.point_count()) + " points");
  }
  const auto k = static_cast<Eigen::Index>(emb.class_count());
  const auto n = static_cast<Eigen::Index>(emb.point_count());
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, k);
  for (std::size_t x = 0; x < emb.point_count(); ++x) p(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(emb.class_of[x])) = 1.0;
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(k, k);
  for (Eigen::Index x = 0; x < n; ++x) {
    for (Eigen::Index y = 0; y < n; ++y) {
      q(static_cast<Eigen::Index>(emb.class_of[static_cast<std::size_t>(x)]),
        static_cast<Eigen::Index>(emb.class_of[static_cast<std::size_t>(y)])) += a.matrix()(x, y);
    }
  }
  const double eps = tol * a.scale() * static_cast<double>(std::max<Eigen::Index>(n, 1));
  const Eigen::MatrixXd direct_all = p.transpose() * (a.matrix() * p);
  for (Eigen::Index c = 0; c < k; ++c) {
    for (Eigen::Index d = c; d < k; ++d) {
      const double direct = direct_all(c, d);
      if (!std::isfinite(q(c, d)) || !(std::abs(direct - q(c, d)) <= eps)) {
        throw NumericalError("descent_failure", "form does not descend to the quotient: classes " + std::to_string(c) +
                                                    " and " + std::to_string(d) + " give inconsistent values");
      }
    }
  }
  return FormMatrix::symmetrized(q);
}

struct ClosurePoint {
  Eigen::VectorXd center;       ///< net point (an image)
  std::size_t distinct_within_eps = 0;
  bool flagged = false;          ///< candidate compactification point
  Eigen::VectorXd accumulation;  ///< estimated location of the accumulation
};

inline constexpr std::size_t kClosureThreshold = 10;

/// Diagnostic only. Greedy epsilon-net over the distinct images (in point
/// order). A net point is flagged when its epsilon-ball holds at least
/// `threshold` distinct images and the epsilon/2-ball around the estimated
/// accumulation location is not occupied by a single image alone. The
/// accumulation estimate is the image in the ball with the smallest gap to
/// another distinct image.
inline std::vector<ClosurePoint> spectrum_closure_estimate(const AlgebraSpec& spec, double epsilon,
                                                           std::size_t threshold = kClosureThreshold) {
  if (!(epsilon > 0.0)) throw ValidationError("closure epsilon must be positive");
  const EmbeddingResult emb = embed(spec);
  std::vector<Eigen::VectorXd> distinct;
  for (const auto& cls : emb.classes) distinct.push_back(emb.images.row(static_cast<Eigen::Index>(cls.front())).transpose());
  const std::size_t m = distinct.size();
  auto dist = [&](std::size_t i, std::size_t j) { return (distinct[i] - distinct[j]).norm(); };

  std::vector<double> gap(m, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> centers;
  for (std::size_t i = 0; i < m; ++i) {
    bool covered = false;
    for (std::size_t c : centers) covered = covered || dist(i, c) <= epsilon;
    if (!covered) centers.push_back(i);
  }
  std::vector<ClosurePoint> out;
  for (std::size_t c : centers) {
    ClosurePoint p;
    p.center = distinct[c];
    std::vector<std::size_t> ball;
    for (std::size_t i = 0; i < m; ++i) {
      if (dist(i, c) <= epsilon) ball.push_back(i);
    }
    p.distinct_within_eps = ball.size();
    std::size_t best = c;
    double best_gap = std::numeric_limits<double>::infinity();
    for (std::size_t i : ball) {
      if (!std::isfinite(gap[i])) {
        for (std::size_t j = 0; j < m; ++j) {
          if (j != i) gap[i] = std::min(gap[i], dist(i, j));
        }
      }
      if (gap[i] < best_gap) {
        best_gap = gap[i];
        best = i;
      }
    }
    p.accumulation = distinct[best];
    std::size_t near = 0;
    for (std::size_t i = 0; i < m; ++i) {
      if (dist(i, best) <= epsilon / 2.0) ++near;
    }
    p.flagged = p.distinct_within_eps >= threshold && near > 1;
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace dformkit
