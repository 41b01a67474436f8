#pragma once

// Deterministic numerical oracles: Gauss-Hermite / Gauss-Legendre rules
// (Golub-Welsch construction), tensorized Gaussian expectations, seeded
// counter-based sampling, the weak continuity-equation residual and the
// Benamou-Brenier action integral.

#include <cmath>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gwot/analytic.hpp"
#include "gwot/core.hpp"
#include "gwot/rng.hpp"

namespace gwot {

// ---------------------------------------------------------------------------
// One-dimensional rules
// ---------------------------------------------------------------------------

/// Nodes and weights of a one-dimensional quadrature rule.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  int order = 0;

  /// Gauss-Hermite rule (physicists' convention): integrates
  /// f(x) exp(-x^2) over the line exactly for polynomials of degree
  /// <= 2 order - 1.
  static QuadratureRule gauss_hermite(int order) {
    if (order < 1) throw InvalidArgument("quadrature order must be >= 1");
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(order);
    Eigen::VectorXd sub(order > 1 ? order - 1 : 0);
    for (int k = 1; k < order; ++k) sub[k - 1] = std::sqrt(0.5 * k);
    return from_jacobi(diag, sub, std::sqrt(M_PI), order);
  }

  /// Gauss-Legendre rule on [-1, 1].
  static QuadratureRule gauss_legendre(int order) {
    if (order < 1) throw InvalidArgument("quadrature order must be >= 1");
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(order);
    Eigen::VectorXd sub(order > 1 ? order - 1 : 0);
    for (int k = 1; k < order; ++k)
      sub[k - 1] = k / std::sqrt(4.0 * k * k - 1.0);
    return from_jacobi(diag, sub, 2.0, order);
  }

 private:
  // Golub-Welsch: nodes are eigenvalues of the Jacobi matrix, weights are
  // mu0 times the squared first eigenvector components.
  static QuadratureRule from_jacobi(const Eigen::VectorXd& diag,
                                    const Eigen::VectorXd& sub, double mu0,
                                    int order) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    QuadratureRule rule;
    rule.order = order;
    rule.nodes.resize(static_cast<std::size_t>(order));
    rule.weights.resize(static_cast<std::size_t>(order));
    for (int i = 0; i < order; ++i) {
      rule.nodes[static_cast<std::size_t>(i)] = es.eigenvalues()[i];
      const double v0 = es.eigenvectors()(0, i);
      rule.weights[static_cast<std::size_t>(i)] = mu0 * v0 * v0;
    }
    return rule;
  }
};

// ---------------------------------------------------------------------------
// Gaussian expectations
// ---------------------------------------------------------------------------

/// Tensorized Gauss-Hermite estimate of the expectation of f under mu_t.
/// f must be finite at every node and of at-most-polynomial growth.
template <typename F>
double expect(F&& f, const GaussianPacket& packet, int order = 40) {
  if (order < 2) throw InvalidArgument("expect() requires order >= 2");
  const QuadratureRule rule = QuadratureRule::gauss_hermite(order);
  const double scale = std::sqrt(2.0) * packet.per_coord_sigma();
  const double norm = std::pow(M_PI, -1.5);
  double total = 0.0;
  const std::size_t n = rule.nodes.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = scale * rule.nodes[i];
    double sum_i = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double xj = scale * rule.nodes[j];
      double sum_j = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        const double value = f(Vec3(xi, xj, scale * rule.nodes[k]));
        if (!std::isfinite(value))
          throw NonFiniteIntegrand("integrand returned a non-finite value");
        sum_j += rule.weights[k] * value;
      }
      sum_i += rule.weights[j] * sum_j;
    }
    total += rule.weights[i] * sum_i;
  }
  return norm * total;
}

// ---------------------------------------------------------------------------
// Seeded sampling
// ---------------------------------------------------------------------------

/// Reproducible draws from mu_t.  Point i uses deviates 3i..3i+2 of the
/// seed's stream, so the set is independent of evaluation order.
struct SampleSet {
  std::vector<Vec3> points;
  std::uint64_t seed = 0;
  double time = 0.0;

  DiscreteMeasure to_measure() const {
    return DiscreteMeasure::uniform(points);
  }
};

inline SampleSet sample(const GaussianPacket& packet, std::size_t n,
                        std::uint64_t seed) {
  if (n < 1) throw InvalidArgument("sample() requires n >= 1");
  SampleSet out;
  out.seed = seed;
  out.time = packet.time;
  out.points.resize(n);
  const double sigma = packet.per_coord_sigma();
  for (std::size_t i = 0; i < n; ++i)
    for (int axis = 0; axis < 3; ++axis)
      out.points[i][axis] =
          sigma * normal_at(seed, 3 * static_cast<std::uint64_t>(i) +
                                      static_cast<std::uint64_t>(axis));
  return out;
}

// ---------------------------------------------------------------------------
// Weak continuity equation
// ---------------------------------------------------------------------------

/// Smooth space-time test function given by its partial derivatives.
struct SpaceTimeTestFunction {
  std::function<double(const Vec3&, double)> dt;
  std::function<Vec3(const Vec3&, double)> grad;
};

/// Default test function sin^2(pi (t - t0)/(t1 - t0)) exp(-|x|^2):
/// Schwartz-class in space, vanishing at both ends of the time window.
inline SpaceTimeTestFunction bump_test_function(double t0, double t1) {
  const double span = t1 - t0;
  SpaceTimeTestFunction phi;
  phi.dt = [t0, span](const Vec3& x, double t) {
    const double u = M_PI * (t - t0) / span;
    return 2.0 * std::sin(u) * std::cos(u) * (M_PI / span) *
           std::exp(-x.squaredNorm());
  };
  phi.grad = [t0, span](const Vec3& x, double t) -> Vec3 {
    const double u = M_PI * (t - t0) / span;
    const double s = std::sin(u);
    return -2.0 * s * s * std::exp(-x.squaredNorm()) * x;
  };
  return phi;
}

using VelocityField = std::function<Vec3(const Vec3&, double)>;

/// |integral over [t0,t1] of integral of (phi_t + grad phi . v) dmu_t dt|,
/// Gauss-Hermite in space at each Gauss-Legendre time node.  Vanishes for
/// any velocity field that solves the weak continuity equation with mu_t.
inline double continuity_residual(const PhysParams& p,
                                  const SpaceTimeTestFunction& phi, double t0,
                                  double t1, int space_order = 30,
                                  int time_order = 60,
                                  const VelocityField* velocity_override =
                                      nullptr) {
  validate_params(p);
  require_time(t0);
  require_time(t1);
  if (!(t1 > t0)) throw InvalidArgument("time window must satisfy t0 < t1");
  const QuadratureRule tg = QuadratureRule::gauss_legendre(time_order);
  double total = 0.0;
  for (std::size_t q = 0; q < tg.nodes.size(); ++q) {
    const double t = 0.5 * (t0 + t1) + 0.5 * (t1 - t0) * tg.nodes[q];
    const GaussianPacket packet(p, t);
    auto integrand = [&](const Vec3& x) {
      const Vec3 v = velocity_override ? (*velocity_override)(x, t)
                                       : velocity(p, t, x);
      return phi.dt(x, t) + phi.grad(x, t).dot(v);
    };
    total += 0.5 * (t1 - t0) * tg.weights[q] *
             expect(integrand, packet, space_order);
  }
  return std::abs(total);
}

// ---------------------------------------------------------------------------
// Benamou-Brenier action
// ---------------------------------------------------------------------------

/// Gauss-Legendre integral of the metric derivative over [s, t]; the tangent
/// couple attains the Benamou-Brenier infimum, so this reproduces
/// w2_closed_form(p, s, t).
inline double bb_action(const PhysParams& p, double s, double t,
                        int time_order = 200) {
  validate_params(p);
  require_time(s);
  require_time(t);
  if (s > t) throw InvalidArgument("bb_action requires s <= t");
  if (s == t) return 0.0;
  const QuadratureRule tg = QuadratureRule::gauss_legendre(time_order);
  double total = 0.0;
  for (std::size_t q = 0; q < tg.nodes.size(); ++q) {
    const double u = 0.5 * (s + t) + 0.5 * (t - s) * tg.nodes[q];
    total += 0.5 * (t - s) * tg.weights[q] * metric_derivative(p, u);
  }
  return total;
}

}  // namespace gwot
