#pragma once

// Shape-space quantities: the shape distance as an infimum over ISO(R^3)
// (derivative-free search over translation and axis-angle), O(3)-invariance
// checks, distinctness of shapes along the curve, and the tangent-space
// projection that mods out the fundamental vector fields of iso(3).

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gwot/analytic.hpp"
#include "gwot/core.hpp"
#include "gwot/quadrature.hpp"

namespace gwot {

// ---------------------------------------------------------------------------
// Gaussian W2 (Bures form)
// ---------------------------------------------------------------------------

/// W2 between N(mean1, cov1) and N(mean2, cov2):
/// |m1 - m2|^2 + tr(cov1 + cov2 - 2 (cov2^{1/2} cov1 cov2^{1/2})^{1/2}).
inline double w2_gaussians(const Vec3& mean1, const Mat3& cov1,
                           const Vec3& mean2, const Mat3& cov2) {
  Eigen::SelfAdjointEigenSolver<Mat3> es2(cov2);
  const Mat3 sqrt2 = es2.operatorSqrt();
  Eigen::SelfAdjointEigenSolver<Mat3> cross(sqrt2 * cov1 * sqrt2);
  double tr_cross = 0.0;
  for (int i = 0; i < 3; ++i)
    tr_cross += std::sqrt(std::max(0.0, cross.eigenvalues()[i]));
  const double w2sq = (mean1 - mean2).squaredNorm() + cov1.trace() +
                      cov2.trace() - 2.0 * tr_cross;
  return std::sqrt(std::max(0.0, w2sq));
}

// ---------------------------------------------------------------------------
// Nelder-Mead
// ---------------------------------------------------------------------------

struct NelderMeadResult {
  Eigen::VectorXd minimizer;
  double value = 0.0;
  int evaluations = 0;
  double simplex_diameter = 0.0;
  bool converged = false;
};

/// Standard Nelder-Mead simplex search (reflection 1, expansion 2,
/// contraction 1/2, shrink 1/2).  Converged when the simplex diameter falls
/// below tol before max_evals objective evaluations are spent.
template <typename F>
NelderMeadResult nelder_mead(F&& f, const Eigen::VectorXd& start, double step,
                             double tol, int max_evals) {
  const int dim = static_cast<int>(start.size());
  std::vector<Eigen::VectorXd> xs;
  std::vector<double> fs;
  int evals = 0;
  auto eval = [&](const Eigen::VectorXd& x) {
    ++evals;
    return f(x);
  };
  xs.push_back(start);
  fs.push_back(eval(start));
  for (int d = 0; d < dim; ++d) {
    Eigen::VectorXd x = start;
    x[d] += step;
    xs.push_back(x);
    fs.push_back(eval(x));
  }
  auto order = [&] {
    std::vector<int> idx(xs.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
    std::sort(idx.begin(), idx.end(),
              [&](int a, int b) { return fs[static_cast<std::size_t>(a)] <
                                         fs[static_cast<std::size_t>(b)]; });
    std::vector<Eigen::VectorXd> xs2;
    std::vector<double> fs2;
    for (int i : idx) {
      xs2.push_back(xs[static_cast<std::size_t>(i)]);
      fs2.push_back(fs[static_cast<std::size_t>(i)]);
    }
    xs.swap(xs2);
    fs.swap(fs2);
  };
  auto diameter = [&] {
    double d = 0.0;
    for (std::size_t i = 1; i < xs.size(); ++i)
      d = std::max(d, (xs[i] - xs[0]).norm());
    return d;
  };
  order();
  while (evals < max_evals && diameter() > tol) {
    const std::size_t worst = xs.size() - 1;
    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(dim);
    for (std::size_t i = 0; i < worst; ++i) centroid += xs[i];
    centroid /= static_cast<double>(worst);
    const Eigen::VectorXd reflected = centroid + (centroid - xs[worst]);
    const double fr = eval(reflected);
    if (fr < fs[0]) {
      const Eigen::VectorXd expanded = centroid + 2.0 * (centroid - xs[worst]);
      const double fe = eval(expanded);
      if (fe < fr) {
        xs[worst] = expanded;
        fs[worst] = fe;
      } else {
        xs[worst] = reflected;
        fs[worst] = fr;
      }
    } else if (fr < fs[worst - 1]) {
      xs[worst] = reflected;
      fs[worst] = fr;
    } else {
      const bool outside = fr < fs[worst];
      const Eigen::VectorXd contracted =
          centroid + 0.5 * ((outside ? reflected : xs[worst]) - centroid);
      const double fc = eval(contracted);
      if (fc < std::min(fr, fs[worst])) {
        xs[worst] = contracted;
        fs[worst] = fc;
      } else {
        for (std::size_t i = 1; i < xs.size(); ++i) {
          xs[i] = xs[0] + 0.5 * (xs[i] - xs[0]);
          fs[i] = eval(xs[i]);
        }
      }
    }
    order();
  }
  NelderMeadResult res;
  res.minimizer = xs[0];
  res.value = fs[0];
  res.evaluations = evals;
  res.simplex_diameter = diameter();
  res.converged = res.simplex_diameter <= tol;
  return res;
}

// ---------------------------------------------------------------------------
// Shape distance
// ---------------------------------------------------------------------------

struct IsometrySearchConfig {
  Vec3 translation_init = Vec3::Zero();
  Vec3 axis_angle_init = Vec3::Zero();
  int max_evals = 4000;
  double simplex_tol = 1e-10;

  void validate() const {
    if (max_evals < 100) throw InvalidArgument("max_evals must be >= 100");
    if (!(simplex_tol > 0.0)) throw InvalidArgument("simplex_tol must be > 0");
  }
};

struct ShapeDistanceResult {
  double value = 0.0;
  Isometry minimizer;
  int evaluations = 0;
};

/// D_2([mu_s], [mu_t]) = inf over ISO(R^3) of W2(g mu_s, mu_t), minimized by
/// Nelder-Mead over (translation, axis-angle).  The inner objective is the
/// closed-form Gaussian W2 between the moved packet and mu_t.  For this
/// family the rotation is a null direction and the optimal translation is
/// zero, so the value reproduces w2_closed_form.
inline ShapeDistanceResult shape_distance(const PhysParams& p, double s,
                                          double t,
                                          const IsometrySearchConfig& cfg) {
  validate_params(p);
  require_time(s);
  require_time(t);
  cfg.validate();
  const double var_s = GaussianPacket(p, s).per_coord_variance();
  const double var_t = GaussianPacket(p, t).per_coord_variance();
  auto objective = [&](const Eigen::VectorXd& theta) {
    const Vec3 a = theta.segment<3>(0);
    const Mat3 r = rotation_from_axis_angle(theta.segment<3>(3));
    const Mat3 moved_cov = var_s * r * r.transpose();  // = var_s I
    return w2_gaussians(a, moved_cov, Vec3::Zero(), var_t * Mat3::Identity());
  };
  Eigen::VectorXd start(6);
  start << cfg.translation_init, cfg.axis_angle_init;
  NelderMeadResult nm =
      nelder_mead(objective, start, 0.5 * p.width, cfg.simplex_tol,
                  cfg.max_evals);
  if (!nm.converged) {
    // One restart from the incumbent with a tighter simplex.
    const int remaining = cfg.max_evals;
    nm = nelder_mead(objective, nm.minimizer, 0.05 * p.width, cfg.simplex_tol,
                     remaining);
    if (!nm.converged)
      throw NoConvergence("shape_distance simplex did not contract below tolerance");
  }
  ShapeDistanceResult res;
  res.value = nm.value;
  res.minimizer.translation = nm.minimizer.segment<3>(0);
  res.minimizer.rotation = rotation_from_axis_angle(nm.minimizer.segment<3>(3));
  res.evaluations = nm.evaluations;
  return res;
}

/// Certifies [mu_s] != [mu_t] for s != t: returns the shape distance, which
/// stays within 1e-5 of the strictly positive w2_closed_form.
inline double shape_distinctness(const PhysParams& p, double s, double t,
                                 const IsometrySearchConfig& cfg) {
  if (s == t) throw DegenerateTimes("shape_distinctness requires s != t");
  return shape_distance(p, s, t, cfg).value;
}

/// Sup over a fixed 100-point probe set of |rho(R^{-1} x) - rho(x)|.
/// Zero (to rounding) for every orthogonal R since the density is radial.
inline double o3_invariance_residual(const PhysParams& p, double t,
                                     const Mat3& rotation) {
  validate_params(p);
  require_time(t);
  if (orthogonality_defect(rotation) > Isometry::kOrthoTol)
    throw NonOrthogonal("o3_invariance_residual requires an orthogonal matrix");
  constexpr std::uint64_t kProbeSeed = 0x6f33;  // fixed probe set
  const GaussianPacket packet(p, t);
  const SampleSet probes = sample(packet, 100, kProbeSeed);
  const Mat3 rinv = rotation.transpose();
  double worst = 0.0;
  for (const Vec3& x : probes.points)
    worst = std::max(worst,
                     std::abs(density(p, t, rinv * x) - density(p, t, x)));
  return worst;
}

// ---------------------------------------------------------------------------
// Gradient dictionary and tangent projection
// ---------------------------------------------------------------------------

/// Finite-dimensional surrogate for the Wasserstein tangent space at mu_t:
/// the span of gradients of all monomials of total degree 1..max_degree.
struct GradientDictionary {
  int max_degree = 4;
  std::vector<std::array<int, 3>> exponents;

  static GradientDictionary of_degree(int degree) {
    if (degree < 1) throw InvalidArgument("dictionary degree must be >= 1");
    GradientDictionary dict;
    dict.max_degree = degree;
    for (int total = 1; total <= degree; ++total)
      for (int a = total; a >= 0; --a)
        for (int b = total - a; b >= 0; --b)
          dict.exponents.push_back({a, b, total - a - b});
    return dict;
  }

  std::size_t size() const { return exponents.size(); }

  /// Gradient of the k-th monomial at x.
  Vec3 gradient(std::size_t k, const Vec3& x) const {
    const auto& e = exponents[k];
    auto powi = [](double v, int n) {
      double r = 1.0;
      for (int i = 0; i < n; ++i) r *= v;
      return r;
    };
    Vec3 g = Vec3::Zero();
    if (e[0] > 0)
      g[0] = e[0] * powi(x[0], e[0] - 1) * powi(x[1], e[1]) * powi(x[2], e[2]);
    if (e[1] > 0)
      g[1] = e[1] * powi(x[0], e[0]) * powi(x[1], e[1] - 1) * powi(x[2], e[2]);
    if (e[2] > 0)
      g[2] = e[2] * powi(x[0], e[0]) * powi(x[1], e[1]) * powi(x[2], e[2] - 1);
    return g;
  }
};

using VectorFieldFn = std::function<Vec3(const Vec3&)>;

struct ProjectionResult {
  Eigen::VectorXd coefficients;  // in the dictionary-gradient basis
  double projected_norm = 0.0;   // L2(mu) norm of the projection
  double residual_norm = 0.0;    // L2(mu) norm of the orthogonal remainder
};

/// Assembles the Gram matrix of dictionary gradients under the L2(mu_t)
/// inner product once and projects vector fields onto their span.
class TangentProjector {
 public:
  TangentProjector(const GaussianPacket& packet, GradientDictionary dict,
                   int quad_order = 0)
      : packet_(packet), dict_(std::move(dict)) {
    const int order =
        quad_order > 0 ? quad_order : 2 * dict_.max_degree + 4;
    rule_ = QuadratureRule::gauss_hermite(order);
    assemble_gram();
    eig_.compute(gram_);
    const double lmax = eig_.eigenvalues().maxCoeff();
    const double lmin = eig_.eigenvalues().minCoeff();
    condition_ = lmin > 0.0 ? lmax / lmin
                            : std::numeric_limits<double>::infinity();
    if (!(condition_ <= 1e12))
      throw IllConditioned("gradient dictionary Gram matrix condition number exceeds 1e12");
  }

  const Eigen::MatrixXd& gram() const { return gram_; }
  double condition_number() const { return condition_; }
  const GradientDictionary& dictionary() const { return dict_; }

  /// Least-squares projection of the field onto the dictionary span.
  ProjectionResult project(const VectorFieldFn& field) const {
    const std::size_t m = dict_.size();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
    double field_norm_sq = 0.0;
    for_each_node([&](const Vec3& x, double w) {
      const Vec3 fx = field(x);
      field_norm_sq += w * fx.squaredNorm();
      for (std::size_t k = 0; k < m; ++k)
        rhs[static_cast<Eigen::Index>(k)] += w * dict_.gradient(k, x).dot(fx);
    });
    ProjectionResult res;
    res.coefficients = solve(rhs);
    const double proj_sq = res.coefficients.dot(rhs);
    res.projected_norm = std::sqrt(std::max(0.0, proj_sq));
    res.residual_norm = std::sqrt(std::max(0.0, field_norm_sq - proj_sq));
    return res;
  }

  /// Norm of the equivalence class of the field in the shape tangent space:
  /// min over fundamental fields u of |P(field) - P(u)|_{L2(mu_t)}.
  double quotient_norm(const VectorFieldFn& field) const {
    const ProjectionResult pf = project(field);
    Eigen::MatrixXd coef(pf.coefficients.size(), 6);
    Eigen::MatrixXd rhs(pf.coefficients.size(), 6);
    const auto gens = generators();
    for (int j = 0; j < 6; ++j) {
      const ProjectionResult pg = project(gens[static_cast<std::size_t>(j)]);
      coef.col(j) = pg.coefficients;
      rhs.col(j) = gram_ * pg.coefficients;
    }
    const Eigen::MatrixXd normal = coef.transpose() * rhs;  // A^T G A
    const Eigen::VectorXd target = rhs.transpose() * pf.coefficients;
    const Eigen::VectorXd lambda = pseudo_solve(normal, target);
    const Eigen::VectorXd diff = pf.coefficients - coef * lambda;
    const double norm_sq = diff.dot(gram_ * diff);
    return std::sqrt(std::max(0.0, norm_sq));
  }

  /// dim of the projected tangent surrogate minus dim of the projected
  /// orbit directions U_mu.
  int quotient_dimension() const {
    const double lmax = eig_.eigenvalues().maxCoeff();
    int rank_t = 0;
    for (Eigen::Index i = 0; i < eig_.eigenvalues().size(); ++i)
      if (eig_.eigenvalues()[i] > 1e-10 * lmax) ++rank_t;
    Eigen::MatrixXd coef(gram_.rows(), 6);
    const auto gens = generators();
    for (int j = 0; j < 6; ++j)
      coef.col(j) = project(gens[static_cast<std::size_t>(j)]).coefficients;
    const Eigen::MatrixXd normal = coef.transpose() * gram_ * coef;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(normal);
    const double nmax = std::max(es.eigenvalues().maxCoeff(), 1e-300);
    int rank_u = 0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
      if (es.eigenvalues()[i] > 1e-10 * nmax) ++rank_u;
    return rank_t - rank_u;
  }

 private:
  static std::array<VectorFieldFn, 6> generators() {
    std::array<VectorFieldFn, 6> gens;
    for (int i = 0; i < 3; ++i) {
      Vec3 e = Vec3::Zero();
      e[i] = 1.0;
      gens[static_cast<std::size_t>(i)] = FundamentalField{e, Vec3::Zero()};
      gens[static_cast<std::size_t>(3 + i)] = FundamentalField{Vec3::Zero(), e};
    }
    return gens;
  }

  template <typename Body>
  void for_each_node(Body&& body) const {
    const double scale = std::sqrt(2.0) * packet_.per_coord_sigma();
    const double norm = std::pow(M_PI, -1.5);
    const std::size_t n = rule_.nodes.size();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k) {
          const Vec3 x(scale * rule_.nodes[i], scale * rule_.nodes[j],
                       scale * rule_.nodes[k]);
          const double w =
              norm * rule_.weights[i] * rule_.weights[j] * rule_.weights[k];
          body(x, w);
        }
  }

  void assemble_gram() {
    const std::size_t m = dict_.size();
    gram_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m),
                                  static_cast<Eigen::Index>(m));
    std::vector<Vec3> grads(m);
    for_each_node([&](const Vec3& x, double w) {
      for (std::size_t k = 0; k < m; ++k) grads[k] = dict_.gradient(k, x);
      for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = a; b < m; ++b)
          gram_(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) +=
              w * grads[a].dot(grads[b]);
    });
    gram_ = gram_.selfadjointView<Eigen::Upper>();
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const {
    // Spectral solve; safe because the condition number was checked.
    const Eigen::VectorXd& ev = eig_.eigenvalues();
    const Eigen::MatrixXd& q = eig_.eigenvectors();
    Eigen::VectorXd y = q.transpose() * rhs;
    for (Eigen::Index i = 0; i < y.size(); ++i) y[i] /= ev[i];
    return q * y;
  }

  static Eigen::VectorXd pseudo_solve(const Eigen::MatrixXd& m,
                                      const Eigen::VectorXd& rhs) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    const double lmax = std::max(es.eigenvalues().maxCoeff(), 1e-300);
    Eigen::VectorXd y = es.eigenvectors().transpose() * rhs;
    for (Eigen::Index i = 0; i < y.size(); ++i)
      y[i] = es.eigenvalues()[i] > 1e-10 * lmax ? y[i] / es.eigenvalues()[i]
                                                : 0.0;
    return es.eigenvectors() * y;
  }

  GaussianPacket packet_;
  GradientDictionary dict_;
  QuadratureRule rule_;
  Eigen::MatrixXd gram_;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig_;
  double condition_ = 0.0;
};

/// Convenience wrappers matching the operation surface.

inline ProjectionResult project_tangent(const VectorFieldFn& field,
                                        const GaussianPacket& packet,
                                        const GradientDictionary& dict) {
  return TangentProjector(packet, dict).project(field);
}

inline double quotient_tangent_norm(const VectorFieldFn& field,
                                    const GaussianPacket& packet,
                                    const GradientDictionary& dict) {
  return TangentProjector(packet, dict).quotient_norm(field);
}

/// Dimension of the shape tangent space at a Dirac measure: the constant
/// fields R^3 are cancelled exactly by the translations inside U_delta.
/// Computed as 3 minus the rank of the fundamental fields evaluated at the
/// Dirac point.
inline int dirac_shape_tangent_dim(const Vec3& point = Vec3::Zero()) {
  Eigen::Matrix<double, 3, 6> u;
  for (int i = 0; i < 3; ++i) {
    Vec3 e = Vec3::Zero();
    e[i] = 1.0;
    u.col(i) = e.cross(point);  // rotation generators evaluated at the point
    u.col(3 + i) = e;           // translation generators
  }
  Eigen::JacobiSVD<Eigen::Matrix<double, 3, 6>> svd(u);
  const double smax = svd.singularValues().maxCoeff();
  int rank = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()[i] > 1e-12 * std::max(smax, 1.0)) ++rank;
  return 3 - rank;
}

}  // namespace gwot
