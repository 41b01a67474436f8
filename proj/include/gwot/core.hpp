#pragma once

// Core domain types shared by every other header: physical parameters of the
// packet family, the packet state itself, isometries of R^3 and their
// infinitesimal generators, and the discrete-measure / coupling containers
// used by the numerical transport oracles.
//
// All types are immutable value objects; every operation is pure.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace gwot {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonPositiveConstant final : Error { using Error::Error; };
struct NonOrthogonal final : Error { using Error::Error; };
struct NoConvergence : Error { using Error::Error; };
struct InvalidInterpolant final : Error { using Error::Error; };
struct NonFiniteIntegrand final : Error { using Error::Error; };
struct SizeLimitExceeded final : Error { using Error::Error; };
struct DegenerateTimes final : Error { using Error::Error; };
struct IllConditioned final : Error { using Error::Error; };
struct InvalidArgument final : Error { using Error::Error; };

// ---------------------------------------------------------------------------
// Physical parameters
// ---------------------------------------------------------------------------

/// Constants (hbar, m, l) defining the isotropic packet family.  The derived
/// spread rate c = hbar^2 / (m^2 l^4) controls every time dependence below:
/// all widths grow like sqrt(1 + c t^2).
struct PhysParams {
  double hbar = 1.0;
  double mass = 1.0;
  double width = 1.0;  // the initial length scale l

  /// Spread rate c = hbar^2 / (m^2 l^4), units 1/time^2.
  double spread_rate() const {
    const double ml2 = mass * width * width;
    return (hbar / ml2) * (hbar / ml2);
  }

  /// 1 + c t^2, the ubiquitous dimensionless width factor.
  double growth(double t) const { return 1.0 + spread_rate() * t * t; }

  /// Inverse squared width A(t) = (l^2 + hbar^2 t^2 / (m^2 l^2))^-1.
  /// The density is proportional to exp(-A(t) |x|^2).
  double inv_width_sq(double t) const {
    return 1.0 / (width * width * growth(t));
  }
};

/// Validates positivity and finiteness of all constants; returns the
/// parameters unchanged.  Throws NonPositiveConstant otherwise.
inline PhysParams validate_params(const PhysParams& p) {
  auto ok = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!ok(p.hbar)) throw NonPositiveConstant("hbar must be finite and > 0");
  if (!ok(p.mass)) throw NonPositiveConstant("mass must be finite and > 0");
  if (!ok(p.width)) throw NonPositiveConstant("width must be finite and > 0");
  if (!ok(p.spread_rate()))
    throw NonPositiveConstant("spread rate hbar^2/(m^2 l^4) is not finite");
  return p;
}

inline void require_time(double t) {
  if (!(t >= 0.0) || !std::isfinite(t))
    throw InvalidArgument("time must be a finite nonnegative real");
}

// ---------------------------------------------------------------------------
// Packet state
// ---------------------------------------------------------------------------

/// The centered isotropic Gaussian packet at a fixed time.
struct GaussianPacket {
  PhysParams params;
  double time = 0.0;

  GaussianPacket(const PhysParams& p, double t) : params(validate_params(p)), time(t) {
    require_time(t);
  }

  /// Variance of each coordinate, (l^2/2) (1 + c t^2).  Non-decreasing in t.
  double per_coord_variance() const {
    return 0.5 * params.width * params.width * params.growth(time);
  }

  /// Standard deviation of each coordinate.
  double per_coord_sigma() const { return std::sqrt(per_coord_variance()); }

  /// Density at the origin, (l^2 pi)^{-3/2} (1 + c t^2)^{-3/2}.
  double amplitude() const {
    const double l2pi = params.width * params.width * M_PI;
    return std::pow(l2pi * params.growth(time), -1.5);
  }
};

// ---------------------------------------------------------------------------
// Isometries of R^3 and their generators
// ---------------------------------------------------------------------------

inline double orthogonality_defect(const Mat3& rotation) {
  return ((rotation.transpose() * rotation) - Mat3::Identity())
      .cwiseAbs()
      .maxCoeff();
}

/// Element of ISO(R^3) = O(3) x| R^3, acting as x -> R x + a.  The orthogonal
/// part may have determinant -1 (reflections are allowed).
struct Isometry {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  // |R^T R - I|_max tolerance: double-precision orthogonalization noise floor.
  static constexpr double kOrthoTol = 1e-12;

  void require_orthogonal() const {
    if (!(orthogonality_defect(rotation) <= kOrthoTol))
      throw NonOrthogonal("rotation part is not orthogonal within 1e-12");
  }

  Vec3 apply(const Vec3& x) const { return rotation * x + translation; }

  Isometry inverse() const {
    Isometry g;
    g.rotation = rotation.transpose();
    g.translation = -(rotation.transpose() * translation);
    return g;
  }

  static Isometry identity() { return Isometry{}; }

  static Isometry translate(const Vec3& a) {
    Isometry g;
    g.translation = a;
    return g;
  }

  static Isometry rotate(const Mat3& r) {
    Isometry g;
    g.rotation = r;
    return g;
  }
};

/// apply_isometry validates orthogonality before acting.
inline Vec3 apply_isometry(const Isometry& g, const Vec3& x) {
  g.require_orthogonal();
  return g.apply(x);
}

/// Rotation about `axis_angle`/|axis_angle| by |axis_angle| radians
/// (Rodrigues map).  Zero vector gives the identity.
inline Mat3 rotation_from_axis_angle(const Vec3& axis_angle) {
  const double angle = axis_angle.norm();
  if (angle < 1e-300) return Mat3::Identity();
  return Eigen::AngleAxisd(angle, axis_angle / angle).toRotationMatrix();
}

/// Fundamental vector field of iso(3) = so(3) x| R^3, evaluating as
/// x -> omega x x + offset.  These span the orbit directions in shape space.
struct FundamentalField {
  Vec3 omega = Vec3::Zero();
  Vec3 offset = Vec3::Zero();

  Vec3 operator()(const Vec3& x) const { return omega.cross(x) + offset; }
};

// ---------------------------------------------------------------------------
// Discrete measures and couplings
// ---------------------------------------------------------------------------

/// Empirical measure: weighted points in R^3.  Weights must be nonnegative
/// and sum to one within 1e-12.
struct DiscreteMeasure {
  std::vector<Vec3> points;
  std::vector<double> weights;

  DiscreteMeasure() = default;

  DiscreteMeasure(std::vector<Vec3> pts, std::vector<double> w)
      : points(std::move(pts)), weights(std::move(w)) {
    validate();
  }

  /// Equal-weight measure on the given support.
  static DiscreteMeasure uniform(std::vector<Vec3> pts) {
    std::vector<double> w(pts.size(), 1.0 / static_cast<double>(pts.size()));
    return DiscreteMeasure(std::move(pts), std::move(w));
  }

  std::size_t size() const { return points.size(); }

  void validate() const {
    if (points.size() != weights.size())
      throw InvalidArgument("points/weights size mismatch");
    if (points.empty()) throw InvalidArgument("empty support");
    double sum = 0.0;
    for (double w : weights) {
      if (!(w >= 0.0)) throw InvalidArgument("negative weight");
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-12)
      throw InvalidArgument("weights must sum to 1 within 1e-12");
  }

  DiscreteMeasure pushforward(const Isometry& g) const {
    g.require_orthogonal();
    DiscreteMeasure out;
    out.points.reserve(points.size());
    for (const Vec3& x : points) out.points.push_back(g.apply(x));
    out.weights = weights;
    return out;
  }
};

/// Dense coupling between two discrete measures.  Rows index the source
/// support, columns the target support.
struct TransportPlan {
  Eigen::MatrixXd coupling;

  /// Largest deviation of a row or column sum from the prescribed marginal.
  double marginal_violation(const DiscreteMeasure& mu,
                            const DiscreteMeasure& nu) const {
    double worst = 0.0;
    const Eigen::VectorXd row = coupling.rowwise().sum();
    const Eigen::VectorXd col = coupling.colwise().sum();
    for (Eigen::Index i = 0; i < row.size(); ++i)
      worst = std::max(worst, std::abs(row[i] - mu.weights[static_cast<std::size_t>(i)]));
    for (Eigen::Index j = 0; j < col.size(); ++j)
      worst = std::max(worst, std::abs(col[j] - nu.weights[static_cast<std::size_t>(j)]));
    return worst;
  }

  /// Admissibility check, Adm(mu, nu): marginals reproduced within tol and
  /// all entries nonnegative.
  bool admissible(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                  double tol = 1e-8) const {
    if (coupling.rows() != static_cast<Eigen::Index>(mu.size()) ||
        coupling.cols() != static_cast<Eigen::Index>(nu.size()))
      return false;
    if ((coupling.array() < 0.0).any()) return false;
    return marginal_violation(mu, nu) <= tol;
  }
};

/// Squared-distance transport cost of a plan, sum_ij pi_ij |x_i - y_j|^2.
inline double plan_cost(const TransportPlan& plan, const DiscreteMeasure& mu,
                        const DiscreteMeasure& nu) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < plan.coupling.rows(); ++i)
    for (Eigen::Index j = 0; j < plan.coupling.cols(); ++j)
      total += plan.coupling(i, j) *
               (mu.points[static_cast<std::size_t>(i)] -
                nu.points[static_cast<std::size_t>(j)])
                   .squaredNorm();
  return total;
}

}  // namespace gwot
