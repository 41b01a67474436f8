#pragma once

// Closed-form quantities of the freely evolving isotropic Gaussian packet:
// density, phase, velocity field, the scaling flow map between times, the
// Wasserstein distance along the curve, Fisher information, metric
// derivative, the spreading law and the translated-measure Pythagoras
// identity.
//
// Notation used throughout (p = PhysParams, c = p.spread_rate()):
//   G(t) = 1 + c t^2                     dimensionless width growth
//   A(t) = 1 / (l^2 G(t))                inverse squared width
//   K(t) = (hbar^2 t / m) / (l^4 + hbar^2 t^2 / m^2)   phase curvature
// so that rho = (l^2 pi)^{-3/2} G^{-3/2} exp(-A |x|^2), grad S = K x.

#include <cmath>

#include "gwot/core.hpp"

namespace gwot {

// ---------------------------------------------------------------------------
// Density and phase
// ---------------------------------------------------------------------------

/// Probability density rho(x, t).  Integrates to one.
inline double density(const PhysParams& p, double t, const Vec3& x) {
  validate_params(p);
  require_time(t);
  const double l2pi = p.width * p.width * M_PI;
  const double norm = std::pow(l2pi * p.growth(t), -1.5);
  return norm * std::exp(-p.inv_width_sq(t) * x.squaredNorm());
}

/// Coefficient K(t) of the phase gradient, grad S = K(t) x.
inline double phase_gradient_coefficient(const PhysParams& p, double t) {
  validate_params(p);
  require_time(t);
  const double denom = std::pow(p.width, 4) +
                       (p.hbar * t / p.mass) * (p.hbar * t / p.mass);
  return (p.hbar * p.hbar * t / p.mass) / denom;
}

/// Phase S(x, t) of the wave function (psi = sqrt(rho) exp(i S / hbar)):
/// quadratic in |x| plus the time-dependent Gouy-type offset.
inline double phase(const PhysParams& p, double t, const Vec3& x) {
  const double quad = 0.5 * phase_gradient_coefficient(p, t) * x.squaredNorm();
  const double offset =
      -1.5 * p.hbar * std::atan(p.hbar * t / (p.mass * p.width * p.width));
  return quad + offset;
}

/// grad S(x, t) = K(t) x.
inline Vec3 phase_gradient(const PhysParams& p, double t, const Vec3& x) {
  return phase_gradient_coefficient(p, t) * x;
}

/// Accompanying vector field of the curve mu_t: v = (1/m) grad S.
inline Vec3 velocity(const PhysParams& p, double t, const Vec3& x) {
  return phase_gradient(p, t, x) / p.mass;
}

/// Coefficient of the velocity field, v = velocity_coefficient(t) x.
inline double velocity_coefficient(const PhysParams& p, double t) {
  return phase_gradient_coefficient(p, t) / p.mass;
}

/// Quantum potential Q = -(hbar^2 / 2m) (Laplacian sqrt(rho)) / sqrt(rho).
/// For the Gaussian, (Laplacian sqrt rho)/sqrt rho = A^2 |x|^2 - 3 A.
inline double quantum_potential(const PhysParams& p, double t, const Vec3& x) {
  validate_params(p);
  require_time(t);
  const double a = p.inv_width_sq(t);
  return -(p.hbar * p.hbar / (2.0 * p.mass)) *
         (a * a * x.squaredNorm() - 3.0 * a);
}

// ---------------------------------------------------------------------------
// Madelung system residuals
// ---------------------------------------------------------------------------

/// Time derivative of the density, d/dt rho = rho (G'/G) (A |x|^2 - 3/2).
inline double density_dt(const PhysParams& p, double t, const Vec3& x) {
  const double g = p.growth(t);
  const double gdot = 2.0 * p.spread_rate() * t;
  return density(p, t, x) * (gdot / g) *
         (p.inv_width_sq(t) * x.squaredNorm() - 1.5);
}

/// Divergence of the probability current j = rho v.
inline double current_divergence(const PhysParams& p, double t, const Vec3& x) {
  const double k_over_m = velocity_coefficient(p, t);
  return density(p, t, x) * k_over_m *
         (3.0 - 2.0 * p.inv_width_sq(t) * x.squaredNorm());
}

/// Time derivative of the phase.
inline double phase_dt(const PhysParams& p, double t, const Vec3& x) {
  validate_params(p);
  require_time(t);
  const double d = std::pow(p.width, 4) + (p.hbar * t / p.mass) * (p.hbar * t / p.mass);
  const double kdot = (p.hbar * p.hbar / p.mass) / d -
                      2.0 * std::pow(p.hbar, 4) * t * t /
                          (std::pow(p.mass, 3) * d * d);
  const double offset_dot = -1.5 * p.hbar * p.hbar /
                            (p.mass * p.width * p.width * p.growth(t));
  return 0.5 * kdot * x.squaredNorm() + offset_dot;
}

/// Residuals of the two Madelung equations, evaluated from independent
/// closed-form partial derivatives.  Both vanish (to floating-point
/// cancellation) on the exact packet.
struct MadelungResidual {
  double continuity = 0.0;       // d/dt rho + div j
  double hamilton_jacobi = 0.0;  // dS/dt + |grad S|^2 / 2m + Q   (V = 0)
};

inline MadelungResidual madelung_residual(const PhysParams& p, double t,
                                          const Vec3& x) {
  MadelungResidual r;
  r.continuity = density_dt(p, t, x) + current_divergence(p, t, x);
  const Vec3 grad_s = phase_gradient(p, t, x);
  r.hamilton_jacobi = phase_dt(p, t, x) +
                      grad_s.squaredNorm() / (2.0 * p.mass) +
                      quantum_potential(p, t, x);
  return r;
}

// ---------------------------------------------------------------------------
// Flow map and pushforward
// ---------------------------------------------------------------------------

/// Scaling factor C(s, t) = sqrt(G(t) / G(s)) of the flow of (1/m) grad S.
inline double scaling(const PhysParams& p, double s, double t) {
  validate_params(p);
  require_time(s);
  require_time(t);
  return std::sqrt(p.growth(t) / p.growth(s));
}

/// Flow map F_s(x, t) = C(s, t) x; satisfies the group law exactly.
inline Vec3 flow_map(const PhysParams& p, double s, double t, const Vec3& x) {
  return scaling(p, s, t) * x;
}

/// Change-of-variables defect |rho_s(F^{-1} x) C^{-3} - rho_t(x)|; zero when
/// mu_t is the pushforward of mu_s under the flow.
inline double pushforward_residual(const PhysParams& p, double s, double t,
                                   const Vec3& x) {
  const double c = scaling(p, s, t);
  const double transported = density(p, s, x / c) / (c * c * c);
  return std::abs(transported - density(p, t, x));
}

// ---------------------------------------------------------------------------
// Distances
// ---------------------------------------------------------------------------

/// W2 distance between two centered isotropic Gaussians with per-coordinate
/// deviations sigma1, sigma2 and mean offset a.
inline double w2_isotropic_gaussians(const Vec3& a, double sigma1,
                                     double sigma2) {
  const double ds = sigma1 - sigma2;
  return std::sqrt(a.squaredNorm() + 3.0 * ds * ds);
}

/// Wasserstein distance along the curve,
/// W(mu_s, mu_t) = sqrt(3/2) l |sqrt(G(s)) - sqrt(G(t))|.
inline double w2_closed_form(const PhysParams& p, double s, double t) {
  validate_params(p);
  require_time(s);
  require_time(t);
  return std::sqrt(1.5) * p.width *
         std::abs(std::sqrt(p.growth(s)) - std::sqrt(p.growth(t)));
}

/// Distance to the translate, W(g mu_s, mu_t) with g = (translation by a):
/// the Pythagoras identity W^2 + |a|^2.
inline double w2_translated(const PhysParams& p, double s, double t,
                            const Vec3& a) {
  const double w = w2_closed_form(p, s, t);
  return std::sqrt(w * w + a.squaredNorm());
}

/// Metric derivative of the curve, |mu'_t| = |(1/m) grad S|_{L^2(mu_t)}
///                                = sqrt(3/2) (hbar^2 t / (m^2 l^3)) G^{-1/2};
/// equals d/dt w2_closed_form(t0, t) for every t > t0.
inline double metric_derivative(const PhysParams& p, double t) {
  validate_params(p);
  require_time(t);
  const double num = std::sqrt(1.5) * p.hbar * p.hbar * t /
                     (p.mass * p.mass * std::pow(p.width, 3));
  return num / std::sqrt(p.growth(t));
}

/// Fisher information I(mu_t) = 6 A(t) = 6 / (l^2 G(t)), strictly decreasing
/// whenever c > 0.
inline double fisher_information(const PhysParams& p, double t) {
  validate_params(p);
  require_time(t);
  return 6.0 * p.inv_width_sq(t);
}

/// Total position variance, integral of |x|^2 dmu_t = (3/2) l^2 G(t).
inline double variance(const PhysParams& p, double t) {
  validate_params(p);
  require_time(t);
  return 1.5 * p.width * p.width * p.growth(t);
}

/// Velocity-spread constant of the spreading law
/// sigma_x^2(t) = sigma_v^2 t^2 + sigma_x^2(0).
inline double sigma_v_sq(const PhysParams& p) {
  validate_params(p);
  return 1.5 * p.width * p.width * p.spread_rate();
}

// ---------------------------------------------------------------------------
// Displacement interpolation
// ---------------------------------------------------------------------------

/// Per-coordinate deviation of the McCann interpolant between mu_s and mu_t:
/// sigma(tau) = (1 - tau) sigma_s + tau sigma_t.  The interpolating curve is
/// the constant-speed geodesic induced by the (linear) optimal map.
inline double mccann_interpolate(const PhysParams& p, double s, double t,
                                 double tau) {
  validate_params(p);
  require_time(s);
  require_time(t);
  if (!(tau >= 0.0 && tau <= 1.0))
    throw InvalidInterpolant("interpolation parameter must lie in [0,1]");
  const double sig_s = GaussianPacket(p, s).per_coord_sigma();
  const double sig_t = GaussianPacket(p, t).per_coord_sigma();
  return (1.0 - tau) * sig_s + tau * sig_t;
}

}  // namespace gwot
