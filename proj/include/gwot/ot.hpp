#pragma once

// Independent numerical optimal-transport oracles:
//   * exact 1D quantile transport for isotropic Gaussian marginals,
//   * entropic Sinkhorn (log-stabilized scaling form with epsilon
//     annealing, optional divergence debiasing),
//   * exact assignment on equal-weight supports (Hungarian method),
//   * c-cyclical-monotonicity spot checks and barycentric map recovery.
//
// These adjudicate every closed-form distance and optimality claim of the
// analytic module; nothing here uses the closed-form distance itself.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <set>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gwot/analytic.hpp"
#include "gwot/core.hpp"
#include "gwot/rng.hpp"

namespace gwot {

// ---------------------------------------------------------------------------
// Quantile transport oracle
// ---------------------------------------------------------------------------

namespace detail {

/// 1D squared W2 between N(shift, s1^2) and N(0, s2^2) by monotone quantile
/// coupling on the midpoint grid of (0,1).  The difference of quantiles is
/// shift + (s1 - s2) z(q).  The two boundary windows, where z(q) is
/// singular, are integrated exactly via normal partial moments
/// (singularity subtraction); midpoint cells cover the interior.
inline double quantile_w2sq_1d(double shift, double s1, double s2,
                               std::size_t n) {
  const double ds = s1 - s2;
  const std::size_t cut = std::clamp<std::size_t>(n / 1000, 4, n / 4);
  double core = 0.0;
  for (std::size_t k = cut; k < n - cut; ++k) {
    const double q = (static_cast<double>(k) + 0.5) / static_cast<double>(n);
    const double d = shift + ds * normal_quantile(q);
    core += d * d;
  }
  core /= static_cast<double>(n);
  const double qcut = static_cast<double>(cut) / static_cast<double>(n);
  const double zl = normal_quantile(qcut);
  const double left = shift * shift * normal_cdf(zl) -
                      2.0 * shift * ds * normal_pdf(zl) +
                      ds * ds * (normal_cdf(zl) - zl * normal_pdf(zl));
  const double zr = normal_quantile(1.0 - qcut);
  const double tail_r = 1.0 - normal_cdf(zr);
  const double right = shift * shift * tail_r +
                       2.0 * shift * ds * normal_pdf(zr) +
                       ds * ds * (tail_r + zr * normal_pdf(zr));
  return core + left + right;
}

}  // namespace detail

/// W2(g mu_s, mu_t) for g = translation by a, computed coordinate-wise by
/// quantile coupling (the optimal map is a diagonal scaling composed with
/// the translation, so the problem separates).
inline double w2_quantile_isotropic(const PhysParams& p, double s, double t,
                                    const Vec3& a, std::size_t n_nodes) {
  validate_params(p);
  require_time(s);
  require_time(t);
  if (n_nodes < 1000)
    throw InvalidArgument("w2_quantile_isotropic requires n_nodes >= 1000");
  const double sig_s = GaussianPacket(p, s).per_coord_sigma();
  const double sig_t = GaussianPacket(p, t).per_coord_sigma();
  double total = 0.0;
  for (int axis = 0; axis < 3; ++axis)
    total += detail::quantile_w2sq_1d(a[axis], sig_s, sig_t, n_nodes);
  return std::sqrt(total);
}

// ---------------------------------------------------------------------------
// Entropic Sinkhorn
// ---------------------------------------------------------------------------

struct SinkhornConfig {
  std::vector<double> epsilon_schedule;  // strictly decreasing, last > 0
  int max_iters = 3000;                  // total full updates over all levels
  double marginal_tol = 1e-9;            // absolute, on marginal sums
  bool debiased = true;

  void validate() const {
    if (epsilon_schedule.empty())
      throw InvalidArgument("epsilon schedule must be non-empty");
    for (std::size_t i = 0; i + 1 < epsilon_schedule.size(); ++i)
      if (!(epsilon_schedule[i] > epsilon_schedule[i + 1]))
        throw InvalidArgument("epsilon schedule must be strictly decreasing");
    if (!(epsilon_schedule.back() > 0.0))
      throw InvalidArgument("final epsilon must be > 0");
    if (!(marginal_tol > 0.0)) throw InvalidArgument("marginal_tol must be > 0");
    if (max_iters < 1) throw InvalidArgument("max_iters must be >= 1");
  }

  static std::vector<double> geometric_schedule(double eps0, double eps_final,
                                                double ratio = 0.5) {
    if (!(eps0 >= eps_final) || !(eps_final > 0.0) || !(ratio > 0.0) ||
        !(ratio < 1.0))
      throw InvalidArgument("invalid geometric schedule parameters");
    std::vector<double> out;
    double e = eps0;
    while (e > eps_final * (1.0 + 1e-12)) {
      out.push_back(e);
      e *= ratio;
    }
    out.push_back(eps_final);
    return out;
  }
};

struct SinkhornResult {
  double value = 0.0;        // debiased divergence, or sharp cost if not
  TransportPlan plan;        // coupling of the (mu, nu) problem
  double sharp_cost = 0.0;   // sum_ij plan_ij C_ij
  double dual_value = 0.0;   // <f, mu> + <g, nu> at the fixed point
  double marginal_violation = 0.0;
  int iterations = 0;
  double epsilon = 0.0;      // final regularization level
  bool converged = false;
};

/// Raised when the marginal violation still exceeds marginal_tol after
/// max_iters; carries the last iterate.
struct SinkhornNoConvergence final : NoConvergence {
  explicit SinkhornNoConvergence(const std::string& what) : NoConvergence(what) {}
  SinkhornNoConvergence(const std::string& what, SinkhornResult last_iterate)
      : NoConvergence(what), last(std::move(last_iterate)) {}
  SinkhornResult last;
};

namespace detail {

inline Eigen::MatrixXd squared_cost_matrix(const DiscreteMeasure& mu,
                                           const DiscreteMeasure& nu) {
  const Eigen::Index n = static_cast<Eigen::Index>(mu.size());
  const Eigen::Index m = static_cast<Eigen::Index>(nu.size());
  Eigen::MatrixXd c(n, m);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < m; ++j)
      c(i, j) = (mu.points[static_cast<std::size_t>(i)] -
                 nu.points[static_cast<std::size_t>(j)])
                    .squaredNorm();
  return c;
}

struct ScalingState {
  Eigen::VectorXd f, g;  // log-domain potentials (absorbed)
  Eigen::MatrixXd kernel;
  Eigen::VectorXd u, v;  // residual scalings, kept near one

  void rebuild_kernel(const Eigen::MatrixXd& cost, double eps) {
    kernel = (((-cost).colwise() + f).rowwise() + g.transpose()) / eps;
    kernel = kernel.array().exp().matrix();
    u.setOnes(f.size());
    v.setOnes(g.size());
  }

  void absorb(double eps) {
    f += eps * u.array().log().matrix();
    g += eps * v.array().log().matrix();
  }
};

/// One annealed Sinkhorn solve in the log-stabilized scaling form
/// (Schmitzer 2019): cheap diagonal-scaling iterations on a kernel that is
/// rebuilt whenever the scalings drift too far from one, keeping every
/// entry representable at arbitrarily small epsilon.
inline SinkhornResult sinkhorn_core(const Eigen::MatrixXd& cost,
                                    const Eigen::VectorXd& wu,
                                    const Eigen::VectorXd& wv,
                                    const SinkhornConfig& cfg) {
  constexpr double kAbsorbThreshold = 25.0;  // on |log u|, |log v|
  constexpr int kAnnealIters = 4;            // per non-final level
  ScalingState st;
  st.f.setZero(cost.rows());
  st.g.setZero(cost.cols());
  int iterations = 0;
  double eps = cfg.epsilon_schedule.back();
  for (std::size_t level = 0; level < cfg.epsilon_schedule.size(); ++level) {
    eps = cfg.epsilon_schedule[level];
    const bool final_level = level + 1 == cfg.epsilon_schedule.size();
    st.rebuild_kernel(cost, eps);
    while (true) {
      const Eigen::VectorXd row = st.kernel * st.v.cwiseProduct(wv);
      const double viol_row =
          (wu.array() * (st.u.array() * row.array() - 1.0)).abs().maxCoeff();
      if (!(row.array() > 0.0).all() || !row.allFinite()) {
        SinkhornResult bad;
        bad.iterations = iterations;
        bad.epsilon = eps;
        throw SinkhornNoConvergence("sinkhorn scaling broke down numerically", bad);
      }
      const bool done = final_level && viol_row < cfg.marginal_tol &&
                        iterations > 0;
      if (done) break;
      st.u = row.cwiseInverse();
      const Eigen::VectorXd col = st.kernel.transpose() * st.u.cwiseProduct(wu);
      st.v = col.cwiseInverse();
      ++iterations;
      const double drift =
          std::max(st.u.array().abs().log().abs().maxCoeff(),
                   st.v.array().abs().log().abs().maxCoeff());
      if (drift > kAbsorbThreshold) {
        st.absorb(eps);
        st.rebuild_kernel(cost, eps);
      }
      if (!final_level && iterations % kAnnealIters == 0) break;
      if (iterations >= cfg.max_iters) break;
    }
    st.absorb(eps);
    if (iterations >= cfg.max_iters && !final_level) break;
  }

  st.rebuild_kernel(cost, eps);
  SinkhornResult res;
  res.epsilon = eps;
  res.iterations = iterations;
  res.plan.coupling =
      st.kernel.array() * (wu * wv.transpose()).array();
  res.sharp_cost = (res.plan.coupling.array() * cost.array()).sum();
  res.dual_value = st.f.dot(wu) + st.g.dot(wv);
  const Eigen::VectorXd rows = res.plan.coupling.rowwise().sum();
  const Eigen::VectorXd cols = res.plan.coupling.colwise().sum();
  res.marginal_violation =
      std::max((rows - wu).cwiseAbs().maxCoeff(),
               (cols - wv).cwiseAbs().maxCoeff());
  res.converged = res.marginal_violation <= cfg.marginal_tol;
  res.value = res.sharp_cost;
  return res;
}

}  // namespace detail

/// Entropic estimate of W2^2(mu, nu) with the final coupling.  With
/// cfg.debiased the value is the Sinkhorn divergence
///   OT_eps(mu, nu) - OT_eps(mu, mu)/2 - OT_eps(nu, nu)/2
/// in the dual form, which removes both the entropic offset and most of the
/// finite-sample bias; otherwise it is the sharp cost of the coupling.
/// Throws NoConvergence (with the last iterate) if the marginal violation
/// of the (mu, nu) problem still exceeds marginal_tol after max_iters.
inline SinkhornResult sinkhorn_distance(const DiscreteMeasure& mu,
                                        const DiscreteMeasure& nu,
                                        const SinkhornConfig& cfg) {
  mu.validate();
  nu.validate();
  cfg.validate();
  const Eigen::VectorXd wu = Eigen::Map<const Eigen::VectorXd>(
      mu.weights.data(), static_cast<Eigen::Index>(mu.size()));
  const Eigen::VectorXd wv = Eigen::Map<const Eigen::VectorXd>(
      nu.weights.data(), static_cast<Eigen::Index>(nu.size()));
  const Eigen::MatrixXd cost = detail::squared_cost_matrix(mu, nu);
  if (!cost.allFinite()) throw InvalidArgument("non-finite cost matrix");
  SinkhornResult main = detail::sinkhorn_core(cost, wu, wv, cfg);
  if (cfg.debiased) {
    const SinkhornResult self_mu = detail::sinkhorn_core(
        detail::squared_cost_matrix(mu, mu), wu, wu, cfg);
    const SinkhornResult self_nu = detail::sinkhorn_core(
        detail::squared_cost_matrix(nu, nu), wv, wv, cfg);
    main.value = main.dual_value - 0.5 * self_mu.dual_value -
                 0.5 * self_nu.dual_value;
  }
  if (!main.converged)
    throw SinkhornNoConvergence(
        "sinkhorn marginal violation above tolerance after max_iters", main);
  return main;
}

/// Mean squared cost under the product coupling,
/// E|x|^2 + E|y|^2 - 2 <E x, E y>, computed in O(n + m).
inline double mean_pairwise_squared_cost(const DiscreteMeasure& mu,
                                         const DiscreteMeasure& nu) {
  double ex2 = 0.0, ey2 = 0.0;
  Vec3 ex = Vec3::Zero(), ey = Vec3::Zero();
  for (std::size_t i = 0; i < mu.size(); ++i) {
    ex2 += mu.weights[i] * mu.points[i].squaredNorm();
    ex += mu.weights[i] * mu.points[i];
  }
  for (std::size_t j = 0; j < nu.size(); ++j) {
    ey2 += nu.weights[j] * nu.points[j].squaredNorm();
    ey += nu.weights[j] * nu.points[j];
  }
  return ex2 + ey2 - 2.0 * ex.dot(ey);
}

/// Default annealing schedule for a given cost matrix scale: geometric decay
/// from the mean cost down to a moderate fraction of it.  The final level is
/// chosen for value accuracy of the debiased divergence, where both the
/// entropic and the finite-sample bias stay small.
inline SinkhornConfig default_sinkhorn_config(double mean_cost) {
  SinkhornConfig cfg;
  cfg.epsilon_schedule =
      SinkhornConfig::geometric_schedule(mean_cost, 0.15 * mean_cost, 0.5);
  return cfg;
}

// ---------------------------------------------------------------------------
// Exact assignment
// ---------------------------------------------------------------------------

struct AssignmentResult {
  double value = 0.0;              // mean squared matching cost
  std::vector<int> permutation;    // source index -> target index
};

namespace detail {

/// Hungarian method with potentials (Jonker-Volgenant style shortest
/// augmenting paths), O(n^3).  Returns the row -> column assignment
/// minimizing the total cost.
inline std::vector<int> solve_assignment(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<double> v(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<int> match(static_cast<std::size_t>(n) + 1, 0);
  std::vector<int> way(static_cast<std::size_t>(n) + 1, 0);
  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(n) + 1, kInf);
    std::vector<bool> used(static_cast<std::size_t>(n) + 1, false);
    do {
      used[static_cast<std::size_t>(j0)] = true;
      const int i0 = match[static_cast<std::size_t>(j0)];
      int j1 = -1;
      double delta = kInf;
      for (int j = 1; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const double cur = cost(i0 - 1, j - 1) -
                           u[static_cast<std::size_t>(i0)] -
                           v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(match[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (match[static_cast<std::size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<std::size_t>(j0)];
      match[static_cast<std::size_t>(j0)] = match[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(static_cast<std::size_t>(n), -1);
  for (int j = 1; j <= n; ++j)
    if (match[static_cast<std::size_t>(j)] > 0)
      row_to_col[static_cast<std::size_t>(match[static_cast<std::size_t>(j)] - 1)] =
          j - 1;
  return row_to_col;
}

}  // namespace detail

/// Exact Monge solution on equal-weight empirical measures: the minimal mean
/// squared matching cost over all permutations and a minimizing permutation.
inline AssignmentResult exact_assignment_w2(const std::vector<Vec3>& points_a,
                                            const std::vector<Vec3>& points_b) {
  if (points_a.size() != points_b.size())
    throw InvalidArgument("exact_assignment_w2 requires equal point counts");
  if (points_a.empty()) throw InvalidArgument("empty point sets");
  if (points_a.size() > 512)
    throw SizeLimitExceeded("exact_assignment_w2 is capped at n = 512");
  const int n = static_cast<int>(points_a.size());
  Eigen::MatrixXd cost(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      cost(i, j) = (points_a[static_cast<std::size_t>(i)] -
                    points_b[static_cast<std::size_t>(j)])
                       .squaredNorm();
  AssignmentResult res;
  res.permutation = detail::solve_assignment(cost);
  double total = 0.0;
  for (int i = 0; i < n; ++i)
    total += cost(i, res.permutation[static_cast<std::size_t>(i)]);
  res.value = total / n;
  return res;
}

// ---------------------------------------------------------------------------
// c-cyclical monotonicity
// ---------------------------------------------------------------------------

/// Samples `trials` random k-subsets of the plan support and counts the
/// distinct (subset, cyclic shift) families whose rotation strictly lowers
/// the total squared cost.  Optimal supports yield zero.
inline int c_monotonicity_violations(
    const std::vector<std::pair<Vec3, Vec3>>& plan_support, int k, int trials,
    std::uint64_t seed) {
  if (k < 2) throw InvalidArgument("c_monotonicity_violations requires k >= 2");
  const std::size_t n = plan_support.size();
  if (n < static_cast<std::size_t>(k))
    throw InvalidArgument("support smaller than subset size k");
  std::set<std::vector<int>> violating;  // canonical (sorted subset, shift)
  std::uint64_t counter = 0;
  for (int trial = 0; trial < trials; ++trial) {
    std::vector<int> idx;
    idx.reserve(static_cast<std::size_t>(k));
    while (idx.size() < static_cast<std::size_t>(k)) {
      const int cand = std::min<int>(
          static_cast<int>(uniform_at(seed, counter++) * static_cast<double>(n)),
          static_cast<int>(n) - 1);
      if (std::find(idx.begin(), idx.end(), cand) == idx.end())
        idx.push_back(cand);
    }
    std::sort(idx.begin(), idx.end());
    double base = 0.0;
    for (int i : idx)
      base += (plan_support[static_cast<std::size_t>(i)].first -
               plan_support[static_cast<std::size_t>(i)].second)
                  .squaredNorm();
    const double guard = 1e-12 * (1.0 + std::abs(base));
    for (int shift = 1; shift < k; ++shift) {
      double rotated = 0.0;
      for (int pos = 0; pos < k; ++pos) {
        const int xi = idx[static_cast<std::size_t>(pos)];
        const int yi = idx[static_cast<std::size_t>((pos + shift) % k)];
        rotated += (plan_support[static_cast<std::size_t>(xi)].first -
                    plan_support[static_cast<std::size_t>(yi)].second)
                       .squaredNorm();
      }
      if (rotated < base - guard) {
        std::vector<int> key = idx;
        key.push_back(shift);
        violating.insert(std::move(key));
      }
    }
  }
  return static_cast<int>(violating.size());
}

// ---------------------------------------------------------------------------
// Barycentric map recovery
// ---------------------------------------------------------------------------

/// RMS deviation (weighted by mu) between the plan's barycentric projection
/// and the analytic map x -> scaling(p, s, t) x.
inline double barycentric_map_error(const TransportPlan& plan,
                                    const DiscreteMeasure& mu,
                                    const DiscreteMeasure& nu,
                                    const PhysParams& p, double s, double t) {
  if (plan.coupling.rows() != static_cast<Eigen::Index>(mu.size()) ||
      plan.coupling.cols() != static_cast<Eigen::Index>(nu.size()))
    throw InvalidArgument("plan dimensions do not match the measures");
  const double c = scaling(p, s, t);
  double total = 0.0;
  for (Eigen::Index i = 0; i < plan.coupling.rows(); ++i) {
    const double mass = plan.coupling.row(i).sum();
    if (mass <= 0.0) continue;
    Vec3 barycenter = Vec3::Zero();
    for (Eigen::Index j = 0; j < plan.coupling.cols(); ++j)
      barycenter += plan.coupling(i, j) * nu.points[static_cast<std::size_t>(j)];
    barycenter /= mass;
    const Vec3 target = c * mu.points[static_cast<std::size_t>(i)];
    total += mu.weights[static_cast<std::size_t>(i)] *
             (barycenter - target).squaredNorm();
  }
  return std::sqrt(total);
}

}  // namespace gwot
