#pragma once

// Deterministic randomness utilities.
//
// Draws are counter-based: the k-th deviate of a stream is a pure function of
// (seed, k), so sampling is reproducible bit-for-bit regardless of evaluation
// order or thread count.  Uniforms come from the splitmix64 mixing function
// (Steele, Lea, Flood 2014); normal deviates are obtained by the inverse-CDF
// method using Wichura's AS241 algorithm, which keeps streams identical
// across implementations that follow the same recipe.

#include <cmath>
#include <cstdint>

#include "gwot/core.hpp"

namespace gwot {

/// Name recorded in report metadata for reproducibility.
inline constexpr const char* rng_algorithm_name = "splitmix64-inverse-cdf";

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

/// k-th uniform of the stream with the given seed, strictly inside (0,1).
inline double uniform_at(std::uint64_t seed, std::uint64_t k) {
  const std::uint64_t bits =
      detail::splitmix64(seed ^ detail::splitmix64(k + 0x632be59bd9b4e019ULL));
  // 53-bit mantissa, offset by half a grid cell so 0 and 1 are unreachable.
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1p-53;
}

/// Standard normal quantile function Phi^{-1}(p), Wichura's algorithm AS241
/// (Applied Statistics 37, 1988).  Relative accuracy ~1e-15 on (0,1).
inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw InvalidArgument("normal_quantile requires p in (0,1)");
  const double q = p - 0.5;
  double r, val;
  if (std::abs(q) <= 0.425) {
    r = 0.180625 - q * q;
    val = q *
          (((((((2509.0809287301226727 * r + 33430.575583588128105) * r +
                67265.770927008700853) * r + 45921.953931549871457) * r +
              13731.693765509461125) * r + 1971.5909503065514427) * r +
            133.14166789178437745) * r + 3.387132872796366608) /
          (((((((5226.495278852545703 * r + 28729.085735721942674) * r +
                39307.89580009271061) * r + 21213.794301586595867) * r +
              5394.1960214247511077) * r + 687.1870074920579083) * r +
            42.313330701600911252) * r + 1.0);
    return val;
  }
  r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  if (r <= 5.0) {
    r -= 1.6;
    val = (((((((7.7454501427834140764e-4 * r + 0.0227238449892691845833) * r +
                0.24178072517745061177) * r + 1.27045825245236838258) * r +
              3.64784832476320460504) * r + 5.7694972214606914055) * r +
            4.6303378461565452959) * r + 1.42343711074968357734) /
          (((((((1.05075007164441684324e-9 * r + 5.475938084995344946e-4) * r +
                0.0151986665636164571966) * r + 0.14810397642748007459) * r +
              0.68976733498510000455) * r + 1.6763848301838038494) * r +
            2.05319162663775882187) * r + 1.0);
  } else {
    r -= 5.0;
    val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                0.0012426609473880784386) * r + 0.026532189526576123093) * r +
              0.29656057182850489123) * r + 1.7848265399172913358) * r +
            5.4637849111641143699) * r + 6.6579046435011037772) /
          (((((((2.04426310338993978564e-15 * r + 1.4215117583164458887e-7) * r +
                1.8463183175100546818e-5) * r + 7.868691311456132591e-4) * r +
              0.0148753612908506148525) * r + 0.13692988092273580531) * r +
            0.59983220655588793769) * r + 1.0);
  }
  return q < 0.0 ? -val : val;
}

/// Standard normal CDF.
inline double normal_cdf(double z) {
  return 0.5 * std::erfc(-z * M_SQRT1_2);
}

/// Standard normal density.
inline double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
}

/// k-th standard normal deviate of the stream with the given seed.
inline double normal_at(std::uint64_t seed, std::uint64_t k) {
  return normal_quantile(uniform_at(seed, k));
}

}  // namespace gwot
