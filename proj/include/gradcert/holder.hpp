#ifndef GRADCERT_HOLDER_HPP_
#define GRADCERT_HOLDER_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "linalg.hpp"
#include "objective.hpp"
#include "random.hpp"

namespace gradcert {

// Empirical estimation of (c, alpha) in the one-sided monotonicity bound
//   <grad F(x) - grad F(y), x - y> <= c |x - y|^{1 + alpha}   for x, y in C.
// Every estimate is a supremum over a finite sample and therefore a lower
// bound on the smallest valid c.

struct SamplePair {
  Vector x;
  Vector y;
};

struct HolderEstimate {
  double alpha = 1.0;
  double c_hat = 0.0;
  std::size_t n_pairs = 0;  // pairs that entered the sup (distance and finiteness filters)
  SamplePair max_ratio_pair;
  std::uint64_t seed = 0;
  Norm norm = Norm::l2;
  // Least-squares slope of log M_b against log distance; estimate_alpha only.
  std::optional<double> raw_slope;
};

/// Pairs with independent uniform endpoints. Sequential in the seed stream:
/// the first k pairs of an n-pair sample equal the k-pair sample.
inline std::vector<SamplePair> sample_uniform_pairs(const ConvexRegion& region, std::size_t n_pairs,
                                                    std::uint64_t seed) {
  Rng rng(seed, Stream::holder_pairs);
  std::vector<SamplePair> pairs;
  pairs.reserve(n_pairs);
  for (std::size_t k = 0; k < n_pairs; ++k) {
    Vector x = region.sample(rng);
    Vector y = region.sample(rng);
    pairs.push_back({std::move(x), std::move(y)});
  }
  return pairs;
}

/// Pairs whose separations are log-uniform over [1e-4 diam, diam]: x uniform,
/// direction uniform, y = x + rho*u clipped to the region boundary.
inline std::vector<SamplePair> sample_multiscale_pairs(const ConvexRegion& region, std::size_t n_pairs,
                                                       std::uint64_t seed) {
  Rng rng(seed, Stream::holder_pairs);
  const double diam = region.diameter(Norm::l2);
  std::vector<SamplePair> pairs;
  pairs.reserve(n_pairs);
  for (std::size_t k = 0; k < n_pairs; ++k) {
    Vector x = region.sample(rng);
    const Vector u = ConvexRegion::random_direction(rng, region.dim());
    const double rho = std::min(diam * std::pow(10.0, -4.0 * rng.uniform()), region.chord_extent(x, u));
    Vector y(x);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += rho * u[i];
    pairs.push_back({std::move(x), std::move(y)});
  }
  return pairs;
}

namespace detail {

inline constexpr double min_pair_distance = 1e-12;

inline void check_holder_inputs(const Problem& problem, const ConvexRegion& region) {
  if (region.dim() != problem.dim()) {
    throw ArgumentError("holder: region dimension " + std::to_string(region.dim()) + " does not match problem dimension " +
                        std::to_string(problem.dim()));
  }
  if (region.degenerate()) throw ArgumentError("holder: region has zero volume");
}

struct PairTerm {
  double inner;     // <grad F(x) - grad F(y), x - y>
  double distance;  // |x - y| in the chosen norm
};

inline std::vector<PairTerm> pair_terms(const Problem& problem, const std::vector<SamplePair>& pairs, Norm norm) {
  std::vector<PairTerm> terms;
  terms.reserve(pairs.size());
  Vector gx(problem.dim());
  Vector gy(problem.dim());
  for (const auto& p : pairs) {
    const Vector d = difference(p.x, p.y);
    problem.grad(p.x, gx);
    problem.grad(p.y, gy);
    terms.push_back({dot(difference(gx, gy), d), gradcert::norm(d, norm)});
  }
  return terms;
}

inline HolderEstimate sup_ratio(const std::vector<SamplePair>& pairs, const std::vector<PairTerm>& terms, double alpha,
                                Norm norm, std::uint64_t seed) {
  HolderEstimate est;
  est.alpha = alpha;
  est.norm = norm;
  est.seed = seed;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < terms.size(); ++k) {
    if (terms[k].distance < min_pair_distance) continue;
    const double ratio = terms[k].inner / std::pow(terms[k].distance, 1.0 + alpha);
    if (!std::isfinite(ratio)) continue;
    ++est.n_pairs;
    if (ratio > best) {
      best = ratio;
      est.max_ratio_pair = pairs[k];
    }
  }
  if (est.n_pairs == 0) throw InsufficientDataError("holder: no sampled pair gave a finite ratio at distance >= 1e-12");
  est.c_hat = std::max(best, 0.0);
  return est;
}

}  // namespace detail

/// c_hat for a fixed sample; exposed so callers can audit or extend a sample.
inline HolderEstimate estimate_c_from_pairs(const Problem& problem, const std::vector<SamplePair>& pairs, double alpha,
                                            Norm norm = Norm::l2, std::uint64_t seed = 0) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ArgumentError("holder: alpha must lie in (0, 1]");
  return detail::sup_ratio(pairs, detail::pair_terms(problem, pairs, norm), alpha, norm, seed);
}

inline HolderEstimate estimate_c(const Problem& problem, const ConvexRegion& region, double alpha,
                                 std::size_t n_pairs, std::uint64_t seed, Norm norm = Norm::l2) {
  detail::check_holder_inputs(problem, region);
  if (n_pairs == 0) throw ArgumentError("holder: n_pairs must be >= 1");
  return estimate_c_from_pairs(problem, sample_uniform_pairs(region, n_pairs, seed), alpha, norm, seed);
}

/// Fits the exponent from the scaling of binned maxima
///   M_b = max <grad F(x) - grad F(y), x - y>  over pairs with |x-y| in bin b,
/// using n_bins geometric bins over [1e-4 diam, diam]. The fitted slope s of
/// log M_b against log(bin center) gives alpha = s - 1, clamped to
/// [alpha_floor, 1]; c_hat is then the sup ratio over the same sample.
inline HolderEstimate estimate_alpha(const Problem& problem, const ConvexRegion& region, std::size_t n_pairs,
                                     std::size_t n_bins, std::uint64_t seed, Norm norm = Norm::l2) {
  constexpr double alpha_floor = 1e-3;
  detail::check_holder_inputs(problem, region);
  if (n_bins < 3) throw ArgumentError("estimate_alpha: n_bins must be >= 3");
  if (n_pairs < 10 * n_bins) throw ArgumentError("estimate_alpha: need n_pairs >= 10 * n_bins");

  const auto pairs = sample_multiscale_pairs(region, n_pairs, seed);
  const auto terms = detail::pair_terms(problem, pairs, norm);

  const double diam = region.diameter(norm);
  const double lo = 1e-4 * diam;
  const double log_span = std::log(diam / lo);
  std::vector<double> bin_max(n_bins, -std::numeric_limits<double>::infinity());
  for (const auto& t : terms) {
    if (t.distance < lo || t.distance > diam) continue;
    auto b = static_cast<std::size_t>(static_cast<double>(n_bins) * std::log(t.distance / lo) / log_span);
    b = std::min(b, n_bins - 1);
    bin_max[b] = std::max(bin_max[b], t.inner);
  }

  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t b = 0; b < n_bins; ++b) {
    if (!(bin_max[b] > 0.0)) continue;
    xs.push_back(std::log(lo) + (static_cast<double>(b) + 0.5) * log_span / static_cast<double>(n_bins));
    ys.push_back(std::log(bin_max[b]));
  }
  if (xs.size() < 3) {
    throw InsufficientDataError("estimate_alpha: only " + std::to_string(xs.size()) +
                                " distance bins have a positive maximum (need 3)");
  }
  const auto m = static_cast<double>(xs.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= m;
  my /= m;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  const double slope = sxy / sxx;
  const double alpha = std::clamp(slope - 1.0, alpha_floor, 1.0);

  HolderEstimate est = detail::sup_ratio(pairs, terms, alpha, norm, seed);
  est.raw_slope = slope;
  return est;
}

}  // namespace gradcert

#endif  // GRADCERT_HOLDER_HPP_
