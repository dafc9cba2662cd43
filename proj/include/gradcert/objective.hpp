#ifndef GRADCERT_OBJECTIVE_HPP_
#define GRADCERT_OBJECTIVE_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>

#include "errors.hpp"
#include "linalg.hpp"
#include "random.hpp"
#include "text.hpp"

namespace gradcert {

/// Closed convex region: an axis-aligned box or a Euclidean ball.
class ConvexRegion {
 public:
  enum class Kind { box, ball };

  static ConvexRegion box(Vector lower, Vector upper) {
    if (lower.size() != upper.size() || lower.empty()) {
      throw ArgumentError("box: corner dimensions must match and be positive");
    }
    for (std::size_t i = 0; i < lower.size(); ++i) {
      if (!(lower[i] <= upper[i]) || !std::isfinite(lower[i]) || !std::isfinite(upper[i])) {
        throw ArgumentError("box: need finite lower <= upper in every coordinate");
      }
    }
    return ConvexRegion(Kind::box, std::move(lower), std::move(upper), 0.0);
  }

  static ConvexRegion cube(std::size_t dim, double lo, double hi) {
    return box(Vector(dim, lo), Vector(dim, hi));
  }

  static ConvexRegion ball(Vector center, double radius) {
    if (center.empty()) throw ArgumentError("ball: empty center");
    if (!(radius >= 0.0) || !std::isfinite(radius)) throw ArgumentError("ball: radius must be finite and >= 0");
    return ConvexRegion(Kind::ball, std::move(center), {}, radius);
  }

  Kind kind() const noexcept { return kind_; }
  std::size_t dim() const noexcept { return a_.size(); }

  // Box corners; for a ball `lower()` is the center.
  const Vector& lower() const noexcept { return a_; }
  const Vector& upper() const noexcept { return b_; }
  const Vector& center() const noexcept { return a_; }
  double radius() const noexcept { return radius_; }

  bool contains(ConstVectorView x) const {
    if (x.size() != dim()) {
      throw ArgumentError("contains: dimension mismatch (" + std::to_string(x.size()) + " vs " +
                          std::to_string(dim()) + ")");
    }
    if (kind_ == Kind::box) {
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] >= a_[i] && x[i] <= b_[i])) return false;
      }
      return true;
    }
    return norm2(difference(x, a_)) <= radius_;
  }

  bool degenerate() const {
    if (kind_ == Kind::ball) return radius_ <= 0.0;
    for (std::size_t i = 0; i < dim(); ++i) {
      if (!(b_[i] > a_[i])) return true;
    }
    return false;
  }

  /// Largest distance between two points of the region, measured in `n`.
  double diameter(Norm n = Norm::l2) const {
    if (kind_ == Kind::box) return norm(difference(b_, a_), n);
    if (n == Norm::l1) return 2.0 * radius_ * std::sqrt(static_cast<double>(dim()));
    return 2.0 * radius_;
  }

  /// Uniform sample from the region.
  Vector sample(Rng& rng) const {
    Vector x(dim());
    if (kind_ == Kind::box) {
      for (std::size_t i = 0; i < dim(); ++i) x[i] = rng.uniform(a_[i], b_[i]);
      return x;
    }
    Vector dir = random_direction(rng, dim());
    const double r = radius_ * std::pow(rng.uniform(), 1.0 / static_cast<double>(dim()));
    for (std::size_t i = 0; i < dim(); ++i) x[i] = a_[i] + r * dir[i];
    return x;
  }

  /// Largest t >= 0 such that x + t*u stays in the region (x must be inside).
  double chord_extent(ConstVectorView x, ConstVectorView u) const {
    double t_max = std::numeric_limits<double>::infinity();
    if (kind_ == Kind::box) {
      for (std::size_t i = 0; i < dim(); ++i) {
        if (u[i] > 0.0) t_max = std::min(t_max, (b_[i] - x[i]) / u[i]);
        if (u[i] < 0.0) t_max = std::min(t_max, (a_[i] - x[i]) / u[i]);
      }
      return std::max(t_max, 0.0);
    }
    // |x - c + t u|^2 = r^2
    const Vector w = difference(x, a_);
    const double uu = dot(u, u);
    if (uu == 0.0) return t_max;
    const double wu = dot(w, u);
    const double disc = wu * wu - uu * (dot(w, w) - radius_ * radius_);
    if (disc < 0.0) return 0.0;
    return std::max((-wu + std::sqrt(disc)) / uu, 0.0);
  }

  static Vector random_direction(Rng& rng, std::size_t dim) {
    Vector u(dim);
    double len = 0.0;
    while (len == 0.0) {
      for (double& v : u) v = rng.normal();
      len = norm2(u);
    }
    for (double& v : u) v /= len;
    return u;
  }

  /// Textual form accepted by the CLI ("box:lo,hi;lo,hi" / "ball:r@c1,c2").
  std::string to_spec() const;

 private:
  ConvexRegion(Kind k, Vector a, Vector b, double r) : kind_(k), a_(std::move(a)), b_(std::move(b)), radius_(r) {}

  Kind kind_;
  Vector a_;
  Vector b_;
  double radius_;
};

/// Static facts about a built-in objective.
struct ProblemInfo {
  std::optional<double> lower_bound;
  std::optional<Vector> minimizer;
  Vector standard_start;
  // Probe points for gradient checks are drawn from here.
  std::optional<ConvexRegion> probe_region;
  // Canonical spec string that rebuilds this problem.
  std::string spec;
};

/// A C^1 objective F: R^d -> R with its analytic gradient. Immutable.
class Problem {
 public:
  using ValueFn = std::function<double(ConstVectorView)>;
  using GradFn = std::function<void(ConstVectorView, std::span<double>)>;

  Problem(std::string name, std::size_t dim, ValueFn value, GradFn gradient, ProblemInfo info = {})
      : name_(std::move(name)), dim_(dim), value_(std::move(value)), gradient_(std::move(gradient)),
        info_(std::move(info)) {
    if (dim_ == 0) throw ArgumentError("problem '" + name_ + "': dimension must be positive");
    if (info_.standard_start.empty()) info_.standard_start = Vector(dim_, 1.0);
    if (info_.spec.empty()) info_.spec = name_;
  }

  const std::string& name() const noexcept { return name_; }
  std::size_t dim() const noexcept { return dim_; }
  const std::optional<double>& lower_bound() const noexcept { return info_.lower_bound; }
  const std::optional<Vector>& minimizer() const noexcept { return info_.minimizer; }
  const Vector& standard_start() const noexcept { return info_.standard_start; }
  const std::optional<ConvexRegion>& probe_region() const noexcept { return info_.probe_region; }
  const std::string& spec() const noexcept { return info_.spec; }

  double eval(ConstVectorView x) const {
    check_dim(x, "eval");
    const double f = value_(x);
    if (!std::isfinite(f)) throw NumericOverflowError("eval(" + name_ + "): non-finite objective value");
    return f;
  }

  void grad(ConstVectorView x, std::span<double> out) const {
    check_dim(x, "grad");
    if (out.size() != dim_) throw ArgumentError("grad(" + name_ + "): output dimension mismatch");
    gradient_(x, out);
    if (!all_finite(out)) throw NumericOverflowError("grad(" + name_ + "): non-finite gradient");
  }

  Vector grad(ConstVectorView x) const {
    Vector g(dim_);
    grad(x, g);
    return g;
  }

 private:
  void check_dim(ConstVectorView x, const char* op) const {
    if (x.size() != dim_) {
      throw ArgumentError(std::string(op) + "(" + name_ + "): expected dimension " + std::to_string(dim_) +
                          ", got " + std::to_string(x.size()));
    }
  }

  std::string name_;
  std::size_t dim_;
  ValueFn value_;
  GradFn gradient_;
  ProblemInfo info_;
};

/// Largest per-coordinate relative discrepancy between the analytic gradient
/// and a central difference. Coordinate i is perturbed by h*max(1,|x_i|) and
/// the error is scaled by max(1, |g_i|).
inline double check_gradient(const Problem& problem, ConstVectorView x, double h) {
  if (!(h > 0.0)) throw ArgumentError("check_gradient: h must be positive");
  const Vector g = problem.grad(x);
  Vector probe(x.begin(), x.end());
  double worst = 0.0;
  for (std::size_t i = 0; i < probe.size(); ++i) {
    const double step = h * std::max(1.0, std::abs(x[i]));
    probe[i] = x[i] + step;
    const double fp = problem.eval(probe);
    probe[i] = x[i] - step;
    const double fm = problem.eval(probe);
    probe[i] = x[i];
    // the realized step, not the nominal one, after rounding of x +- step
    const double width = (x[i] + step) - (x[i] - step);
    const double fd = (fp - fm) / width;
    worst = std::max(worst, std::abs(g[i] - fd) / std::max(1.0, std::abs(g[i])));
  }
  return worst;
}

inline bool contains(const ConvexRegion& region, ConstVectorView x) { return region.contains(x); }

inline std::string ConvexRegion::to_spec() const {
  if (kind_ == Kind::ball) {
    return "ball:" + text::format_double(radius_) + "@" + text::join(a_);
  }
  std::string s = "box:";
  for (std::size_t i = 0; i < dim(); ++i) {
    if (i) s += ';';
    s += text::format_double(a_[i]) + "," + text::format_double(b_[i]);
  }
  return s;
}

/// Parses "box:lo,hi" (cube of dimension `dim`), "box:lo1,hi1;lo2,hi2;...",
/// "ball:r" (centered at the origin) or "ball:r@c1,c2,...".
inline ConvexRegion parse_region(std::string_view spec, std::size_t dim) {
  const auto colon = spec.find(':');
  if (colon == std::string_view::npos) throw ParseError("region spec needs 'box:' or 'ball:' prefix", 0);
  const std::string_view kind = spec.substr(0, colon);
  const std::string_view body = spec.substr(colon + 1);
  const std::size_t base = colon + 1;
  if (kind == "box") {
    const auto rows = text::split(body, ';');
    Vector lo, hi;
    std::size_t pos = 0;
    for (std::string_view row : rows) {
      const Vector pair = text::parse_list(row, base + pos, "box bound");
      if (pair.size() != 2) throw ParseError("box interval needs exactly 'lo,hi'", base + pos);
      lo.push_back(pair[0]);
      hi.push_back(pair[1]);
      pos += row.size() + 1;
    }
    if (rows.size() == 1 && dim > 1) {
      return ConvexRegion::cube(dim, lo[0], hi[0]);
    }
    if (lo.size() != dim) {
      throw ArgumentError("box has " + std::to_string(lo.size()) + " intervals, problem dimension is " +
                          std::to_string(dim));
    }
    return ConvexRegion::box(std::move(lo), std::move(hi));
  }
  if (kind == "ball") {
    const auto at = body.find('@');
    const double r = text::parse_double(body.substr(0, at), base, "ball radius");
    Vector c = at == std::string_view::npos ? Vector(dim, 0.0) : text::parse_list(body.substr(at + 1), base + at + 1, "ball center");
    if (c.size() != dim) throw ArgumentError("ball center dimension does not match problem dimension");
    return ConvexRegion::ball(std::move(c), r);
  }
  throw ParseError("unknown region kind '" + std::string(kind) + "'", 0);
}

}  // namespace gradcert

#endif  // GRADCERT_OBJECTIVE_HPP_
