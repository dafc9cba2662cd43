#ifndef GRADCERT_PROBLEMS_HPP_
#define GRADCERT_PROBLEMS_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "linalg.hpp"
#include "objective.hpp"
#include "random.hpp"
#include "text.hpp"

namespace gradcert {

namespace detail {

// In-place Cholesky of a row-major SPD matrix. Returns false if A is not SPD.
inline bool cholesky(std::vector<double>& a, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    double d = a[j * n + j];
    for (std::size_t k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
    if (!(d > 0.0)) return false;
    d = std::sqrt(d);
    a[j * n + j] = d;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a[i * n + j];
      for (std::size_t k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
      a[i * n + j] = s / d;
    }
  }
  return true;
}

inline Vector cholesky_solve(const std::vector<double>& l, std::size_t n, ConstVectorView rhs) {
  Vector y(rhs.begin(), rhs.end());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < i; ++k) y[i] -= l[i * n + k] * y[k];
    y[i] /= l[i * n + i];
  }
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t k = i + 1; k < n; ++k) y[i] -= l[k * n + i] * y[k];
    y[i] /= l[i * n + i];
  }
  return y;
}

inline double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

inline double logistic(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace detail

/// F(x) = 1/2 x^T A x + b^T x with symmetric A (row-major, d*d entries).
/// When A is positive definite the minimizer -A^{-1} b and the minimum are
/// recorded; otherwise F is unbounded below and neither is set.
inline Problem quadratic(std::vector<double> a, Vector b = {}) {
  const auto n = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(a.size()))));
  if (n == 0 || n * n != a.size()) throw ArgumentError("quadratic: A must have d*d entries");
  if (b.empty()) b.assign(n, 0.0);
  if (b.size() != n) throw ArgumentError("quadratic: b must have d entries");
  double scale = 0.0;
  for (double v : a) scale = std::max(scale, std::abs(v));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (std::abs(a[i * n + j] - a[j * n + i]) > 1e-12 * std::max(1.0, scale)) {
        throw ArgumentError("quadratic: A must be symmetric");
      }
    }
  }

  ProblemInfo info;
  info.standard_start = Vector(n, 1.0);
  info.probe_region = ConvexRegion::cube(n, -2.0, 2.0);
  info.spec = "quadratic:A=";
  for (std::size_t i = 0; i < n; ++i) {
    if (i) info.spec += ';';
    info.spec += text::join(ConstVectorView(a).subspan(i * n, n));
  }
  if (std::any_of(b.begin(), b.end(), [](double v) { return v != 0.0; })) info.spec += ";b=" + text::join(b);

  auto l = a;
  if (detail::cholesky(l, n)) {
    Vector xstar = detail::cholesky_solve(l, n, b);
    for (double& v : xstar) v = -v;
    info.lower_bound = 0.5 * dot(b, xstar);
    info.minimizer = std::move(xstar);
  }

  auto shared_a = std::make_shared<const std::vector<double>>(std::move(a));
  auto shared_b = std::make_shared<const Vector>(std::move(b));
  auto value = [n, shared_a, shared_b](ConstVectorView x) {
    const auto& A = *shared_a;
    double f = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double ax = 0.0;
      for (std::size_t j = 0; j < n; ++j) ax += A[i * n + j] * x[j];
      f += 0.5 * x[i] * ax + (*shared_b)[i] * x[i];
    }
    return f;
  };
  auto gradient = [n, shared_a, shared_b](ConstVectorView x, std::span<double> g) {
    const auto& A = *shared_a;
    for (std::size_t i = 0; i < n; ++i) {
      double ax = 0.0;
      for (std::size_t j = 0; j < n; ++j) ax += A[i * n + j] * x[j];
      g[i] = ax + (*shared_b)[i];
    }
  };
  return Problem("quadratic", n, std::move(value), std::move(gradient), std::move(info));
}

inline Problem quadratic_diagonal(ConstVectorView diag, Vector b = {}) {
  const std::size_t n = diag.size();
  std::vector<double> a(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) a[i * n + i] = diag[i];
  return quadratic(std::move(a), std::move(b));
}

/// (1 - x)^2 + 100 (y - x^2)^2.
inline Problem rosenbrock() {
  ProblemInfo info;
  info.lower_bound = 0.0;
  info.minimizer = Vector{1.0, 1.0};
  info.standard_start = {-1.2, 1.0};
  info.probe_region = ConvexRegion::cube(2, -2.0, 2.0);
  info.spec = "rosenbrock";
  return Problem(
      "rosenbrock", 2,
      [](ConstVectorView x) {
        const double a = 1.0 - x[0];
        const double b = x[1] - x[0] * x[0];
        return a * a + 100.0 * b * b;
      },
      [](ConstVectorView x, std::span<double> g) {
        const double b = x[1] - x[0] * x[0];
        g[0] = -2.0 * (1.0 - x[0]) - 400.0 * x[0] * b;
        g[1] = 200.0 * b;
      },
      std::move(info));
}

/// (x^2 + y - 11)^2 + (x + y^2 - 7)^2. Four global minima with value 0.
inline Problem himmelblau() {
  ProblemInfo info;
  info.lower_bound = 0.0;
  info.minimizer = Vector{3.0, 2.0};
  info.standard_start = {0.0, 0.0};
  info.probe_region = ConvexRegion::cube(2, -5.0, 5.0);
  info.spec = "himmelblau";
  return Problem(
      "himmelblau", 2,
      [](ConstVectorView x) {
        const double p = x[0] * x[0] + x[1] - 11.0;
        const double q = x[0] + x[1] * x[1] - 7.0;
        return p * p + q * q;
      },
      [](ConstVectorView x, std::span<double> g) {
        const double p = x[0] * x[0] + x[1] - 11.0;
        const double q = x[0] + x[1] * x[1] - 7.0;
        g[0] = 4.0 * x[0] * p + 2.0 * q;
        g[1] = 2.0 * p + 4.0 * x[1] * q;
      },
      std::move(info));
}

/// Shallow network u -> sum_j v_j softplus(w_j u + b_j) + c fitted to |u| on
/// ten equispaced points of [-1, 1] by mean squared error.
///
/// Parameter layout (d = 10): w[0..3), b[3..6), v[6..9), c = x[9].
class AnnSoftplus {
 public:
  static constexpr std::size_t width = 3;
  static constexpr std::size_t dim = 3 * width + 1;
  static constexpr std::size_t n_data = 10;

  static std::array<double, n_data> inputs() {
    std::array<double, n_data> u{};
    for (std::size_t j = 0; j < n_data; ++j) u[j] = -1.0 + 2.0 * static_cast<double>(j) / 9.0;
    return u;
  }

  static double loss(ConstVectorView p) {
    double sum = 0.0;
    for (double u : inputs()) {
      const double r = output(p, u) - std::abs(u);
      sum += r * r;
    }
    return sum / static_cast<double>(n_data);
  }

  static void gradient(ConstVectorView p, std::span<double> g) {
    std::fill(g.begin(), g.end(), 0.0);
    const double scale = 2.0 / static_cast<double>(n_data);
    for (double u : inputs()) {
      const double r = scale * (output(p, u) - std::abs(u));
      for (std::size_t j = 0; j < width; ++j) {
        const double z = p[j] * u + p[width + j];
        const double dz = r * p[2 * width + j] * detail::logistic(z);
        g[j] += dz * u;
        g[width + j] += dz;
        g[2 * width + j] += r * detail::softplus(z);
      }
      g[3 * width] += r;
    }
  }

  /// Coordinates i.i.d. uniform(-1, 1) from the problem-init stream of `seed`.
  static Vector initial_point(std::uint64_t seed) {
    Rng rng(seed, Stream::problem_init);
    Vector p(dim);
    for (double& v : p) v = rng.uniform(-1.0, 1.0);
    return p;
  }

 private:
  static double output(ConstVectorView p, double u) {
    double y = p[3 * width];
    for (std::size_t j = 0; j < width; ++j) y += p[2 * width + j] * detail::softplus(p[j] * u + p[width + j]);
    return y;
  }
};

inline Problem ann_softplus(std::uint64_t init_seed = 0) {
  ProblemInfo info;
  info.lower_bound = 0.0;
  info.standard_start = AnnSoftplus::initial_point(init_seed);
  info.probe_region = ConvexRegion::cube(AnnSoftplus::dim, -2.0, 2.0);
  info.spec = init_seed == 0 ? "ann_softplus" : "ann_softplus:seed=" + std::to_string(init_seed);
  return Problem("ann_softplus", AnnSoftplus::dim, &AnnSoftplus::loss, &AnnSoftplus::gradient, std::move(info));
}

/// Smooth potential whose gradient flow spirals toward the unit circle.
/// For r < 1, with u = 1 - r^2,
///   F = exp(-1/u) * (1 - 4r^4 / (4r^4 + u^4) * sin(theta - 1/u)),
/// and F = 0 for r >= 1. All derivatives vanish on the circle.
class MexicanHat {
 public:
  static double value(ConstVectorView p) {
    const double s = p[0] * p[0] + p[1] * p[1];
    if (flat(s)) return 0.0;
    const double u = 1.0 - s;
    const double e = std::exp(-1.0 / u);
    const double w = 4.0 * s * s / (4.0 * s * s + std::pow(u, 4));
    return e * (1.0 - w * std::sin(std::atan2(p[1], p[0]) - 1.0 / u));
  }

  static void gradient(ConstVectorView p, std::span<double> g) {
    const double x = p[0];
    const double y = p[1];
    const double s = x * x + y * y;
    if (flat(s)) {
      g[0] = g[1] = 0.0;
      return;
    }
    // Work in (s = r^2, theta); F_theta / s stays finite at the origin.
    const double u = 1.0 - s;
    const double inv_u = 1.0 / u;
    const double e = std::exp(-inv_u);
    const double u3 = u * u * u;
    const double den = 4.0 * s * s + u3 * u;
    const double w = 4.0 * s * s / den;
    const double dw_ds = 8.0 * s * u3 * (u + 2.0 * s) / (den * den);
    const double phi = std::atan2(y, x) - inv_u;
    const double sn = std::sin(phi);
    const double cs = std::cos(phi);
    const double f_s = -e * inv_u * inv_u * (1.0 - w * sn) - e * dw_ds * sn + e * w * cs * inv_u * inv_u;
    const double f_theta_over_s = -e * cs * 4.0 * s / den;
    g[0] = 2.0 * x * f_s - y * f_theta_over_s;
    g[1] = 2.0 * y * f_s + x * f_theta_over_s;
  }

 private:
  // exp(-1/u) underflows to exactly 0 once 1/u > ~745; treat that band as the
  // flat outer region so that 0 * inf never appears.
  static bool flat(double s) { return s >= 1.0 || 1.0 / (1.0 - s) > 700.0; }
};

inline Problem mexican_hat() {
  ProblemInfo info;
  info.lower_bound = 0.0;
  info.standard_start = {0.5, 0.0};
  info.probe_region = ConvexRegion::cube(2, -1.2, 1.2);
  info.spec = "mexican_hat";
  return Problem("mexican_hat", 2, &MexicanHat::value, &MexicanHat::gradient, std::move(info));
}

struct SuiteEntry {
  std::string_view name;
  std::string_view summary;
};

inline constexpr std::array<SuiteEntry, 5> problem_suite{{
    {"quadratic", "1/2 x^T A x + b^T x; params A=<rows separated by ';'> or diag=<list>, optional b=<list>"},
    {"rosenbrock", "(1-x)^2 + 100 (y-x^2)^2, d=2, start (-1.2,1)"},
    {"himmelblau", "(x^2+y-11)^2 + (x+y^2-7)^2, d=2, start (0,0)"},
    {"ann_softplus", "width-3 softplus network fitted to |u| on 10 points, d=10; param seed=<int> for the start"},
    {"mexican_hat", "C-infinity potential with spiralling non-convergent flow, d=2, start (0.5,0)"},
}};

/// Builds a problem from "name" or "name:key=value;key=value". A dense matrix
/// value uses ';' between rows, so tokens without '=' continue the previous
/// value: "quadratic:A=1,0;0,4;b=1,1".
inline Problem make_problem(std::string_view spec) {
  const auto colon = spec.find(':');
  const std::string_view name = spec.substr(0, colon);
  struct Param {
    std::string value;
    std::size_t offset;
  };
  std::map<std::string, Param, std::less<>> params;
  if (colon != std::string_view::npos) {
    std::size_t pos = colon + 1;
    std::string* current = nullptr;
    for (std::string_view tok : text::split(spec.substr(colon + 1), ';')) {
      const auto eq = tok.find('=');
      if (eq != std::string_view::npos) {
        const std::string key(text::trim(tok.substr(0, eq)));
        if (params.count(key)) throw ParseError("duplicate problem parameter '" + key + "'", pos);
        auto& p = params[key];
        p.value = std::string(tok.substr(eq + 1));
        p.offset = pos + eq + 1;
        current = &p.value;
      } else {
        if (current == nullptr) throw ParseError("expected key=value in problem spec", pos);
        *current += ';';
        *current += tok;
      }
      pos += tok.size() + 1;
    }
  }
  auto take = [&](std::string_view key) -> std::optional<Param> {
    auto it = params.find(key);
    if (it == params.end()) return std::nullopt;
    Param p = it->second;
    params.erase(it);
    return p;
  };
  auto reject_leftovers = [&] {
    if (!params.empty()) {
      throw ArgumentError("unknown parameter '" + params.begin()->first + "' for problem '" + std::string(name) + "'");
    }
  };

  if (name == "quadratic") {
    auto a = take("A");
    auto diag = take("diag");
    auto b = take("b");
    reject_leftovers();
    Vector bv = b ? text::parse_list(b->value, b->offset, "b entry") : Vector{};
    if (diag && !a) return quadratic_diagonal(text::parse_list(diag->value, diag->offset, "diag entry"), std::move(bv));
    if (!a || diag) throw ArgumentError("quadratic needs exactly one of A=... or diag=...");
    std::vector<double> entries;
    std::size_t rows = 0;
    std::size_t pos = 0;
    std::size_t row_len = 0;
    for (std::string_view row : text::split(a->value, ';')) {
      const Vector r = text::parse_list(row, a->offset + pos, "matrix entry");
      if (rows > 0 && r.size() != row_len) throw ParseError("ragged matrix row", a->offset + pos);
      row_len = r.size();
      entries.insert(entries.end(), r.begin(), r.end());
      ++rows;
      pos += row.size() + 1;
    }
    if (rows > 1 && rows != row_len) throw ArgumentError("quadratic: A must be square");
    return quadratic(std::move(entries), std::move(bv));
  }
  if (name == "rosenbrock") {
    reject_leftovers();
    return rosenbrock();
  }
  if (name == "himmelblau") {
    reject_leftovers();
    return himmelblau();
  }
  if (name == "ann_softplus") {
    auto seed = take("seed");
    reject_leftovers();
    std::uint64_t s = 0;
    if (seed) {
      const double v = text::parse_double(seed->value, seed->offset, "seed");
      if (v < 0 || v != std::floor(v)) throw ParseError("seed must be a non-negative integer", seed->offset);
      s = static_cast<std::uint64_t>(v);
    }
    return ann_softplus(s);
  }
  if (name == "mexican_hat") {
    reject_leftovers();
    return mexican_hat();
  }
  throw ArgumentError("unknown problem '" + std::string(name) + "'");
}

}  // namespace gradcert

#endif  // GRADCERT_PROBLEMS_HPP_
