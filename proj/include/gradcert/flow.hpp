#ifndef GRADCERT_FLOW_HPP_
#define GRADCERT_FLOW_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "linalg.hpp"
#include "objective.hpp"
#include "text.hpp"

namespace gradcert {

/// Sampled solution of x'(t) = -grad F(x(t)) on [0, T].
struct FlowTrajectory {
  std::vector<double> times;
  std::vector<Vector> states;
  std::vector<double> f_values;
  std::vector<double> grad_norms;
  // Running integral of |grad F(x(s))|^2, integrated as an extra ODE state.
  std::vector<double> energy_integral;
  double horizon = 0.0;
  double tol = 0.0;
  std::size_t step_count = 0;
  std::size_t reject_count = 0;
  std::string problem_spec;

  std::size_t size() const noexcept { return times.size(); }
  const Vector& initial_state() const { return states.front(); }
};

struct FlowOptions {
  // Uniform output points in addition to the accepted step ends.
  std::size_t grid_intervals = 200;
  double safety = 0.9;
  double min_factor = 0.2;
  double max_factor = 5.0;
  // PI controller exponents (Gustafsson form, as in DOPRI5).
  double beta = 0.04;
};

namespace detail {

// Dormand-Prince 5(4) tableau with its 4th-order continuous extension.
struct DormandPrince {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                          a76 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;
  static constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                          d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                          d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;
};

// Right-hand side of the augmented system z = (x, E): x' = -g, E' = |g|^2.
class GradientSystem {
 public:
  explicit GradientSystem(const Problem& p) : problem_(p), g_(p.dim()) {}

  void operator()(const Vector& z, Vector& dz) {
    const std::size_t d = problem_.dim();
    problem_.grad(std::span<const double>(z.data(), d), g_);
    double sq = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      dz[i] = -g_[i];
      sq += g_[i] * g_[i];
    }
    dz[d] = sq;
  }

 private:
  const Problem& problem_;
  Vector g_;
};

inline double error_norm(const Vector& err, const Vector& y0, const Vector& y1, double tol) {
  double s = 0.0;
  for (std::size_t i = 0; i < err.size(); ++i) {
    const double sk = tol + tol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    s += (err[i] / sk) * (err[i] / sk);
  }
  return std::sqrt(s / static_cast<double>(err.size()));
}

}  // namespace detail

/// Integrates the gradient flow from x0 up to `horizon` with an adaptive
/// Dormand-Prince 5(4) pair (atol = rtol = tol) under PI step control.
/// Output holds every accepted step end plus a uniform grid of
/// `grid_intervals` + 1 points filled by dense output.
inline FlowTrajectory integrate(const Problem& problem, ConstVectorView x0, double horizon, double tol,
                                const FlowOptions& opt = {}) {
  using DP = detail::DormandPrince;
  if (x0.size() != problem.dim()) throw ArgumentError("integrate: x0 dimension does not match the problem");
  if (!all_finite(x0)) throw ArgumentError("integrate: x0 must be finite");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ArgumentError("integrate: horizon must be positive");
  if (!(tol >= 1e-12 && tol <= 1e-2)) throw ArgumentError("integrate: tol must lie in [1e-12, 1e-2]");
  if (opt.grid_intervals < 1) throw ArgumentError("integrate: need at least one grid interval");

  const std::size_t d = problem.dim();
  const std::size_t n = d + 1;
  detail::GradientSystem rhs(problem);

  FlowTrajectory traj;
  traj.horizon = horizon;
  traj.tol = tol;
  traj.problem_spec = problem.spec();

  Vector gbuf(d);
  auto record = [&](double t, const Vector& z) {
    const std::span<const double> x(z.data(), d);
    problem.grad(x, gbuf);
    traj.times.push_back(t);
    traj.states.emplace_back(x.begin(), x.end());
    traj.f_values.push_back(problem.eval(x));
    traj.grad_norms.push_back(norm2(gbuf));
    traj.energy_integral.push_back(z[d]);
  };

  Vector y(x0.begin(), x0.end());
  y.push_back(0.0);
  Vector k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n), err(n);
  rhs(y, k1);
  record(0.0, y);

  // Initial step (Hairer, Noersett & Wanner, II.4).
  double h = 0.0;
  {
    double d0 = 0.0, d1 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double sk = tol + tol * std::abs(y[i]);
      d0 += (y[i] / sk) * (y[i] / sk);
      d1 += (k1[i] / sk) * (k1[i] / sk);
    }
    d0 = std::sqrt(d0 / n);
    d1 = std::sqrt(d1 / n);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, horizon);
    for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h0 * k1[i];
    double d2 = 0.0;
    try {
      rhs(ytmp, k2);
      for (std::size_t i = 0; i < n; ++i) {
        const double sk = tol + tol * std::abs(y[i]);
        d2 += ((k2[i] - k1[i]) / sk) * ((k2[i] - k1[i]) / sk);
      }
      d2 = std::sqrt(d2 / n) / h0;
    } catch (const NumericOverflowError&) {
      d2 = std::numeric_limits<double>::infinity();
    }
    const double dm = std::max(d1, d2);
    const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 1.0 / 5.0);
    h = std::min({100.0 * h0, h1, horizon});
  }

  const double h_floor = 1e-14 * horizon;
  const double expo1 = 0.2 - opt.beta * 0.75;
  double err_old = 1e-4;
  bool last_rejected = false;
  bool last_failure_overflow = false;
  double t = 0.0;
  std::size_t next_grid = 1;
  const auto grid_time = [&](std::size_t j) {
    return j == opt.grid_intervals ? horizon : horizon * static_cast<double>(j) / static_cast<double>(opt.grid_intervals);
  };

  while (t < horizon) {
    if (h < h_floor) {
      if (last_failure_overflow) throw NumericOverflowError("integrate: trajectory left the finite range");
      throw StiffnessError("integrate: step size fell below 1e-14 * horizon at t = " + text::format_double(t));
    }
    bool final_step = false;
    if (t + h >= horizon) {
      h = horizon - t;
      final_step = true;
    }

    double err_norm = std::numeric_limits<double>::infinity();
    bool overflow = false;
    try {
      for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * DP::a21 * k1[i];
      rhs(ytmp, k2);
      for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * (DP::a31 * k1[i] + DP::a32 * k2[i]);
      rhs(ytmp, k3);
      for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * (DP::a41 * k1[i] + DP::a42 * k2[i] + DP::a43 * k3[i]);
      rhs(ytmp, k4);
      for (std::size_t i = 0; i < n; ++i) {
        ytmp[i] = y[i] + h * (DP::a51 * k1[i] + DP::a52 * k2[i] + DP::a53 * k3[i] + DP::a54 * k4[i]);
      }
      rhs(ytmp, k5);
      for (std::size_t i = 0; i < n; ++i) {
        ytmp[i] = y[i] + h * (DP::a61 * k1[i] + DP::a62 * k2[i] + DP::a63 * k3[i] + DP::a64 * k4[i] + DP::a65 * k5[i]);
      }
      rhs(ytmp, k6);
      for (std::size_t i = 0; i < n; ++i) {
        ynew[i] = y[i] + h * (DP::a71 * k1[i] + DP::a73 * k3[i] + DP::a74 * k4[i] + DP::a75 * k5[i] + DP::a76 * k6[i]);
      }
      rhs(ynew, k7);
      for (std::size_t i = 0; i < n; ++i) {
        err[i] = h * (DP::e1 * k1[i] + DP::e3 * k3[i] + DP::e4 * k4[i] + DP::e5 * k5[i] + DP::e6 * k6[i] + DP::e7 * k7[i]);
      }
      err_norm = detail::error_norm(err, y, ynew, tol);
      if (!std::isfinite(err_norm) || !all_finite(ynew)) overflow = true;
    } catch (const NumericOverflowError&) {
      overflow = true;
    }

    if (overflow || err_norm > 1.0) {
      ++traj.reject_count;
      last_failure_overflow = overflow;
      const double factor = overflow ? opt.min_factor
                                     : std::max(opt.min_factor, opt.safety * std::pow(err_norm, -0.2));
      h *= factor;
      last_rejected = true;
      continue;
    }
    last_failure_overflow = false;

    // Dense output coefficients for the accepted step.
    const double t_new = final_step ? horizon : t + h;
    if (next_grid <= opt.grid_intervals && grid_time(next_grid) < t_new) {
      Vector r2(n), r3(n), r4(n), r5(n), zi(n);
      for (std::size_t i = 0; i < n; ++i) {
        const double ydiff = ynew[i] - y[i];
        const double bspl = h * k1[i] - ydiff;
        r2[i] = ydiff;
        r3[i] = bspl;
        r4[i] = ydiff - h * k7[i] - bspl;
        r5[i] = h * (DP::d1 * k1[i] + DP::d3 * k3[i] + DP::d4 * k4[i] + DP::d5 * k5[i] + DP::d6 * k6[i] +
                     DP::d7 * k7[i]);
      }
      while (next_grid <= opt.grid_intervals && grid_time(next_grid) < t_new) {
        const double tg = grid_time(next_grid);
        if (tg > t) {
          const double s = (tg - t) / h;
          const double s1 = 1.0 - s;
          for (std::size_t i = 0; i < n; ++i) zi[i] = y[i] + s * (r2[i] + s1 * (r3[i] + s * (r4[i] + s1 * r5[i])));
          record(tg, zi);
        }
        ++next_grid;
      }
    }
    while (next_grid <= opt.grid_intervals && grid_time(next_grid) <= t_new) ++next_grid;

    y = ynew;
    k1 = k7;
    t = t_new;
    ++traj.step_count;
    record(t, y);

    double factor = opt.safety * std::pow(err_norm, -expo1) * std::pow(err_old, opt.beta);
    if (!std::isfinite(factor)) factor = opt.max_factor;
    factor = std::clamp(factor, opt.min_factor, opt.max_factor);
    if (last_rejected) factor = std::min(factor, 1.0);
    err_old = std::max(err_norm, 1e-4);
    last_rejected = false;
    h *= factor;
  }
  return traj;
}

namespace detail {
inline void check_same_problem(const FlowTrajectory& traj, const Problem& problem, const char* op) {
  if (traj.problem_spec != problem.spec()) {
    throw ArgumentError(std::string(op) + ": trajectory was computed for '" + traj.problem_spec + "', not '" +
                        problem.spec() + "'");
  }
}
}  // namespace detail

/// max_k |E(t_k) - (F(x(0)) - F(x(t_k)))| / (1 + |F(x(0))|).
inline double energy_residual(const FlowTrajectory& traj, const Problem& problem) {
  detail::check_same_problem(traj, problem, "energy_residual");
  if (traj.size() == 0) return 0.0;
  const double f0 = traj.f_values.front();
  double worst = 0.0;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    worst = std::max(worst, std::abs(traj.energy_integral[k] - (f0 - traj.f_values[k])));
  }
  return worst / (1.0 + std::abs(f0));
}

/// Tail-window observations on [T (1 - window_fraction), T]. None of these is
/// a statement about t -> infinity.
struct FlowVerdict {
  bool f_converged = false;
  bool grad_vanishes = false;
  bool x_settled = false;
  double x_bound = 0.0;  // max |x(t_k)| over the whole trajectory

  double window_start = 0.0;
  std::size_t window_points = 0;
  double f_spread = 0.0;
  double grad_tail_max = 0.0;
  double tail_diameter = 0.0;
  double window_fraction = 0.0;
  double eps = 0.0;
};

/// Largest pairwise Euclidean distance in a point set (brute force).
inline double point_set_diameter(const std::vector<Vector>& pts, std::size_t first = 0) {
  double best = 0.0;
  for (std::size_t i = first; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < pts[i].size(); ++k) {
        const double v = pts[i][k] - pts[j][k];
        s += v * v;
      }
      best = std::max(best, s);
    }
  }
  return std::sqrt(best);
}

inline FlowVerdict detect_flow_convergence(const FlowTrajectory& traj, double window_fraction, double eps) {
  if (traj.size() == 0) throw ArgumentError("detect_flow_convergence: empty trajectory");
  if (!(window_fraction > 0.0 && window_fraction < 1.0)) {
    throw ArgumentError("detect_flow_convergence: window_fraction must lie in (0, 1)");
  }
  if (!(eps > 0.0)) throw ArgumentError("detect_flow_convergence: eps must be positive");
  FlowVerdict v;
  v.window_fraction = window_fraction;
  v.eps = eps;
  v.window_start = traj.horizon * (1.0 - window_fraction);
  const auto first = static_cast<std::size_t>(
      std::lower_bound(traj.times.begin(), traj.times.end(), v.window_start) - traj.times.begin());
  v.window_points = traj.size() - first;
  if (v.window_points < 2) {
    throw ArgumentError("detect_flow_convergence: tail window holds fewer than 2 grid points");
  }
  const auto [fmin, fmax] = std::minmax_element(traj.f_values.begin() + first, traj.f_values.end());
  v.f_spread = *fmax - *fmin;
  v.grad_tail_max = *std::max_element(traj.grad_norms.begin() + first, traj.grad_norms.end());
  v.tail_diameter = point_set_diameter(traj.states, first);
  for (const auto& x : traj.states) v.x_bound = std::max(v.x_bound, norm2(x));

  v.f_converged = v.f_spread <= eps * (1.0 + std::abs(traj.f_values.front()));
  v.grad_vanishes = v.grad_tail_max <= eps;
  v.x_settled = v.tail_diameter <= eps;
  return v;
}

/// CSV: t,x_0..x_{d-1},F,grad_norm,energy_integral; 17 significant digits.
inline void write_flow_csv(std::ostream& os, const FlowTrajectory& traj) {
  const std::size_t d = traj.states.empty() ? 0 : traj.states.front().size();
  os << "t";
  for (std::size_t i = 0; i < d; ++i) os << ",x_" << i;
  os << ",F,grad_norm,energy_integral\n";
  for (std::size_t k = 0; k < traj.size(); ++k) {
    os << text::format_double(traj.times[k]);
    for (double v : traj.states[k]) os << ',' << text::format_double(v);
    os << ',' << text::format_double(traj.f_values[k]) << ',' << text::format_double(traj.grad_norms[k]) << ','
       << text::format_double(traj.energy_integral[k]) << '\n';
  }
}

}  // namespace gradcert

#endif  // GRADCERT_FLOW_HPP_
