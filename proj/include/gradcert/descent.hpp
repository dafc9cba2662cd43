#ifndef GRADCERT_DESCENT_HPP_
#define GRADCERT_DESCENT_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"
#include "linalg.hpp"
#include "objective.hpp"
#include "schedule.hpp"
#include "text.hpp"

namespace gradcert {

enum class StopReason { horizon, overflow, stationary };

inline std::string_view to_string(StopReason r) {
  switch (r) {
    case StopReason::horizon:
      return "horizon";
    case StopReason::overflow:
      return "overflow";
    case StopReason::stationary:
      return "stationary";
  }
  return "horizon";
}

/// History of x_{n+1} = x_n - gamma_n grad F(x_n), n = 0..N. Entry n holds
/// x_n, F(x_n), |grad F(x_n)|, gamma_n and sum_{k<=n} gamma_k |grad F(x_k)|^2.
struct DescentLog {
  std::vector<Vector> iterates;
  std::vector<double> f_values;
  std::vector<double> grad_norms;
  std::vector<double> gammas;
  std::vector<double> weighted_sum;
  std::vector<bool> in_region;
  StopReason stopped_reason = StopReason::horizon;
  std::optional<ConvexRegion> region;
  std::string problem_spec;
  std::string schedule_spec;

  /// N, the number of executed steps.
  std::size_t steps() const noexcept { return iterates.empty() ? 0 : iterates.size() - 1; }
};

inline constexpr double stationary_threshold = 1e-14;

/// Runs plain gradient descent. Region containment is recorded, never
/// enforced. A non-finite value ends the run with stopped_reason = overflow
/// and the log truncated at the last finite iterate.
inline DescentLog run(const Problem& problem, ConstVectorView x0, const Schedule& schedule, std::size_t n_steps,
                      const std::optional<ConvexRegion>& region = std::nullopt) {
  if (x0.size() != problem.dim()) throw ArgumentError("run: x0 dimension does not match the problem");
  if (!all_finite(x0)) throw ArgumentError("run: x0 must be finite");
  if (n_steps == 0) throw ArgumentError("run: n_steps must be positive");
  if (region && region->dim() != problem.dim()) throw ArgumentError("run: region dimension does not match the problem");
  if (region && !region->contains(x0)) throw ArgumentError("run: x0 lies outside the region");
  if (auto len = schedule.length(); len && *len < n_steps + 1) {
    throw ArgumentError("run: explicit schedule has " + std::to_string(*len) + " values, " + std::to_string(n_steps) +
                        " steps need " + std::to_string(n_steps + 1));
  }

  DescentLog log;
  log.region = region;
  log.problem_spec = problem.spec();
  log.schedule_spec = schedule.to_spec();
  log.iterates.reserve(n_steps + 1);

  Vector x(x0.begin(), x0.end());
  Vector g(problem.dim());
  double running = 0.0;
  for (std::size_t n = 0;; ++n) {
    double f = 0.0;
    try {
      f = problem.eval(x);
      problem.grad(x, g);
    } catch (const NumericOverflowError&) {
      if (n == 0) throw;
      log.stopped_reason = StopReason::overflow;
      break;
    }
    const double gamma = schedule.gamma(n);
    const double gn = norm2(g);
    const double next_sum = running + gamma * gn * gn;
    if (!std::isfinite(gn) || !std::isfinite(next_sum)) {
      if (n == 0) throw NumericOverflowError("run: gradient norm at x0 is not finite");
      log.stopped_reason = StopReason::overflow;
      break;
    }
    running = next_sum;
    log.iterates.push_back(x);
    log.f_values.push_back(f);
    log.grad_norms.push_back(gn);
    log.gammas.push_back(gamma);
    log.weighted_sum.push_back(running);
    log.in_region.push_back(region ? region->contains(x) : true);

    if (gn < stationary_threshold) {
      log.stopped_reason = StopReason::stationary;
      break;
    }
    if (n == n_steps) {
      log.stopped_reason = StopReason::horizon;
      break;
    }
    for (std::size_t i = 0; i < x.size(); ++i) x[i] -= gamma * g[i];
    if (!all_finite(x)) {
      log.stopped_reason = StopReason::overflow;
      break;
    }
  }
  return log;
}

/// Per-step audit of
///   F(x_{n+1}) - F(x_n) <= -gamma_n |g_n|^2 + c/(1+alpha) gamma_n^{1+alpha} |g_n|^{1+alpha}.
struct StepMargin {
  std::size_t n = 0;
  double lhs = 0.0;
  double bound = 0.0;
  double slack = 0.0;
  // Both endpoints in C. For convex C this puts the whole segment in C.
  bool inside_region = true;
};

inline std::vector<StepMargin> step_margins(const DescentLog& log, double c, double alpha) {
  if (log.iterates.empty()) throw ArgumentError("step_margins: empty log");
  if (!(c >= 0.0)) throw ArgumentError("step_margins: c must be non-negative");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ArgumentError("step_margins: alpha must lie in (0, 1]");
  std::vector<StepMargin> margins;
  margins.reserve(log.steps());
  for (std::size_t n = 0; n < log.steps(); ++n) {
    StepMargin m;
    m.n = n;
    m.lhs = log.f_values[n + 1] - log.f_values[n];
    const double gn = log.grad_norms[n];
    const double gamma = log.gammas[n];
    m.bound = -gamma * gn * gn + c / (1.0 + alpha) * std::pow(gamma * gn, 1.0 + alpha);
    m.slack = m.bound - m.lhs;
    m.inside_region = log.in_region[n] && log.in_region[n + 1];
    margins.push_back(m);
  }
  return margins;
}

struct DescentVerdict {
  bool f_cauchy = false;
  bool weighted_sum_plateau = false;
  double min_grad_tail = 0.0;
  double inf_f_observed = 0.0;

  std::size_t window = 0;
  double eps = 0.0;
  double f_spread = 0.0;
  double weighted_sum_increase = 0.0;
  double weighted_sum_final = 0.0;
  StopReason stopped_reason = StopReason::horizon;
};

/// Tail-window observations over the last `window` iterates. A stationary
/// stop means every later iterate equals x_N, so the tail is evaluated on
/// that constant continuation and `window` may exceed N. An overflow stop
/// never counts as convergence.
inline DescentVerdict detect_descent_convergence(const DescentLog& log, std::size_t window, double eps) {
  if (log.iterates.empty()) throw ArgumentError("detect_descent_convergence: empty log");
  if (window == 0) throw ArgumentError("detect_descent_convergence: window must be positive");
  if (!(eps > 0.0)) throw ArgumentError("detect_descent_convergence: eps must be positive");
  const std::size_t N = log.steps();
  const bool frozen = log.stopped_reason == StopReason::stationary;
  if (window > N && !frozen) {
    throw ArgumentError("detect_descent_convergence: window " + std::to_string(window) + " exceeds the " +
                        std::to_string(N) + " executed steps");
  }
  DescentVerdict v;
  v.window = window;
  v.eps = eps;
  v.stopped_reason = log.stopped_reason;
  v.inf_f_observed = *std::min_element(log.f_values.begin(), log.f_values.end());
  v.weighted_sum_final = log.weighted_sum.back();

  if (frozen) {
    v.f_spread = 0.0;
    v.weighted_sum_increase = 0.0;
    v.min_grad_tail = log.grad_norms.back();
  } else {
    const std::size_t first = N - window;  // window + 1 values x_{N-window}..x_N span `window` steps
    const auto [lo, hi] = std::minmax_element(log.f_values.begin() + static_cast<std::ptrdiff_t>(first) + 1,
                                              log.f_values.end());
    v.f_spread = *hi - *lo;
    v.weighted_sum_increase = log.weighted_sum[N] - log.weighted_sum[first];
    v.min_grad_tail = *std::min_element(log.grad_norms.begin() + static_cast<std::ptrdiff_t>(first) + 1,
                                        log.grad_norms.end());
  }
  const bool diverged = log.stopped_reason == StopReason::overflow;
  v.f_cauchy = !diverged && v.f_spread <= eps * (1.0 + std::abs(log.f_values.front()));
  v.weighted_sum_plateau = !diverged && v.weighted_sum_increase <= eps;
  return v;
}

/// CSV: n,x_0..x_{d-1},F,grad_norm,gamma,weighted_sum,in_region.
inline void write_descent_csv(std::ostream& os, const DescentLog& log) {
  const std::size_t d = log.iterates.empty() ? 0 : log.iterates.front().size();
  os << "n";
  for (std::size_t i = 0; i < d; ++i) os << ",x_" << i;
  os << ",F,grad_norm,gamma,weighted_sum,in_region\n";
  for (std::size_t n = 0; n < log.iterates.size(); ++n) {
    os << n;
    for (double v : log.iterates[n]) os << ',' << text::format_double(v);
    os << ',' << text::format_double(log.f_values[n]) << ',' << text::format_double(log.grad_norms[n]) << ','
       << text::format_double(log.gammas[n]) << ',' << text::format_double(log.weighted_sum[n]) << ','
       << (log.in_region[n] ? 1 : 0) << '\n';
  }
}

}  // namespace gradcert

#endif  // GRADCERT_DESCENT_HPP_
