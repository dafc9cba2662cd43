#ifndef GRADCERT_SCHEDULE_HPP_
#define GRADCERT_SCHEDULE_HPP_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "text.hpp"

namespace gradcert {

/// Step-size sequence gamma_n > 0, n = 0, 1, 2, ...
class Schedule {
 public:
  enum class Kind { constant, power_law, explicit_list };

  static Schedule constant(double a) {
    check_scale(a);
    return Schedule(Kind::constant, a, 0.0, {});
  }

  /// gamma_n = a (n+1)^(-beta).
  static Schedule power_law(double a, double beta) {
    check_scale(a);
    if (!(beta >= 0.0) || !std::isfinite(beta)) throw ArgumentError("power_law: beta must be finite and >= 0");
    return Schedule(Kind::power_law, a, beta, {});
  }

  static Schedule explicit_list(std::vector<double> values) {
    if (values.empty()) throw ArgumentError("explicit_list: no values");
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!(values[i] > 0.0) || !std::isfinite(values[i])) {
        throw ArgumentError("explicit_list: value " + std::to_string(i) + " is not a positive finite real");
      }
    }
    return Schedule(Kind::explicit_list, 0.0, 0.0, std::move(values));
  }

  Kind kind() const noexcept { return kind_; }
  double scale() const noexcept { return a_; }
  double beta() const noexcept { return beta_; }
  const std::vector<double>& values() const noexcept { return values_; }

  /// Number of defined terms; nullopt for infinite sequences.
  std::optional<std::size_t> length() const {
    if (kind_ == Kind::explicit_list) return values_.size();
    return std::nullopt;
  }

  double gamma(std::uint64_t n) const {
    switch (kind_) {
      case Kind::constant:
        return a_;
      case Kind::power_law:
        return a_ * std::pow(static_cast<double>(n) + 1.0, -beta_);
      case Kind::explicit_list:
        break;
    }
    if (n >= values_.size()) {
      throw ArgumentError("gamma: index " + std::to_string(n) + " beyond explicit list of length " +
                          std::to_string(values_.size()));
    }
    return values_[n];
  }

  /// sum_{l=0}^{n} gamma_l, Neumaier-compensated in long double.
  double partial_sum(std::uint64_t n) const {
    long double sum = 0.0L;
    long double comp = 0.0L;
    for (std::uint64_t l = 0; l <= n; ++l) {
      const long double v = gamma(l);
      const long double t = sum + v;
      comp += (std::fabs(sum) >= std::fabs(v)) ? (sum - t) + v : (v - t) + sum;
      sum = t;
    }
    return static_cast<double>(sum + comp);
  }

  std::string to_spec() const {
    switch (kind_) {
      case Kind::constant:
        return "const:" + text::format_double(a_);
      case Kind::power_law:
        return "pow:a=" + text::format_double(a_) + ",beta=" + text::format_double(beta_);
      case Kind::explicit_list:
        break;
    }
    return "list:" + text::join(values_);
  }

 private:
  Schedule(Kind k, double a, double beta, std::vector<double> values)
      : kind_(k), a_(a), beta_(beta), values_(std::move(values)) {}

  static void check_scale(double a) {
    if (!(a > 0.0) || !std::isfinite(a)) throw ArgumentError("schedule scale a must be positive and finite");
  }

  Kind kind_;
  double a_;
  double beta_;
  std::vector<double> values_;
};

enum class Answer { yes, no, vacuous, unknown };

inline std::string_view to_string(Answer a) {
  switch (a) {
    case Answer::yes:
      return "yes";
    case Answer::no:
      return "no";
    case Answer::vacuous:
      return "vacuous";
    case Answer::unknown:
      return "unknown";
  }
  return "unknown";
}

struct ScheduleVerdict {
  Answer limsup_zero = Answer::unknown;
  Answer power_sum_finite = Answer::unknown;
  Answer gamma_sum_diverges = Answer::unknown;
  double alpha_used = 1.0;
  // Explicit lists only: max of gamma over the last quarter of the list.
  std::optional<double> tail_max;
};

namespace detail {
// Series exponents that agree with 1 to this relative precision are treated
// as exactly 1 (the divergent harmonic case).
inline constexpr double exponent_tol = 1e-12;
}  // namespace detail

/// Checks the three step-size hypotheses against the Hoelder exponent alpha:
/// gamma_n -> 0, sum 1_{(0,1)}(alpha) gamma_n^{(1+alpha)/(1-alpha)} < inf, and
/// sum gamma_n = inf. Constant and power-law kinds are decided by p-series
/// rules; explicit lists never decide an infinite-sum question.
inline ScheduleVerdict classify(const Schedule& s, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ArgumentError("classify: alpha must lie in (0, 1]");
  ScheduleVerdict v;
  v.alpha_used = alpha;
  const bool holder_is_lipschitz = alpha == 1.0;

  switch (s.kind()) {
    case Schedule::Kind::constant:
      v.limsup_zero = Answer::no;
      v.gamma_sum_diverges = Answer::yes;
      v.power_sum_finite = holder_is_lipschitz ? Answer::vacuous : Answer::no;
      break;
    case Schedule::Kind::power_law: {
      const double beta = s.beta();
      v.limsup_zero = beta > 0.0 ? Answer::yes : Answer::no;
      v.gamma_sum_diverges = beta <= 1.0 + detail::exponent_tol ? Answer::yes : Answer::no;
      if (holder_is_lipschitz) {
        v.power_sum_finite = Answer::vacuous;
      } else {
        const double p = beta * (1.0 + alpha) / (1.0 - alpha);
        v.power_sum_finite = p > 1.0 + detail::exponent_tol ? Answer::yes : Answer::no;
      }
      break;
    }
    case Schedule::Kind::explicit_list: {
      const auto& vals = s.values();
      double tail = 0.0;
      for (std::size_t i = vals.size() - (vals.size() + 3) / 4; i < vals.size(); ++i) tail = std::max(tail, vals[i]);
      v.tail_max = tail;
      v.limsup_zero = Answer::unknown;
      v.gamma_sum_diverges = Answer::unknown;
      v.power_sum_finite = holder_is_lipschitz ? Answer::vacuous : Answer::unknown;
      break;
    }
  }
  return v;
}

inline std::vector<double> read_schedule_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open schedule file '" + path + "'");
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = text::trim(line);
    if (t.empty() || t.front() == '#') continue;
    try {
      values.push_back(text::parse_double(t, 0, "step size"));
    } catch (const ParseError& e) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what(), e.position());
    }
  }
  return values;
}

/// "const:0.1", "pow:a=1,beta=0.6" (a defaults to 1), "list:@file.csv",
/// or an inline "list:0.1,0.05,...".
inline Schedule parse_schedule(std::string_view spec) {
  const auto colon = spec.find(':');
  if (colon == std::string_view::npos) throw ParseError("schedule spec needs a 'const:', 'pow:' or 'list:' prefix", 0);
  const std::string_view kind = spec.substr(0, colon);
  const std::string_view body = spec.substr(colon + 1);
  const std::size_t base = colon + 1;
  if (kind == "const") return Schedule::constant(text::parse_double(body, base, "step size"));
  if (kind == "pow") {
    double a = 1.0;
    std::optional<double> beta;
    std::size_t pos = 0;
    for (std::string_view part : text::split(body, ',')) {
      const auto eq = part.find('=');
      if (eq == std::string_view::npos) throw ParseError("expected key=value in pow schedule", base + pos);
      const auto key = text::trim(part.substr(0, eq));
      const double val = text::parse_double(part.substr(eq + 1), base + pos + eq + 1, std::string(key));
      if (key == "a") {
        a = val;
      } else if (key == "beta") {
        beta = val;
      } else {
        throw ParseError("unknown pow schedule key '" + std::string(key) + "'", base + pos);
      }
      pos += part.size() + 1;
    }
    if (!beta) throw ArgumentError("pow schedule needs beta=...");
    return Schedule::power_law(a, *beta);
  }
  if (kind == "list") {
    if (!body.empty() && body.front() == '@') return Schedule::explicit_list(read_schedule_file(std::string(body.substr(1))));
    return Schedule::explicit_list(text::parse_list(body, base, "step size"));
  }
  throw ParseError("unknown schedule kind '" + std::string(kind) + "'", 0);
}

}  // namespace gradcert

#endif  // GRADCERT_SCHEDULE_HPP_
