#ifndef GRADCERT_CERTIFY_HPP_
#define GRADCERT_CERTIFY_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "descent.hpp"
#include "errors.hpp"
#include "flow.hpp"
#include "holder.hpp"
#include "linalg.hpp"
#include "objective.hpp"
#include "schedule.hpp"

namespace gradcert {

using Json = nlohmann::ordered_json;

inline constexpr std::string_view schema_version = "gradcert/1";

enum class Verdict { verified, observed_on_horizon, violated, unknown };

inline std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::verified:
      return "verified";
    case Verdict::observed_on_horizon:
      return "observed-on-horizon";
    case Verdict::violated:
      return "violated";
    case Verdict::unknown:
      return "unknown";
  }
  return "unknown";
}

inline Verdict verdict_from_string(std::string_view s) {
  if (s == "verified") return Verdict::verified;
  if (s == "observed-on-horizon") return Verdict::observed_on_horizon;
  if (s == "violated") return Verdict::violated;
  if (s == "unknown") return Verdict::unknown;
  throw ArgumentError("unknown verdict '" + std::string(s) + "'");
}

enum class Theorem { gf_2_1, gf_2_2, gd_3_1, gd_3_2 };

inline std::string_view to_string(Theorem t) {
  switch (t) {
    case Theorem::gf_2_1:
      return "GF-2.1";
    case Theorem::gf_2_2:
      return "GF-2.2";
    case Theorem::gd_3_1:
      return "GD-3.1";
    case Theorem::gd_3_2:
      return "GD-3.2";
  }
  return "GF-2.1";
}

inline Theorem theorem_from_string(std::string_view s) {
  if (s == "GF-2.1") return Theorem::gf_2_1;
  if (s == "GF-2.2") return Theorem::gf_2_2;
  if (s == "GD-3.1") return Theorem::gd_3_1;
  if (s == "GD-3.2") return Theorem::gd_3_2;
  throw ArgumentError("unknown theorem '" + std::string(s) + "' (expected GF-2.1, GF-2.2, GD-3.1 or GD-3.2)");
}

inline bool is_flow_theorem(Theorem t) { return t == Theorem::gf_2_1 || t == Theorem::gf_2_2; }

struct Hypothesis {
  std::string id;
  std::string description;
  Verdict verdict = Verdict::unknown;
  Json evidence = Json::object();

  bool operator==(const Hypothesis&) const = default;
};

struct Conclusion {
  std::string id;
  Verdict verdict = Verdict::unknown;
  Json evidence = Json::object();

  bool operator==(const Conclusion&) const = default;
};

/// Finite-run verdicts on every hypothesis and conclusion of one theorem.
struct Certificate {
  Theorem theorem = Theorem::gf_2_1;
  std::string problem;
  Json run = Json::object();
  std::vector<Hypothesis> hypotheses;
  std::vector<Conclusion> conclusions;

  /// All hypotheses verified or observed on the horizon.
  bool admissible() const {
    return std::all_of(hypotheses.begin(), hypotheses.end(), [](const Hypothesis& h) {
      return h.verdict == Verdict::verified || h.verdict == Verdict::observed_on_horizon;
    });
  }

  bool any_violated() const {
    return std::any_of(hypotheses.begin(), hypotheses.end(),
                       [](const Hypothesis& h) { return h.verdict == Verdict::violated; });
  }

  bool operator==(const Certificate&) const = default;
};

/// Hypothesis clause ids required for each theorem, in report order.
inline std::vector<std::string_view> hypothesis_ids(Theorem t) {
  switch (t) {
    case Theorem::gf_2_1:
      return {"C1", "inf-F"};
    case Theorem::gf_2_2:
      return {"C1", "bounded-x"};
    case Theorem::gd_3_1:
      return {"C1", "holder-on-C", "limsup-gamma", "power-sum", "inf-F"};
    case Theorem::gd_3_2:
      return {"C1", "holder-on-C", "limsup-gamma", "power-sum", "inf-F", "sum-gamma-infinite"};
  }
  return {};
}

inline std::vector<std::string_view> conclusion_ids(Theorem t) {
  if (t == Theorem::gd_3_2) return {"(i)", "(ii)", "(iii)"};
  return {"(i)", "(ii)"};
}

inline std::string_view conclusion_statement(Theorem t, std::string_view id) {
  if (id == "(i)") return is_flow_theorem(t) ? "F(x(t)) converges as t -> inf" : "F(x_n) converges";
  if (id == "(ii)") {
    switch (t) {
      case Theorem::gf_2_1:
        return "integral of |grad F(x(s))|^2 over [0, inf) is finite";
      case Theorem::gf_2_2:
        return "limsup |grad F(x(t))| = 0";
      default:
        return "sum gamma_n |grad F(x_n)|^2 is finite";
    }
  }
  if (id == "(iii)") return "limsup |grad F(x_n)| = 0 when sum gamma_n = inf";
  return "";
}

/// Checks the structural invariants: every required clause exactly once, and
/// no verified conclusion without admissible hypotheses.
inline void validate(const Certificate& cert) {
  auto expect = [](const auto& have, const std::vector<std::string_view>& want, const char* what) {
    if (have.size() != want.size()) throw std::logic_error(std::string("certificate: wrong number of ") + what);
    for (std::size_t i = 0; i < want.size(); ++i) {
      if (have[i].id != want[i]) throw std::logic_error(std::string("certificate: unexpected ") + what + " '" + have[i].id + "'");
    }
  };
  expect(cert.hypotheses, hypothesis_ids(cert.theorem), "hypotheses");
  expect(cert.conclusions, conclusion_ids(cert.theorem), "conclusions");
  if (!cert.admissible()) {
    for (const auto& c : cert.conclusions) {
      if (c.verdict == Verdict::verified) {
        throw std::logic_error("certificate: conclusion " + c.id + " verified without admissible hypotheses");
      }
    }
  }
}

namespace detail {

inline Json vector_json(ConstVectorView v) { return Json(std::vector<double>(v.begin(), v.end())); }

inline Verdict from_answer(Answer a) {
  switch (a) {
    case Answer::yes:
    case Answer::vacuous:
      return Verdict::verified;
    case Answer::no:
      return Verdict::violated;
    case Answer::unknown:
      break;
  }
  return Verdict::unknown;
}

inline constexpr double c1_probe_h = 1e-5;
inline constexpr double c1_threshold = 1e-5;
inline constexpr std::size_t c1_probe_count = 20;

// Gradient check at up to 20 evenly spaced points of a run.
inline Hypothesis c1_clause(const Problem& problem, const std::vector<Vector>& points) {
  Hypothesis h{"C1", "F is C^1 (analytic gradient agrees with central differences along the run)", Verdict::unknown, {}};
  double worst = 0.0;
  std::size_t checked = 0;
  const std::size_t m = points.size();
  const std::size_t count = std::min(c1_probe_count, m);
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t idx = count == 1 ? 0 : k * (m - 1) / (count - 1);
    try {
      worst = std::max(worst, check_gradient(problem, points[idx], c1_probe_h));
      ++checked;
    } catch (const NumericOverflowError&) {
    }
  }
  h.evidence["points_checked"] = checked;
  h.evidence["max_relative_error"] = worst;
  h.evidence["h"] = c1_probe_h;
  h.evidence["threshold"] = c1_threshold;
  if (checked == 0) {
    h.verdict = Verdict::unknown;
  } else {
    h.verdict = worst <= c1_threshold ? Verdict::verified : Verdict::violated;
  }
  return h;
}

inline Hypothesis inf_clause(const Problem& problem, double min_observed) {
  Hypothesis h{"inf-F", "F is bounded below along the run (inf F > -inf)", Verdict::unknown, {}};
  if (problem.lower_bound()) {
    h.verdict = Verdict::verified;
    h.evidence["lower_bound"] = *problem.lower_bound();
  } else {
    h.verdict = Verdict::observed_on_horizon;
  }
  h.evidence["min_observed_F"] = min_observed;
  return h;
}

inline Verdict conclusion_verdict(bool passes, bool admissible) {
  if (!passes) return Verdict::violated;
  return admissible ? Verdict::verified : Verdict::observed_on_horizon;
}

inline void finish(Certificate& cert) {
  const bool ok = cert.admissible();
  for (auto& c : cert.conclusions) {
    const bool passes = c.evidence.value("passes", false);
    c.verdict = conclusion_verdict(passes, ok);
  }
  cert.run["applicable"] = ok;
  validate(cert);
}

}  // namespace detail

/// Certificate for a gradient-flow run under GF-2.1 or GF-2.2.
inline Certificate certify_flow(const Problem& problem, const FlowTrajectory& traj, const FlowVerdict& verdict,
                                Theorem theorem = Theorem::gf_2_1) {
  if (!is_flow_theorem(theorem)) throw ArgumentError("certify_flow: theorem must be GF-2.1 or GF-2.2");
  detail::check_same_problem(traj, problem, "certify_flow");
  if (traj.size() == 0) throw ArgumentError("certify_flow: empty trajectory");
  if (verdict.window_points > traj.size() ||
      std::abs(verdict.window_start - traj.horizon * (1.0 - verdict.window_fraction)) > 1e-12 * traj.horizon) {
    throw ArgumentError("certify_flow: verdict does not belong to this trajectory");
  }

  Certificate cert;
  cert.theorem = theorem;
  cert.problem = problem.spec();
  const double f0 = traj.f_values.front();
  const double min_f = *std::min_element(traj.f_values.begin(), traj.f_values.end());
  const double residual = energy_residual(traj, problem);

  cert.run["kind"] = "flow";
  cert.run["x0"] = detail::vector_json(traj.initial_state());
  cert.run["horizon"] = traj.horizon;
  cert.run["tol"] = traj.tol;
  cert.run["steps"] = traj.step_count;
  cert.run["rejected_steps"] = traj.reject_count;
  cert.run["grid_points"] = traj.size();
  cert.run["window_fraction"] = verdict.window_fraction;
  cert.run["eps"] = verdict.eps;
  cert.run["energy_residual"] = residual;
  cert.run["x_settled"] = verdict.x_settled;
  cert.run["tail_diameter"] = verdict.tail_diameter;
  cert.run["grad_tail_max"] = verdict.grad_tail_max;
  cert.run["max_norm_x"] = verdict.x_bound;
  Json notes = Json::array();
  notes.push_back("verdicts are observations on [0, T], not statements about t -> inf");
  if (verdict.grad_vanishes && !verdict.x_settled) {
    notes.push_back(
        "gradient vanishes on the tail window but x(t) has not settled; the theorems do not claim that x(t) converges, "
        "so this is consistent with them");
  }
  cert.run["notes"] = notes;

  cert.hypotheses.push_back(detail::c1_clause(problem, traj.states));
  if (theorem == Theorem::gf_2_1) {
    cert.hypotheses.push_back(detail::inf_clause(problem, min_f));
  } else {
    Hypothesis h{"bounded-x", "trajectory x is bounded", Verdict::observed_on_horizon, {}};
    h.evidence["max_norm_x"] = verdict.x_bound;
    cert.hypotheses.push_back(h);
  }

  Conclusion ci{"(i)", Verdict::unknown, {}};
  ci.evidence["passes"] = verdict.f_converged;
  ci.evidence["f_spread"] = verdict.f_spread;
  ci.evidence["threshold"] = verdict.eps * (1.0 + std::abs(f0));
  ci.evidence["F_final"] = traj.f_values.back();
  cert.conclusions.push_back(ci);

  Conclusion cii{"(ii)", Verdict::unknown, {}};
  if (theorem == Theorem::gf_2_1) {
    const double inf_f = problem.lower_bound().value_or(min_f);
    const double bound = f0 - inf_f;
    const double allowance = 100.0 * traj.tol * (1.0 + std::abs(f0));
    cii.evidence["passes"] = traj.energy_integral.back() <= bound + allowance;
    cii.evidence["energy_integral_T"] = traj.energy_integral.back();
    cii.evidence["bound"] = bound;
    cii.evidence["allowance"] = allowance;
  } else {
    cii.evidence["passes"] = verdict.grad_vanishes;
    cii.evidence["grad_tail_max"] = verdict.grad_tail_max;
    cii.evidence["threshold"] = verdict.eps;
  }
  cert.conclusions.push_back(cii);

  detail::finish(cert);
  return cert;
}

struct DescentCertifyOptions {
  Theorem theorem = Theorem::gd_3_1;
  // Multiplier applied to c_hat to obtain the c used in the step margins.
  double safety = 1.1;
  // Relative tolerance below zero that a margin slack may reach.
  double tol_check = 1e-12;
  // eps for conclusion (iii): min gradient norm on the tail window.
  double grad_eps = 1e-3;
};

/// Certificate for a gradient-descent run under GD-3.1 or GD-3.2.
inline Certificate certify_descent(const Problem& problem, const DescentLog& log, const ScheduleVerdict& schedule_verdict,
                                   const HolderEstimate& holder, const std::vector<StepMargin>& margins,
                                   const DescentVerdict& verdict, const DescentCertifyOptions& opt = {}) {
  if (is_flow_theorem(opt.theorem)) throw ArgumentError("certify_descent: theorem must be GD-3.1 or GD-3.2");
  if (schedule_verdict.alpha_used != holder.alpha) {
    throw ArgumentError("certify_descent: schedule was classified at alpha = " +
                        text::format_double(schedule_verdict.alpha_used) + " but the Hoelder estimate uses alpha = " +
                        text::format_double(holder.alpha));
  }
  if (log.problem_spec != problem.spec()) throw ArgumentError("certify_descent: log belongs to a different problem");
  if (log.iterates.empty()) throw ArgumentError("certify_descent: empty log");
  if (margins.size() != log.steps() || verdict.stopped_reason != log.stopped_reason) {
    throw ArgumentError("certify_descent: margins or verdict do not belong to this log");
  }
  const bool bounded_theorem = opt.theorem == Theorem::gd_3_2;

  Certificate cert;
  cert.theorem = opt.theorem;
  cert.problem = problem.spec();
  const double c_used = opt.safety * holder.c_hat;

  cert.run["kind"] = "descent";
  cert.run["x0"] = detail::vector_json(log.iterates.front());
  cert.run["schedule"] = log.schedule_spec;
  cert.run["steps"] = log.steps();
  cert.run["stopped_reason"] = std::string(to_string(log.stopped_reason));
  cert.run["region"] = log.region ? log.region->to_spec() : std::string("R^d");
  cert.run["window"] = verdict.window;
  cert.run["eps"] = verdict.eps;
  cert.run["holder_seed"] = holder.seed;

  std::size_t inside = 0;
  for (bool b : log.in_region) inside += b ? 1 : 0;
  const double inside_fraction = static_cast<double>(inside) / static_cast<double>(log.in_region.size());

  std::size_t audited = 0;
  std::size_t negative = 0;
  double worst = 0.0;
  for (const auto& m : margins) {
    if (!m.inside_region) continue;
    ++audited;
    if (m.slack < -opt.tol_check * (1.0 + std::abs(m.lhs))) ++negative;
    if (audited == 1 || m.slack < worst) worst = m.slack;
  }
  Json audit;
  audit["c_used"] = c_used;
  audit["alpha"] = holder.alpha;
  audit["tol_check"] = opt.tol_check;
  audit["steps_in_C"] = audited;
  audit["negative_slack_steps"] = negative;
  audit["worst_slack"] = worst;
  cert.run["descent_inequality_audit"] = audit;
  Json notes = Json::array();
  notes.push_back("verdicts are observations on n <= N, not statements about n -> inf");
  notes.push_back("endpoint containment of x_n and x_{n+1} in convex C implies the whole segment lies in C");
  if (verdict.stopped_reason == StopReason::stationary) {
    notes.push_back("run stopped at a stationary point; the tail is the constant continuation");
  }
  cert.run["notes"] = notes;

  cert.hypotheses.push_back(detail::c1_clause(problem, log.iterates));

  Hypothesis hold{"holder-on-C",
                  "<grad F(x)-grad F(y), x-y> <= c |x-y|^(1+alpha) on convex C, and every iterate lies in C",
                  Verdict::observed_on_horizon,
                  {}};
  hold.evidence["alpha"] = holder.alpha;
  hold.evidence["c_hat"] = holder.c_hat;
  hold.evidence["n_pairs"] = holder.n_pairs;
  hold.evidence["seed"] = holder.seed;
  hold.evidence["norm"] = std::string(to_string(holder.norm));
  hold.evidence["label"] = "empirical, from below";
  hold.evidence["safety"] = opt.safety;
  hold.evidence["c_used"] = c_used;
  hold.evidence["in_region_fraction"] = inside_fraction;
  if (holder.n_pairs == 0) {
    if (holder.c_hat > 0.0) {
      hold.evidence["label"] = "supplied by caller";
    } else {
      hold.verdict = Verdict::unknown;
      hold.evidence["reason"] = "no usable Hoelder sample";
    }
  }
  if (inside != log.in_region.size()) hold.verdict = Verdict::violated;
  if (bounded_theorem && !log.region) {
    hold.verdict = Verdict::violated;
    hold.evidence["reason"] = "GD-3.2 needs a bounded convex region";
  }
  cert.hypotheses.push_back(hold);

  auto schedule_clause = [&](const char* id, const char* what, Answer a) {
    Hypothesis h{id, what, detail::from_answer(a), {}};
    h.evidence["classification"] = std::string(to_string(a));
    if (schedule_verdict.tail_max) h.evidence["tail_max_gamma"] = *schedule_verdict.tail_max;
    return h;
  };
  cert.hypotheses.push_back(schedule_clause("limsup-gamma", "step sizes tend to zero", schedule_verdict.limsup_zero));
  cert.hypotheses.push_back(schedule_clause(
      "power-sum", "sum 1_(0,1)(alpha) gamma_n^((1+alpha)/(1-alpha)) is finite", schedule_verdict.power_sum_finite));
  cert.hypotheses.push_back(detail::inf_clause(problem, verdict.inf_f_observed));
  if (log.stopped_reason == StopReason::overflow) {
    cert.hypotheses.back().verdict = Verdict::violated;
    cert.hypotheses.back().evidence["reason"] = "iterates overflowed";
  }
  if (bounded_theorem) {
    cert.hypotheses.push_back(
        schedule_clause("sum-gamma-infinite", "sum gamma_n diverges", schedule_verdict.gamma_sum_diverges));
  }

  Conclusion ci{"(i)", Verdict::unknown, {}};
  ci.evidence["passes"] = verdict.f_cauchy;
  ci.evidence["f_spread"] = verdict.f_spread;
  ci.evidence["threshold"] = verdict.eps * (1.0 + std::abs(log.f_values.front()));
  ci.evidence["F_final"] = log.f_values.back();
  cert.conclusions.push_back(ci);

  Conclusion cii{"(ii)", Verdict::unknown, {}};
  cii.evidence["passes"] = verdict.weighted_sum_plateau;
  cii.evidence["weighted_sum_final"] = verdict.weighted_sum_final;
  cii.evidence["tail_increase"] = verdict.weighted_sum_increase;
  cii.evidence["threshold"] = verdict.eps;
  cert.conclusions.push_back(cii);

  if (bounded_theorem) {
    Conclusion ciii{"(iii)", Verdict::unknown, {}};
    ciii.evidence["passes"] = verdict.stopped_reason != StopReason::overflow && verdict.min_grad_tail <= opt.grad_eps;
    ciii.evidence["min_grad_tail"] = verdict.min_grad_tail;
    ciii.evidence["threshold"] = opt.grad_eps;
    cert.conclusions.push_back(ciii);
  }

  detail::finish(cert);
  return cert;
}

inline Json to_json(const Certificate& cert) {
  Json j;
  j["schema"] = schema_version;
  j["theorem"] = std::string(to_string(cert.theorem));
  j["problem"] = cert.problem;
  j["run"] = cert.run;
  j["hypotheses"] = Json::array();
  for (const auto& h : cert.hypotheses) {
    j["hypotheses"].push_back(
        {{"id", h.id}, {"description", h.description}, {"verdict", to_string(h.verdict)}, {"evidence", h.evidence}});
  }
  j["conclusions"] = Json::array();
  for (const auto& c : cert.conclusions) {
    j["conclusions"].push_back({{"id", c.id}, {"verdict", to_string(c.verdict)}, {"evidence", c.evidence}});
  }
  return j;
}

inline Certificate certificate_from_json(const Json& j) {
  if (j.value("schema", "") != schema_version) throw ArgumentError("certificate: unsupported schema");
  Certificate cert;
  cert.theorem = theorem_from_string(j.at("theorem").get<std::string>());
  cert.problem = j.at("problem").get<std::string>();
  cert.run = j.at("run");
  for (const auto& h : j.at("hypotheses")) {
    cert.hypotheses.push_back({h.at("id").get<std::string>(), h.at("description").get<std::string>(),
                               verdict_from_string(h.at("verdict").get<std::string>()), h.at("evidence")});
  }
  for (const auto& c : j.at("conclusions")) {
    cert.conclusions.push_back(
        {c.at("id").get<std::string>(), verdict_from_string(c.at("verdict").get<std::string>()), c.at("evidence")});
  }
  return cert;
}

inline Certificate parse_certificate(std::string_view text) { return certificate_from_json(Json::parse(text)); }

enum class ReportFormat { json, text };

inline ReportFormat report_format_from_string(std::string_view s) {
  if (s == "json") return ReportFormat::json;
  if (s == "text") return ReportFormat::text;
  throw ArgumentError("unknown format '" + std::string(s) + "' (expected json or text)");
}

/// Serializes a certificate after re-checking its structural invariants.
inline std::string emit_report(const Certificate& cert, ReportFormat format) {
  validate(cert);
  if (format == ReportFormat::json) return to_json(cert).dump(2) + "\n";

  std::ostringstream os;
  os << "certificate " << schema_version << "  theorem " << to_string(cert.theorem) << "  problem " << cert.problem
     << "\n";
  if (cert.any_violated()) os << "*** HYPOTHESIS VIOLATED ***\n";
  if (!cert.admissible()) os << "*** THEOREM NOT APPLICABLE: conclusions below are reported, not certified ***\n";
  os << "\nhypotheses\n";
  for (const auto& h : cert.hypotheses) {
    char line[96];
    std::snprintf(line, sizeof line, "  %-20s %-20s ", h.id.c_str(), std::string(to_string(h.verdict)).c_str());
    os << line << h.description << "\n      " << h.evidence.dump() << "\n";
  }
  os << "\nconclusions\n";
  for (const auto& c : cert.conclusions) {
    char line[96];
    std::snprintf(line, sizeof line, "  %-20s %-20s ", c.id.c_str(), std::string(to_string(c.verdict)).c_str());
    os << line << conclusion_statement(cert.theorem, c.id) << "\n      " << c.evidence.dump() << "\n";
  }
  os << "\nrun\n  " << cert.run.dump() << "\n";
  return os.str();
}

}  // namespace gradcert

#endif  // GRADCERT_CERTIFY_HPP_
