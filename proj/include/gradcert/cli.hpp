#ifndef GRADCERT_CLI_HPP_
#define GRADCERT_CLI_HPP_

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <future>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "certify.hpp"
#include "descent.hpp"
#include "errors.hpp"
#include "flow.hpp"
#include "holder.hpp"
#include "objective.hpp"
#include "problems.hpp"
#include "schedule.hpp"
#include "text.hpp"

namespace gradcert::cli {

enum ExitCode : int { ok = 0, hypothesis_violated = 1, usage = 2, numeric_failure = 3 };

class UsageError : public ArgumentError {
 public:
  using ArgumentError::ArgumentError;
};

/// Raised for I/O problems while writing artifacts (exit code 3).
class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::string_view usage_text =
    "usage: gradcert <command> [--key value ...] [--config FILE]\n"
    "       gradcert --batch FILE\n"
    "commands: problems flow descent holder schedule certify-flow certify-descent\n"
    "flags: --problem --x0 --schedule --alpha --region --steps --horizon --tol --seed\n"
    "       --out-trace --out-cert --format --theorem --window --window-fraction --eps\n"
    "       --grad-eps --pairs --bins --norm --safety --c\n";

inline const std::set<std::string, std::less<>>& known_commands() {
  static const std::set<std::string, std::less<>> k{"problems", "flow", "descent", "holder",
                                                    "schedule", "certify-flow", "certify-descent"};
  return k;
}

inline const std::set<std::string, std::less<>>& known_keys() {
  static const std::set<std::string, std::less<>> k{
      "command", "problem", "x0",     "schedule",        "alpha", "region",   "steps", "horizon",
      "tol",     "seed",    "out-trace", "out-cert",     "format", "theorem", "window", "window-fraction",
      "eps",     "grad-eps", "pairs", "bins",            "norm",  "safety",   "c"};
  return k;
}

/// Validated settings for one invocation. Defaults are documented in README.
struct ExperimentConfig {
  std::string command;
  std::string problem;
  std::optional<Vector> x0;  // default: the problem's standard start
  std::string schedule;
  double alpha = 1.0;
  bool alpha_given = false;
  std::string region;
  std::size_t steps = 1000;
  bool steps_given = false;
  double horizon = 20.0;
  double tol = 1e-9;
  std::uint64_t seed = 0;
  std::string out_trace;
  std::string out_cert;
  ReportFormat format = ReportFormat::json;
  std::optional<Theorem> theorem;
  std::size_t window = 100;
  double window_fraction = 0.25;
  std::optional<double> eps;  // flow default 1e-6, descent default 1e-8
  double grad_eps = 1e-3;
  std::size_t pairs = 10000;
  std::size_t bins = 10;
  Norm norm = Norm::l2;
  double safety = 1.1;
  std::optional<double> c;
};

namespace detail {

using RawConfig = std::map<std::string, std::string, std::less<>>;

inline RawConfig read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path + "'");
  RawConfig raw;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = text::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string_view::npos) {
      throw UsageError(path + ":" + std::to_string(line_no) + ": expected key=value");
    }
    std::string key(text::trim(t.substr(0, eq)));
    if (!known_keys().count(key)) {
      throw UsageError(path + ":" + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    raw[key] = std::string(text::trim(t.substr(eq + 1)));
  }
  return raw;
}

inline double to_real(const RawConfig& raw, const std::string& key) {
  try {
    return text::parse_double(raw.at(key), 0, "--" + key + " value");
  } catch (const ParseError& e) {
    throw ParseError("--" + key + ": " + e.what(), e.position());
  }
}

inline std::uint64_t to_count(const RawConfig& raw, const std::string& key) {
  const std::string& s = raw.at(key);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError("--" + key + ": malformed non-negative integer '" + s + "'",
                     s.empty() ? 0 : static_cast<std::size_t>(ptr - s.data()));
  }
  return v;
}

}  // namespace detail

/// Parses argv-style arguments (without the program name). Values from
/// --config FILE are applied first; explicit flags override them.
inline ExperimentConfig parse_config(const std::vector<std::string>& args) {
  detail::RawConfig flags;
  std::optional<std::string> config_path;
  std::size_t i = 0;
  if (i < args.size() && args[i].rfind("--", 0) != 0) flags["command"] = args[i++];
  for (; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a.rfind("--", 0) != 0) throw UsageError("unexpected argument '" + a + "'");
    std::string key = a.substr(2);
    std::string value;
    if (const auto eq = key.find('='); eq != std::string::npos) {
      value = key.substr(eq + 1);
      key.resize(eq);
    } else {
      if (i + 1 >= args.size()) throw UsageError("option '--" + key + "' needs a value");
      value = args[++i];
    }
    if (key == "config") {
      config_path = value;
      continue;
    }
    if (!known_keys().count(key) || key == "command") throw UsageError("unknown option '--" + key + "'");
    flags[key] = value;
  }

  detail::RawConfig raw;
  if (config_path) raw = detail::read_config_file(*config_path);
  for (auto& [k, v] : flags) raw[k] = v;

  ExperimentConfig cfg;
  if (!raw.count("command")) throw UsageError("missing command");
  cfg.command = raw["command"];
  if (!known_commands().count(cfg.command)) throw UsageError("unknown command '" + cfg.command + "'");

  auto require = [&](const char* key) {
    if (!raw.count(key) || raw[key].empty()) {
      throw UsageError("command '" + cfg.command + "' requires --" + std::string(key));
    }
  };
  const std::string& c = cfg.command;
  if (c == "flow" || c == "certify-flow") require("problem");
  if (c == "descent" || c == "certify-descent") {
    require("problem");
    require("schedule");
  }
  if (c == "holder") {
    require("problem");
    require("region");
  }
  if (c == "schedule") require("schedule");

  if (raw.count("problem")) cfg.problem = raw["problem"];
  if (raw.count("schedule")) cfg.schedule = raw["schedule"];
  if (raw.count("region")) cfg.region = raw["region"];
  if (raw.count("out-trace")) cfg.out_trace = raw["out-trace"];
  if (raw.count("out-cert")) cfg.out_cert = raw["out-cert"];
  if (raw.count("x0")) {
    try {
      cfg.x0 = text::parse_list(raw["x0"], 0, "--x0 entry");
    } catch (const ParseError& e) {
      throw ParseError(std::string("--x0: ") + e.what(), e.position());
    }
  }
  if (raw.count("alpha")) {
    cfg.alpha = detail::to_real(raw, "alpha");
    cfg.alpha_given = true;
    if (!(cfg.alpha > 0.0 && cfg.alpha <= 1.0)) throw UsageError("--alpha must lie in (0, 1]");
  }
  if (raw.count("steps")) {
    cfg.steps = detail::to_count(raw, "steps");
    cfg.steps_given = true;
  }
  if (raw.count("horizon")) cfg.horizon = detail::to_real(raw, "horizon");
  if (raw.count("tol")) cfg.tol = detail::to_real(raw, "tol");
  if (raw.count("seed")) cfg.seed = detail::to_count(raw, "seed");
  if (raw.count("format")) cfg.format = report_format_from_string(raw["format"]);
  if (raw.count("theorem")) cfg.theorem = theorem_from_string(raw["theorem"]);
  if (raw.count("window")) cfg.window = detail::to_count(raw, "window");
  if (raw.count("window-fraction")) cfg.window_fraction = detail::to_real(raw, "window-fraction");
  if (raw.count("eps")) cfg.eps = detail::to_real(raw, "eps");
  if (raw.count("grad-eps")) cfg.grad_eps = detail::to_real(raw, "grad-eps");
  if (raw.count("pairs")) cfg.pairs = detail::to_count(raw, "pairs");
  if (raw.count("bins")) cfg.bins = detail::to_count(raw, "bins");
  if (raw.count("norm")) cfg.norm = norm_from_string(raw["norm"]);
  if (raw.count("safety")) cfg.safety = detail::to_real(raw, "safety");
  if (raw.count("c")) cfg.c = detail::to_real(raw, "c");

  if (cfg.theorem) {
    const bool flow_cmd = c == "flow" || c == "certify-flow";
    const bool descent_cmd = c == "descent" || c == "certify-descent";
    if ((flow_cmd && !is_flow_theorem(*cfg.theorem)) || (descent_cmd && is_flow_theorem(*cfg.theorem))) {
      throw UsageError("--theorem " + std::string(to_string(*cfg.theorem)) + " does not apply to '" + c + "'");
    }
  }
  return cfg;
}

namespace detail {

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw OutputError("cannot open '" + path + "' for writing");
  out << content;
  out.flush();
  if (!out) throw OutputError("failed writing '" + path + "'");
}

inline Vector start_point(const ExperimentConfig& cfg, const Problem& p) {
  Vector x0 = cfg.x0.value_or(p.standard_start());
  if (x0.size() != p.dim()) {
    throw UsageError("--x0 has " + std::to_string(x0.size()) + " entries, problem '" + p.name() + "' has dimension " +
                     std::to_string(p.dim()));
  }
  return x0;
}

// Smallest box around the iterates, padded so it has positive volume.
inline ConvexRegion iterate_hull_box(const DescentLog& log) {
  const std::size_t d = log.iterates.front().size();
  Vector lo(log.iterates.front()), hi(log.iterates.front());
  for (const auto& x : log.iterates) {
    for (std::size_t i = 0; i < d; ++i) {
      lo[i] = std::min(lo[i], x[i]);
      hi[i] = std::max(hi[i], x[i]);
    }
  }
  for (std::size_t i = 0; i < d; ++i) {
    const double pad = std::max({1e-3 * std::max({1.0, std::abs(lo[i]), std::abs(hi[i])}), 0.05 * (hi[i] - lo[i])});
    lo[i] -= pad;
    hi[i] += pad;
  }
  return ConvexRegion::box(lo, hi);
}

inline Json holder_json(const HolderEstimate& est) {
  Json j;
  j["alpha"] = est.alpha;
  j["c_hat"] = est.c_hat;
  j["n_pairs"] = est.n_pairs;
  j["seed"] = est.seed;
  j["norm"] = std::string(to_string(est.norm));
  if (est.raw_slope) j["raw_slope"] = *est.raw_slope;
  j["max_ratio_pair"] = {{"x", est.max_ratio_pair.x}, {"y", est.max_ratio_pair.y}};
  j["label"] = "empirical, from below";
  return j;
}

inline int emit_certificate(const ExperimentConfig& cfg, const Certificate& cert, bool to_stdout, std::ostream& out) {
  const std::string report = emit_report(cert, cfg.format);
  if (!cfg.out_cert.empty()) write_file(cfg.out_cert, report);
  if (to_stdout && cfg.out_cert.empty()) out << report;
  return cert.any_violated() ? hypothesis_violated : ok;
}

inline int run_flow(const ExperimentConfig& cfg, std::ostream& out) {
  const Problem problem = make_problem(cfg.problem);
  const Vector x0 = start_point(cfg, problem);
  const FlowTrajectory traj = integrate(problem, x0, cfg.horizon, cfg.tol);
  const FlowVerdict verdict = detect_flow_convergence(traj, cfg.window_fraction, cfg.eps.value_or(1e-6));
  const Certificate cert = certify_flow(problem, traj, verdict, cfg.theorem.value_or(Theorem::gf_2_1));
  if (!cfg.out_trace.empty()) {
    std::ostringstream csv;
    write_flow_csv(csv, traj);
    write_file(cfg.out_trace, csv.str());
  }
  if (cfg.command == "flow") {
    out << "flow " << problem.spec() << " T=" << text::format_double(cfg.horizon) << " steps=" << traj.step_count
        << " rejected=" << traj.reject_count << " F(T)=" << text::format_double(traj.f_values.back())
        << " energy_residual=" << text::format_double(energy_residual(traj, problem)) << "\n";
  }
  return emit_certificate(cfg, cert, cfg.command == "certify-flow", out);
}

inline int run_descent(const ExperimentConfig& cfg, std::ostream& out) {
  const Problem problem = make_problem(cfg.problem);
  const Vector x0 = start_point(cfg, problem);
  const Schedule schedule = parse_schedule(cfg.schedule);
  std::optional<ConvexRegion> region;
  if (!cfg.region.empty()) region = parse_region(cfg.region, problem.dim());

  const DescentLog log = run(problem, x0, schedule, cfg.steps, region);
  const ScheduleVerdict sv = classify(schedule, cfg.alpha);

  HolderEstimate holder;
  double safety = cfg.safety;
  if (cfg.c) {
    holder.alpha = cfg.alpha;
    holder.c_hat = *cfg.c;
    holder.n_pairs = 0;
    holder.seed = cfg.seed;
    safety = 1.0;
  } else {
    const ConvexRegion box = region ? *region : iterate_hull_box(log);
    try {
      holder = estimate_c(problem, box, cfg.alpha, cfg.pairs, cfg.seed, cfg.norm);
    } catch (const NumericError&) {
      holder = HolderEstimate{};
      holder.alpha = cfg.alpha;
      holder.seed = cfg.seed;
      holder.norm = cfg.norm;
    }
  }
  const auto margins = step_margins(log, safety * holder.c_hat, cfg.alpha);
  std::size_t window = cfg.window;
  if (log.stopped_reason != StopReason::stationary) window = std::min(window, std::max<std::size_t>(log.steps(), 1));
  DescentVerdict verdict;
  if (log.steps() == 0 && log.stopped_reason != StopReason::stationary) {
    // overflow on the very first step: no tail to look at
    verdict.stopped_reason = log.stopped_reason;
    verdict.inf_f_observed = log.f_values.front();
    verdict.weighted_sum_final = log.weighted_sum.back();
    verdict.min_grad_tail = log.grad_norms.back();
    verdict.window = 0;
    verdict.eps = cfg.eps.value_or(1e-8);
  } else {
    verdict = detect_descent_convergence(log, window, cfg.eps.value_or(1e-8));
  }

  DescentCertifyOptions opt;
  opt.theorem = cfg.theorem.value_or(region ? Theorem::gd_3_2 : Theorem::gd_3_1);
  opt.safety = safety;
  opt.grad_eps = cfg.grad_eps;
  const Certificate cert = certify_descent(problem, log, sv, holder, margins, verdict, opt);

  if (!cfg.out_trace.empty()) {
    std::ostringstream csv;
    write_descent_csv(csv, log);
    write_file(cfg.out_trace, csv.str());
  }
  if (cfg.command == "descent") {
    out << "descent " << problem.spec() << " schedule=" << schedule.to_spec() << " steps=" << log.steps()
        << " stopped=" << to_string(log.stopped_reason) << " F_N=" << text::format_double(log.f_values.back())
        << " weighted_sum=" << text::format_double(log.weighted_sum.back()) << "\n";
  }
  return emit_certificate(cfg, cert, cfg.command == "certify-descent", out);
}

inline int run_holder(const ExperimentConfig& cfg, std::ostream& out) {
  const Problem problem = make_problem(cfg.problem);
  const ConvexRegion region = parse_region(cfg.region, problem.dim());
  const HolderEstimate est = cfg.alpha_given ? estimate_c(problem, region, cfg.alpha, cfg.pairs, cfg.seed, cfg.norm)
                                             : estimate_alpha(problem, region, cfg.pairs, cfg.bins, cfg.seed, cfg.norm);
  Json j = holder_json(est);
  j["problem"] = problem.spec();
  j["region"] = region.to_spec();
  const std::string s = j.dump(2) + "\n";
  if (!cfg.out_cert.empty()) write_file(cfg.out_cert, s);
  out << s;
  return ok;
}

inline int run_schedule(const ExperimentConfig& cfg, std::ostream& out) {
  const Schedule s = parse_schedule(cfg.schedule);
  const ScheduleVerdict v = classify(s, cfg.alpha);
  Json j;
  j["schedule"] = s.to_spec();
  j["alpha"] = v.alpha_used;
  j["limsup_zero"] = std::string(to_string(v.limsup_zero));
  j["power_sum_finite"] = std::string(to_string(v.power_sum_finite));
  j["gamma_sum_diverges"] = std::string(to_string(v.gamma_sum_diverges));
  if (v.tail_max) j["tail_max_gamma"] = *v.tail_max;
  if (cfg.steps_given) {
    j["partial_sum_n"] = cfg.steps;
    j["partial_sum"] = s.partial_sum(cfg.steps);
  }
  const std::string text = j.dump(2) + "\n";
  if (!cfg.out_cert.empty()) write_file(cfg.out_cert, text);
  out << text;
  return ok;
}

inline int run_problems(std::ostream& out) {
  for (const auto& e : problem_suite) {
    char line[32];
    std::snprintf(line, sizeof line, "%-14s", std::string(e.name).c_str());
    out << line << e.summary << "\n";
  }
  return ok;
}

}  // namespace detail

/// Runs one validated config. Exit codes: 0 success, 1 a hypothesis was
/// recorded as violated (artifacts are still written), 3 numeric or I/O
/// failure. Messages go to `err`.
inline int dispatch(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    if (cfg.command == "problems") return detail::run_problems(out);
    if (cfg.command == "schedule") return detail::run_schedule(cfg, out);
    if (cfg.command == "holder") return detail::run_holder(cfg, out);
    if (cfg.command == "flow" || cfg.command == "certify-flow") return detail::run_flow(cfg, out);
    if (cfg.command == "descent" || cfg.command == "certify-descent") return detail::run_descent(cfg, out);
    err << "gradcert: unknown command '" << cfg.command << "'\n" << usage_text;
    return usage;
  } catch (const ArgumentError& e) {
    err << "gradcert: " << e.what() << "\n";
    return usage;
  } catch (const NumericError& e) {
    err << "gradcert: numeric failure: " << e.what() << "\n";
    return numeric_failure;
  } catch (const OutputError& e) {
    err << "gradcert: " << e.what() << "\n";
    return numeric_failure;
  }
}

/// Full entry point: parsing, --batch handling, dispatch.
inline int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

namespace detail {

inline int run_batch(const std::string& path, std::ostream& out, std::ostream& err) {
  std::ifstream in(path);
  if (!in) {
    err << "gradcert: cannot open batch file '" << path << "'\n";
    return usage;
  }
  std::vector<std::vector<std::string>> entries;
  std::string line;
  while (std::getline(in, line)) {
    const auto t = text::trim(line);
    if (t.empty() || t.front() == '#') continue;
    std::istringstream words{std::string(t)};
    std::vector<std::string> args;
    for (std::string w; words >> w;) args.push_back(w);
    entries.push_back(std::move(args));
  }
  struct Result {
    int code;
    std::string out;
    std::string err;
  };
  std::vector<std::future<Result>> jobs;
  for (const auto& args : entries) {
    jobs.push_back(std::async(std::launch::async, [args] {
      std::ostringstream o, e;
      const int code = cli::main(args, o, e);
      return Result{code, o.str(), e.str()};
    }));
  }
  int worst = ok;
  for (auto& j : jobs) {
    const Result r = j.get();
    out << r.out;
    err << r.err;
    worst = std::max(worst, r.code);
  }
  return worst;
}

}  // namespace detail

inline int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  if (args.size() == 2 && args[0] == "--batch") return detail::run_batch(args[1], out, err);
  if (args.size() == 1 && (args[0] == "--help" || args[0] == "-h")) {
    out << usage_text;
    return ok;
  }
  ExperimentConfig cfg;
  try {
    cfg = parse_config(args);
  } catch (const ArgumentError& e) {
    err << "gradcert: " << e.what() << "\n" << usage_text;
    return usage;
  }
  return dispatch(cfg, out, err);
}

}  // namespace gradcert::cli

#endif  // GRADCERT_CLI_HPP_
