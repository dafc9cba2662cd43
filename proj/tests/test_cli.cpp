#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "gradcert/cli.hpp"

using namespace gradcert;
using namespace gradcert::cli;

namespace {

std::string scratch(const std::string& name) {
  const auto dir = std::filesystem::path(::testing::TempDir()) / "gradcert_cli";
  std::filesystem::create_directories(dir);
  return (dir / name).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int run_cli(const std::vector<std::string>& args, std::string* out = nullptr, std::string* err = nullptr) {
  std::ostringstream o, e;
  const int code = cli::main(args, o, e);
  if (out) *out = o.str();
  if (err) *err = e.str();
  return code;
}

}  // namespace

TEST(ParseConfig, DescentExample) {
  const auto cfg = parse_config({"descent", "--problem", "quadratic:A=1,0;0,4", "--x0", "1,1", "--schedule",
                                 "pow:a=1,beta=0.6", "--steps", "1000"});
  EXPECT_EQ(cfg.command, "descent");
  EXPECT_EQ(cfg.problem, "quadratic:A=1,0;0,4");
  EXPECT_EQ(cfg.x0, (Vector{1, 1}));
  EXPECT_EQ(cfg.steps, 1000u);
}

TEST(ParseConfig, MissingProblemNamesTheFlag) {
  try {
    parse_config({"descent"});
    FAIL();
  } catch (const UsageError& e) {
    EXPECT_NE(std::string(e.what()).find("--problem"), std::string::npos);
  }
}

TEST(ParseConfig, ClassifyOnly) {
  const auto cfg = parse_config({"schedule", "--schedule", "pow:a=1,beta=0.6", "--alpha", "0.5"});
  EXPECT_EQ(cfg.command, "schedule");
  EXPECT_DOUBLE_EQ(cfg.alpha, 0.5);
  EXPECT_TRUE(cfg.alpha_given);
}

TEST(ParseConfig, MalformedNumberReportsPosition) {
  try {
    parse_config({"flow", "--problem", "rosenbrock", "--x0", "1,2x"});
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.position(), 3u);
  }
  EXPECT_THROW(parse_config({"flow", "--problem", "rosenbrock", "--horizon", "abc"}), ParseError);
  EXPECT_THROW(parse_config({"flow", "--problem", "rosenbrock", "--steps", "-3"}), ParseError);
}

TEST(ParseConfig, UnknownCommandAndKey) {
  EXPECT_THROW(parse_config({"dance"}), UsageError);
  try {
    parse_config({"flow", "--problem", "rosenbrock", "--speed", "3"});
    FAIL();
  } catch (const UsageError& e) {
    EXPECT_NE(std::string(e.what()).find("--speed"), std::string::npos);
  }
}

TEST(ParseConfig, FlagsOverrideConfigFile) {
  const std::string path = scratch("exp.cfg");
  {
    std::ofstream out(path);
    out << "# experiment\ncommand = flow\nproblem = rosenbrock\nhorizon = 3\ntol = 1e-6\n";
  }
  const auto cfg = parse_config({"--config", path, "--horizon", "7"});
  EXPECT_EQ(cfg.command, "flow");
  EXPECT_EQ(cfg.problem, "rosenbrock");
  EXPECT_DOUBLE_EQ(cfg.horizon, 7.0);
  EXPECT_DOUBLE_EQ(cfg.tol, 1e-6);
}

TEST(ParseConfig, UnknownKeyInConfigFile) {
  const std::string path = scratch("bad.cfg");
  {
    std::ofstream out(path);
    out << "command = flow\nproblme = rosenbrock\n";
  }
  try {
    parse_config({"--config", path});
    FAIL();
  } catch (const UsageError& e) {
    EXPECT_NE(std::string(e.what()).find("problme"), std::string::npos);
  }
}

TEST(ParseConfig, TheoremMustMatchCommand) {
  EXPECT_THROW(parse_config({"flow", "--problem", "rosenbrock", "--theorem", "GD-3.1"}), UsageError);
  EXPECT_EQ(*parse_config({"flow", "--problem", "rosenbrock", "--theorem", "GF-2.2"}).theorem, Theorem::gf_2_2);
}

TEST(Dispatch, FlowWritesArtifacts) {
  const std::string trace = scratch("flow.csv");
  const std::string cert = scratch("flow.json");
  std::filesystem::remove(trace);
  std::filesystem::remove(cert);
  EXPECT_EQ(run_cli({"flow", "--problem", "quadratic:diag=1,1", "--x0", "1,0", "--horizon", "20", "--out-trace", trace,
                     "--out-cert", cert}),
            ok);
  EXPECT_TRUE(std::filesystem::exists(trace));
  EXPECT_EQ(parse_certificate(slurp(cert)).theorem, Theorem::gf_2_1);
}

TEST(Dispatch, ConstantScheduleExitsOneWithCertificate) {
  const std::string cert = scratch("const.json");
  std::filesystem::remove(cert);
  EXPECT_EQ(run_cli({"descent", "--problem", "quadratic:diag=1,1", "--x0", "1,0", "--schedule", "const:0.1", "--steps",
                     "200", "--out-cert", cert}),
            hypothesis_violated);
  EXPECT_TRUE(std::filesystem::exists(cert));
}

TEST(Dispatch, DivergentRunRecordsOverflow) {
  const std::string trace = scratch("div.csv");
  const std::string cert = scratch("div.json");
  EXPECT_EQ(run_cli({"descent", "--problem", "quadratic:diag=1,1", "--x0", "1,0", "--schedule", "const:2.5",
                     "--out-trace", trace, "--out-cert", cert}),
            hypothesis_violated);
  EXPECT_EQ(parse_certificate(slurp(cert)).run["stopped_reason"], "overflow");
}

TEST(Dispatch, UnwritableOutputExitsThree) {
  std::string err;
  EXPECT_EQ(run_cli({"flow", "--problem", "rosenbrock", "--horizon", "1", "--out-cert", scratch("no/such/dir.json")},
                    nullptr, &err),
            numeric_failure);
  EXPECT_FALSE(err.empty());
}

TEST(Dispatch, UsageErrorsExitTwo) {
  EXPECT_EQ(run_cli({"descent"}), usage);
  EXPECT_EQ(run_cli({"flow", "--problem", "nosuch"}), usage);
  EXPECT_EQ(run_cli({"flow", "--problem", "rosenbrock", "--x0", "1,2,3"}), usage);
}

TEST(Dispatch, ScheduleAndHolderPrintJson) {
  std::string out;
  EXPECT_EQ(run_cli({"schedule", "--schedule", "pow:a=1,beta=0.6", "--alpha", "0.5", "--steps", "3"}, &out), ok);
  const auto j = Json::parse(out);
  EXPECT_EQ(j["power_sum_finite"], "yes");
  EXPECT_TRUE(j.contains("partial_sum"));

  EXPECT_EQ(run_cli({"holder", "--problem", "quadratic:diag=1,4", "--region", "box:-1,1", "--alpha", "1", "--pairs",
                     "2000"},
                    &out),
            ok);
  EXPECT_LE(Json::parse(out)["c_hat"].get<double>(), 4.0 + 1e-9);
}

TEST(Dispatch, ProblemsListsSuite) {
  std::string out;
  EXPECT_EQ(run_cli({"problems"}, &out), ok);
  for (const auto& e : problem_suite) EXPECT_NE(out.find(e.name), std::string::npos);
}

TEST(Dispatch, RepeatedRunsAreByteIdentical) {
  const std::vector<std::string> args{"certify-descent", "--problem", "ann_softplus:seed=1", "--schedule",
                                      "pow:a=0.5,beta=0.6", "--steps", "200", "--pairs", "500", "--seed", "4"};
  std::string a, b;
  run_cli(args, &a);
  run_cli(args, &b);
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, b);
}

TEST(Batch, RunsEntriesConcurrentlyInOrder) {
  const std::string path = scratch("batch.txt");
  {
    std::ofstream out(path);
    out << "# two runs\nschedule --schedule const:0.1\nschedule --schedule pow:a=1,beta=2\n";
  }
  std::string out;
  EXPECT_EQ(run_cli({"--batch", path}, &out), ok);
  EXPECT_LT(out.find("const:0.1"), out.find("pow:a=1,beta=2"));
}

TEST(Golden, MatchesReferenceArtifacts) {
  const std::string dir = GRADCERT_GOLDEN_DIR;
  const std::string trace = scratch("flow.csv");
  const std::string cert = scratch("flow_cert.json");
  ASSERT_EQ(run_cli({"flow", "--problem", "quadratic:diag=1,1", "--x0", "1,0", "--horizon", "1", "--tol", "1e-10",
                     "--out-trace", trace, "--out-cert", cert}),
            ok);
  EXPECT_EQ(slurp(trace), slurp(dir + "/flow.csv"));
  EXPECT_EQ(slurp(cert), slurp(dir + "/flow_cert.json"));
}
