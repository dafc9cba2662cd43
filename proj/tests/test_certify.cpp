#include <gtest/gtest.h>

#include "gradcert/certify.hpp"
#include "gradcert/problems.hpp"

using namespace gradcert;

namespace {

Problem identity2() { return quadratic({1, 0, 0, 1}); }

Certificate flow_cert(const Problem& p, const Vector& x0, double T, Theorem th = Theorem::gf_2_1) {
  const auto traj = integrate(p, x0, T, 1e-10);
  return certify_flow(p, traj, detect_flow_convergence(traj, 0.25, 1e-6), th);
}

Certificate descent_cert(const Problem& p, const Vector& x0, const Schedule& s, std::size_t n,
                         std::optional<ConvexRegion> region, Theorem th) {
  const auto log = run(p, x0, s, n, region);
  const auto box = region.value_or(ConvexRegion::cube(p.dim(), -2, 2));
  const auto holder = estimate_c(p, box, 1.0, 2000, 0);
  const auto margins = step_margins(log, 1.1 * holder.c_hat, 1.0);
  const auto verdict = detect_descent_convergence(log, std::min<std::size_t>(100, std::max<std::size_t>(log.steps(), 1)), 1e-8);
  DescentCertifyOptions opt;
  opt.theorem = th;
  return certify_descent(p, log, classify(s, 1.0), holder, margins, verdict, opt);
}

Verdict hypothesis(const Certificate& c, std::string_view id) {
  for (const auto& h : c.hypotheses)
    if (h.id == id) return h.verdict;
  ADD_FAILURE() << "missing hypothesis " << id;
  return Verdict::unknown;
}

}  // namespace

TEST(CertifyFlow, QuadraticAllPass) {
  const auto c = flow_cert(identity2(), Vector{1, 0}, 20.0);
  validate(c);
  EXPECT_TRUE(c.admissible());
  for (const auto& k : c.conclusions) EXPECT_EQ(k.verdict, Verdict::verified) << k.id;
}

TEST(CertifyFlow, EquilibriumTrivialPass) {
  const Problem p = rosenbrock();
  const auto c = flow_cert(p, Vector{1, 1}, 5.0, Theorem::gf_2_2);
  EXPECT_TRUE(c.admissible());
  for (const auto& k : c.conclusions) EXPECT_EQ(k.verdict, Verdict::verified) << k.id;
}

TEST(CertifyFlow, MexicanHatNotesNonSettlingState) {
  const Problem p = mexican_hat();
  const auto c = flow_cert(p, p.standard_start(), 200.0, Theorem::gf_2_2);
  validate(c);
  EXPECT_TRUE(c.run.contains("x_settled"));
  EXPECT_EQ(c.conclusions.size(), 2u);
}

TEST(CertifyFlow, RejectsForeignTrajectory) {
  const auto traj = integrate(identity2(), Vector{1, 0}, 1.0, 1e-8);
  const auto v = detect_flow_convergence(traj, 0.25, 1e-6);
  EXPECT_THROW(certify_flow(rosenbrock(), traj, v), ArgumentError);
  EXPECT_THROW(certify_flow(identity2(), traj, v, Theorem::gd_3_1), ArgumentError);
}

TEST(CertifyDescent, PowerLawAllVerified) {
  const auto c = descent_cert(identity2(), Vector{1, 0}, Schedule::power_law(1, 1), 100000,
                              ConvexRegion::cube(2, -2, 2), Theorem::gd_3_2);
  validate(c);
  EXPECT_EQ(hypothesis(c, "power-sum"), Verdict::verified);
  EXPECT_EQ(hypothesis(c, "limsup-gamma"), Verdict::verified);
  EXPECT_FALSE(c.any_violated());
  for (const auto& k : c.conclusions) EXPECT_EQ(k.verdict, Verdict::verified) << k.id;
}

TEST(CertifyDescent, ConstantScheduleViolatesLimsup) {
  const auto c = descent_cert(identity2(), Vector{1, 0}, Schedule::constant(0.1), 500, std::nullopt, Theorem::gd_3_1);
  EXPECT_EQ(hypothesis(c, "limsup-gamma"), Verdict::violated);
  EXPECT_FALSE(c.admissible());
  for (const auto& k : c.conclusions) EXPECT_NE(k.verdict, Verdict::verified) << k.id;
  const std::string text = emit_report(c, ReportFormat::text);
  EXPECT_NE(text.find("HYPOTHESIS VIOLATED"), std::string::npos);
  EXPECT_NE(text.find("THEOREM NOT APPLICABLE"), std::string::npos);
}

TEST(CertifyDescent, LeavingRegionViolatesContainment) {
  const auto c = descent_cert(identity2(), Vector{1.5, 0}, Schedule::constant(1.9), 3, ConvexRegion::cube(2, 0, 2),
                              Theorem::gd_3_2);
  EXPECT_EQ(hypothesis(c, "holder-on-C"), Verdict::violated);
  const auto& audit = c.run["descent_inequality_audit"];
  EXPECT_LT(audit["steps_in_C"].get<std::size_t>(), 3u);
}

TEST(CertifyDescent, OverflowViolatesLowerBoundAndConclusions) {
  const Problem p = identity2();
  const auto c = descent_cert(p, Vector{1, 0}, Schedule::constant(2.5), 5000, std::nullopt, Theorem::gd_3_1);
  EXPECT_TRUE(c.any_violated());
  EXPECT_EQ(c.run["stopped_reason"], "overflow");
  for (const auto& k : c.conclusions) EXPECT_EQ(k.verdict, Verdict::violated) << k.id;
}

TEST(CertifyDescent, AlphaMismatchThrows) {
  const Problem p = identity2();
  const auto s = Schedule::power_law(1, 1);
  const auto log = run(p, Vector{1, 0}, s, 10);
  const auto holder = estimate_c(p, ConvexRegion::cube(2, -2, 2), 1.0, 100, 0);
  EXPECT_THROW(certify_descent(p, log, classify(s, 0.5), holder, step_margins(log, 1.0, 1.0),
                               detect_descent_convergence(log, 5, 1e-8)),
               ArgumentError);
}

TEST(CertifyDescent, MissingSampleGivesUnknownHolderClause) {
  const Problem p = identity2();
  const auto s = Schedule::power_law(1, 1);
  const auto log = run(p, Vector{1, 0}, s, 10);
  HolderEstimate none;
  const auto c = certify_descent(p, log, classify(s, 1.0), none, step_margins(log, 0.0, 1.0),
                                 detect_descent_convergence(log, 5, 1e-8));
  EXPECT_EQ(hypothesis(c, "holder-on-C"), Verdict::unknown);
  for (const auto& k : c.conclusions) EXPECT_NE(k.verdict, Verdict::verified);
}

TEST(Certificate, ClauseCounts) {
  EXPECT_EQ(hypothesis_ids(Theorem::gf_2_1).size(), 2u);
  EXPECT_EQ(hypothesis_ids(Theorem::gf_2_2).size(), 2u);
  EXPECT_EQ(hypothesis_ids(Theorem::gd_3_1).size(), 5u);
  EXPECT_EQ(hypothesis_ids(Theorem::gd_3_2).size(), 6u);
  EXPECT_EQ(conclusion_ids(Theorem::gf_2_1).size(), 2u);
  EXPECT_EQ(conclusion_ids(Theorem::gd_3_1).size(), 2u);
  EXPECT_EQ(conclusion_ids(Theorem::gd_3_2).size(), 3u);
}

TEST(Certificate, ValidateRejectsInconsistentCertificates) {
  auto c = flow_cert(identity2(), Vector{1, 0}, 5.0);
  auto missing = c;
  missing.hypotheses.pop_back();
  EXPECT_THROW(validate(missing), std::logic_error);
  auto unjustified = c;
  unjustified.hypotheses[0].verdict = Verdict::violated;
  EXPECT_THROW(validate(unjustified), std::logic_error);
}

// Property: serialization round-trips exactly.
TEST(Certificate, JsonRoundTrip) {
  const auto a = flow_cert(identity2(), Vector{1, 0}, 5.0);
  EXPECT_EQ(parse_certificate(emit_report(a, ReportFormat::json)), a);
  const auto b = descent_cert(quadratic_diagonal(Vector{1, 4}), Vector{0.3, -0.7}, Schedule::power_law(0.2, 0.6), 300,
                              ConvexRegion::cube(2, -2, 2), Theorem::gd_3_2);
  const auto back = parse_certificate(emit_report(b, ReportFormat::json));
  EXPECT_EQ(back, b);
  EXPECT_EQ(emit_report(back, ReportFormat::json), emit_report(b, ReportFormat::json));
}

TEST(Certificate, JsonHasSchema) {
  const std::string s = emit_report(flow_cert(identity2(), Vector{1, 0}, 1.0), ReportFormat::json);
  EXPECT_NE(s.find("\"schema\": \"gradcert/1\""), std::string::npos);
}

TEST(Certificate, EmptyRunStillSerializes) {
  const auto c = descent_cert(identity2(), Vector{0, 0}, Schedule::power_law(1, 1), 10, std::nullopt, Theorem::gd_3_1);
  EXPECT_EQ(c.run["steps"], 0);
  const auto j = Json::parse(emit_report(c, ReportFormat::json));
  EXPECT_EQ(j["conclusions"].size(), 2u);
}

TEST(Certificate, RejectsUnknownSchema) {
  EXPECT_ANY_THROW(parse_certificate(R"({"schema":"other/9"})"));
}
