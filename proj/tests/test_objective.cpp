#include <gtest/gtest.h>

#include <cmath>

#include "gradcert/objective.hpp"
#include "gradcert/problems.hpp"
#include "gradcert/random.hpp"

using namespace gradcert;

namespace {

Problem identity2() { return quadratic({1, 0, 0, 1}); }
Problem diag14() { return quadratic_diagonal(Vector{1, 4}); }

}  // namespace

TEST(Eval, Oracles) {
  EXPECT_DOUBLE_EQ(identity2().eval(Vector{1, 0}), 0.5);
  EXPECT_DOUBLE_EQ(rosenbrock().eval(Vector{1, 1}), 0.0);
  EXPECT_DOUBLE_EQ(diag14().eval(Vector{1, 1}), 2.5);
}

TEST(Grad, Oracles) {
  EXPECT_EQ(identity2().grad(Vector{1, 0}), (Vector{1, 0}));
  EXPECT_EQ(rosenbrock().grad(Vector{1, 1}), (Vector{0, 0}));
  EXPECT_EQ(diag14().grad(Vector{1, 1}), (Vector{1, 4}));
}

TEST(Eval, DimensionMismatchThrows) {
  EXPECT_THROW(identity2().eval(Vector{1, 0, 0}), ArgumentError);
  EXPECT_THROW(identity2().grad(Vector{1}), ArgumentError);
}

TEST(Eval, NonFiniteValueThrowsOverflow) {
  const Problem p = identity2();
  EXPECT_THROW(p.eval(Vector{1e200, 1e200}), NumericOverflowError);
}

TEST(Quadratic, RejectsAsymmetricMatrix) { EXPECT_THROW(quadratic({1, 2, 0, 1}), ArgumentError); }

TEST(Quadratic, MinimizerAndLowerBoundForSpdWithLinearTerm) {
  const Problem p = quadratic({2, 0, 0, 4}, Vector{-2, 4});
  ASSERT_TRUE(p.minimizer());
  EXPECT_NEAR((*p.minimizer())[0], 1.0, 1e-15);
  EXPECT_NEAR((*p.minimizer())[1], -1.0, 1e-15);
  ASSERT_TRUE(p.lower_bound());
  EXPECT_NEAR(*p.lower_bound(), p.eval(*p.minimizer()), 1e-15);
}

TEST(Quadratic, IndefiniteHasNoLowerBound) {
  const Problem p = quadratic({-1, 0, 0, -1});
  EXPECT_FALSE(p.lower_bound());
}

TEST(CheckGradient, Oracles) {
  EXPECT_LE(check_gradient(identity2(), Vector{1, 0}, 1e-5), 1e-8);
  EXPECT_LE(check_gradient(rosenbrock(), Vector{-1.2, 1}, 1e-5), 1e-6);
  const Problem ann = ann_softplus(0);
  EXPECT_LE(check_gradient(ann, ann.standard_start(), 1e-5), 1e-5);
}

TEST(CheckGradient, DetectsWrongGradient) {
  const Problem bad("bad", 1, [](ConstVectorView x) { return x[0] * x[0]; },
                    [](ConstVectorView x, std::span<double> g) { g[0] = 3.0 * x[0]; });
  EXPECT_GT(check_gradient(bad, Vector{1.0}, 1e-5), 0.1);
  EXPECT_THROW(check_gradient(bad, Vector{1.0}, 0.0), ArgumentError);
}

// Property: every built-in problem passes the finite-difference check at
// 100 seeded probes in its probe region.
class SuiteGradient : public ::testing::TestWithParam<std::string> {};

TEST_P(SuiteGradient, FiniteDifferenceAgreement) {
  const Problem p = make_problem(GetParam());
  ASSERT_TRUE(p.probe_region());
  Rng rng(0, Stream::gradient_probes);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) worst = std::max(worst, check_gradient(p, p.probe_region()->sample(rng), 1e-5));
  EXPECT_LE(worst, 1e-5) << GetParam();
}

INSTANTIATE_TEST_SUITE_P(Builtins, SuiteGradient,
                         ::testing::Values("quadratic:A=1,0;0,1", "quadratic:A=2,1;1,3;b=1,-1", "rosenbrock",
                                           "himmelblau", "ann_softplus", "mexican_hat"),
                         [](const auto& info) { return "p" + std::to_string(info.index); });

TEST(Contains, Oracles) {
  const auto ball = ConvexRegion::ball(Vector{0, 0}, 1.0);
  EXPECT_TRUE(contains(ball, Vector{1, 0}));
  EXPECT_FALSE(contains(ball, Vector{1.01, 0}));
  EXPECT_TRUE(contains(ConvexRegion::cube(2, -2, 2), Vector{0, 0}));
  EXPECT_THROW(contains(ball, Vector{0, 0, 0}), ArgumentError);
}

TEST(Region, ParseAndRoundTrip) {
  const auto box = parse_region("box:-2,2", 2);
  EXPECT_EQ(box.lower(), (Vector{-2, -2}));
  EXPECT_EQ(parse_region(box.to_spec(), 2).to_spec(), box.to_spec());
  const auto ball = parse_region("ball:0.5@1,2", 2);
  EXPECT_DOUBLE_EQ(ball.radius(), 0.5);
  EXPECT_EQ(ball.center(), (Vector{1, 2}));
  EXPECT_THROW(parse_region("ball:1@1,2,3", 2), ArgumentError);
  EXPECT_THROW(parse_region("blob:1", 2), ArgumentError);
  EXPECT_THROW(parse_region("box:-2,x", 2), ParseError);
}

TEST(Region, SamplesStayInside) {
  Rng rng(7);
  for (const auto& r : {ConvexRegion::cube(3, -1, 2), ConvexRegion::ball(Vector{1, -1, 0}, 0.5)}) {
    for (int k = 0; k < 1000; ++k) EXPECT_TRUE(r.contains(r.sample(rng)));
  }
}

TEST(Region, Degenerate) {
  EXPECT_TRUE(ConvexRegion::box(Vector{0, 0}, Vector{1, 0}).degenerate());
  EXPECT_TRUE(ConvexRegion::ball(Vector{0}, 0.0).degenerate());
  EXPECT_FALSE(ConvexRegion::cube(2, 0, 1).degenerate());
}

TEST(MakeProblem, SpecsAndErrors) {
  EXPECT_EQ(make_problem("quadratic:diag=1,4").dim(), 2u);
  EXPECT_EQ(make_problem("ann_softplus:seed=3").dim(), 10u);
  EXPECT_THROW(make_problem("nope"), ArgumentError);
  EXPECT_THROW(make_problem("rosenbrock:foo=1"), ArgumentError);
  const Problem q = make_problem("quadratic:A=1,0;0,4");
  EXPECT_EQ(make_problem(q.spec()).spec(), q.spec());
}

TEST(AnnSoftplus, SeededStartIsReproducible) {
  EXPECT_EQ(ann_softplus(5).standard_start(), ann_softplus(5).standard_start());
  EXPECT_NE(ann_softplus(5).standard_start(), ann_softplus(6).standard_start());
}

TEST(MexicanHat, ZeroOnTheUnitCircleAndOutside) {
  const Problem p = mexican_hat();
  EXPECT_EQ(p.eval(Vector{1.0, 0.0}), 0.0);
  EXPECT_EQ(p.eval(Vector{0.0, 1.5}), 0.0);
  EXPECT_EQ(p.grad(Vector{2.0, 0.0}), (Vector{0.0, 0.0}));
  EXPECT_GT(p.eval(Vector{0.5, 0.0}), 0.0);
}

TEST(MexicanHat, ContinuouslyDifferentiableAcrossTheGluingCircle) {
  const Problem p = mexican_hat();
  for (double r : {1.0 - 1e-4, 1.0 + 1e-4}) {
    for (double theta : {0.0, 1.0, 2.5, 4.0}) {
      EXPECT_LE(check_gradient(p, Vector{r * std::cos(theta), r * std::sin(theta)}, 1e-6), 1e-4) << r << " " << theta;
    }
  }
}

TEST(Problems, LowerBoundsHoldAtProbes) {
  for (const auto& e : problem_suite) {
    const std::string spec = std::string(e.name) == "quadratic" ? "quadratic:diag=1,4" : std::string(e.name);
    const Problem p = make_problem(spec);
    ASSERT_TRUE(p.lower_bound()) << spec;
    Rng rng(1);
    for (int k = 0; k < 200; ++k) EXPECT_GE(p.eval(p.probe_region()->sample(rng)), *p.lower_bound()) << spec;
  }
}
