#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "gradcert/flow.hpp"
#include "gradcert/problems.hpp"

using namespace gradcert;

namespace {
Problem identity2() { return quadratic({1, 0, 0, 1}); }
}  // namespace

TEST(Integrate, ClosedFormQuadratic) {
  const auto traj = integrate(identity2(), Vector{1, 0}, 1.0, 1e-10);
  EXPECT_DOUBLE_EQ(traj.times.back(), 1.0);
  EXPECT_NEAR(traj.states.back()[0], std::exp(-1.0), 1e-8);
  EXPECT_NEAR(traj.states.back()[1], 0.0, 1e-12);
  EXPECT_NEAR(traj.energy_integral.back(), 0.5 * (1 - std::exp(-2.0)), 1e-8);
  for (std::size_t k = 0; k < traj.size(); ++k) {
    EXPECT_NEAR(traj.states[k][0], std::exp(-traj.times[k]), 1e-8);
  }
}

TEST(Integrate, EquilibriumStaysPut) {
  const Problem p = rosenbrock();
  const auto traj = integrate(p, Vector{1, 1}, 50.0, 1e-9);
  for (const auto& x : traj.states) EXPECT_EQ(x, (Vector{1, 1}));
  EXPECT_EQ(traj.energy_integral.back(), 0.0);
  EXPECT_LE(energy_residual(traj, p), 1e-15);
  const auto v = detect_flow_convergence(traj, 0.5, 1e-12);
  EXPECT_TRUE(v.f_converged && v.grad_vanishes && v.x_settled);
}

TEST(Integrate, OutputGridIncludesUniformPoints) {
  const auto traj = integrate(identity2(), Vector{1, 0}, 2.0, 1e-6);
  EXPECT_GE(traj.size(), 201u);
  for (std::size_t k = 1; k < traj.size(); ++k) EXPECT_GT(traj.times[k], traj.times[k - 1]);
}

TEST(Integrate, InputChecks) {
  const Problem p = identity2();
  EXPECT_THROW(integrate(p, Vector{1}, 1.0, 1e-8), ArgumentError);
  EXPECT_THROW(integrate(p, Vector{1, 0}, -1.0, 1e-8), ArgumentError);
  EXPECT_THROW(integrate(p, Vector{1, 0}, 1.0, 0.5), ArgumentError);
}

TEST(Integrate, BlowUpIsReported) {
  // F = -x^4/4 has finite-time blow-up of x' = x^3 at t = 1/(2 x0^2).
  const Problem p("blowup", 1, [](ConstVectorView x) { return -0.25 * std::pow(x[0], 4); },
                  [](ConstVectorView x, std::span<double> g) { g[0] = -std::pow(x[0], 3); });
  EXPECT_THROW(integrate(p, Vector{1.0}, 2.0, 1e-8), NumericError);
}

TEST(EnergyResidual, SmallOnSmoothProblems) {
  EXPECT_LE(energy_residual(integrate(identity2(), Vector{1, 0}, 5.0, 1e-10), identity2()), 1e-7);
  const Problem r = rosenbrock();
  EXPECT_LE(energy_residual(integrate(r, Vector{-1.2, 1}, 10.0, 1e-9), r), 1e-5);
}

TEST(EnergyResidual, RejectsForeignTrajectory) {
  const auto traj = integrate(identity2(), Vector{1, 0}, 1.0, 1e-8);
  EXPECT_THROW(energy_residual(traj, rosenbrock()), ArgumentError);
}

// Property: F is non-increasing along the flow on every built-in problem.
class FlowMonotone : public ::testing::TestWithParam<std::string> {};

TEST_P(FlowMonotone, FValuesNonIncreasing) {
  const Problem p = make_problem(GetParam());
  const double tol = 1e-9;
  const auto traj = integrate(p, p.standard_start(), 10.0, tol);
  for (std::size_t k = 1; k < traj.size(); ++k) {
    EXPECT_LE(traj.f_values[k], traj.f_values[k - 1] + 10 * tol) << "k=" << k;
  }
  for (std::size_t k = 1; k < traj.size(); ++k) {
    EXPECT_GE(traj.energy_integral[k], traj.energy_integral[k - 1] - 10 * tol * (1 + traj.energy_integral[k - 1]));
  }
}

INSTANTIATE_TEST_SUITE_P(Builtins, FlowMonotone,
                         ::testing::Values("quadratic:A=1,0;0,1", "rosenbrock", "himmelblau", "ann_softplus",
                                           "mexican_hat"));

TEST(DetectFlowConvergence, DecayingQuadratic) {
  const auto traj = integrate(identity2(), Vector{1, 0}, 20.0, 1e-10);
  const auto v = detect_flow_convergence(traj, 0.25, 1e-6);
  EXPECT_TRUE(v.f_converged);
  EXPECT_TRUE(v.grad_vanishes);
  EXPECT_TRUE(v.x_settled);
  EXPECT_DOUBLE_EQ(v.window_start, 15.0);
  EXPECT_NEAR(v.x_bound, 1.0, 1e-15);
}

TEST(DetectFlowConvergence, InputChecks) {
  const auto traj = integrate(identity2(), Vector{1, 0}, 1.0, 1e-8);
  EXPECT_THROW(detect_flow_convergence(traj, 0.0, 1e-6), ArgumentError);
  EXPECT_THROW(detect_flow_convergence(traj, 1.0, 1e-6), ArgumentError);
  EXPECT_THROW(detect_flow_convergence(traj, 1e-9, 1e-6), ArgumentError);
  EXPECT_THROW(detect_flow_convergence(traj, 0.5, 0.0), ArgumentError);
}

TEST(DetectFlowConvergence, MexicanHatGradientVanishes) {
  const Problem p = mexican_hat();
  const auto traj = integrate(p, p.standard_start(), 200.0, 1e-10);
  const auto v = detect_flow_convergence(traj, 0.25, 1e-3);
  EXPECT_TRUE(v.grad_vanishes);
  EXPECT_TRUE(v.f_converged);
  EXPECT_LE(energy_residual(traj, p), 1e-6);
}

TEST(FlowCsv, HeaderAndRows) {
  const auto traj = integrate(identity2(), Vector{1, 0}, 0.5, 1e-8);
  std::ostringstream os;
  write_flow_csv(os, traj);
  const std::string s = os.str();
  EXPECT_EQ(s.substr(0, s.find('\n')), "t,x_0,x_1,F,grad_norm,energy_integral");
  EXPECT_EQ(static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')), traj.size() + 1);
}

class FlowEnergy : public ::testing::TestWithParam<std::string> {};

// Property: the energy identity holds to 100 tol and the integral stays below F(x0) - inf F.
TEST_P(FlowEnergy, ResidualAndBound) {
  const Problem p = make_problem(GetParam());
  const double tol = 1e-9;
  const auto traj = integrate(p, p.standard_start(), 100.0, tol);
  EXPECT_LE(energy_residual(traj, p), 100 * tol);
  ASSERT_TRUE(p.lower_bound());
  const double bound = traj.f_values.front() - *p.lower_bound();
  EXPECT_LE(traj.energy_integral.back(), bound + 100 * tol * (1 + std::abs(traj.f_values.front())));
}

INSTANTIATE_TEST_SUITE_P(Builtins, FlowEnergy,
                         ::testing::Values("quadratic:diag=1,4", "rosenbrock", "himmelblau", "ann_softplus",
                                           "mexican_hat"));

TEST(Integrate, HalvingTolDoesNotInflateResidual) {
  const Problem p = quadratic({2, 1, 1, 3});
  double prev = energy_residual(integrate(p, Vector{1, -1}, 5.0, 1e-6), p);
  for (double tol : {5e-7, 2.5e-7, 1.25e-7}) {
    const double r = energy_residual(integrate(p, Vector{1, -1}, 5.0, tol), p);
    EXPECT_LE(r, 2 * prev + 1e-16) << tol;
    prev = r;
  }
}
