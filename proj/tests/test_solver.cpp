#include <cmath>
#include <vector>

#include "doctest.h"
#include "mechd/errors.hpp"
#include "mechd/mech.hpp"
#include "mechd/solver.hpp"
#include "support.hpp"

using namespace mechd;
namespace mt = mechd::testing;

namespace {

// E2 (omega = 4.5 - 2 theta, alpha = 2, uniform[1,2], sqrt, c = 1) below theta_H = 1.5:
// H_0 = theta + Phi(1, theta) / alpha, q = H_0^2, nu = 2 H_0.
double e2_h0(double th) { return 0.5 * th * th - 0.25 * th + 0.75; }
double e2_int_nu(double a, double b) {
  auto F = [](double t) { return t * t * t / 3.0 - 0.25 * t * t + 1.5 * t; };
  return F(b) - F(a);
}

// E4 (omega = 2 theta - 1.5, alpha = 2) above theta_L = 1.5:
// J_0 = theta - Phi(theta, 2) / alpha.
double e4_j0(double th) { return -0.5 * th * th + 2.75 * th - 1.5; }
double e4_int_nu(double a, double b) {
  auto F = [](double t) { return -t * t * t / 3.0 + 2.75 * t * t - 3.0 * t; };
  return F(b) - F(a);
}

Environment linear(double intercept, double slope, double alpha, Correlation c, std::size_t n = 4001) {
  return build_environment(mt::linear_config(intercept, slope, alpha, c, n));
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::InvalidParameter;
}

}  // namespace

TEST_CASE("scope test and its complement") {
  const auto flat = mt::boundary(Correlation::Negative, 1001);
  const auto e2 = mt::e2(1001);
  const auto pos3 = linear(-1.5, 2.0, 3.0, Correlation::Positive, 1001);
  CHECK_FALSE(scope_test(flat));
  CHECK(scope_test(e2));
  CHECK_FALSE(scope_test(pos3));
  for (const auto* env : {&flat, &e2, &pos3}) CHECK(all_ir_bind_check(*env) == !scope_test(*env));
}

TEST_CASE("mean weight sign") {
  CHECK(mean_weight_sign(mt::e1(501)) == 1);
  CHECK(mean_weight_sign(mt::e2(501)) == -1);
  CHECK(mean_weight_sign(mt::boundary(Correlation::Negative, 501)) == 0);
}

TEST_CASE("mu_max is the depth of Phi(theta_min, .)") {
  CHECK(mu_max(mt::e2()) == doctest::Approx(0.0625).epsilon(1e-10));
  CHECK(mu_max(mt::e1()) == doctest::Approx(0.5625).epsilon(1e-10));
  CHECK(mu_max(mt::boundary()) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("theta_H") {
  const auto e2 = mt::e2();
  CHECK(theta_H(e2, 0.0) == doctest::Approx(1.5).epsilon(1e-10));
  CHECK(theta_H(e2, 0.0625) == doctest::Approx(1.25).epsilon(1e-5));
  CHECK(theta_H(e2, 0.03) > theta_H(e2, 0.05));
  const auto e1 = mt::e1();
  CHECK(theta_H(e1, 0.5) == 2.0);
  CHECK(theta_H(e1, 0.55) == 2.0);
  CHECK(code_of([&] { (void)theta_H(e2, 0.1); }) == ErrorCode::MuOutOfRange);
  CHECK(code_of([&] { (void)theta_H(e2, -0.01); }) == ErrorCode::MuOutOfRange);
}

TEST_CASE("q_mu under negative correlation") {
  const auto e2 = mt::e2();
  const auto r0 = q_mu_negative(e2, 0.0);
  CHECK(interpolate(r0.grid.theta, r0.q, 1.25) == doctest::Approx(1.48535156).epsilon(1e-8));
  for (double th : {1.0, 1.1, 1.3, 1.45}) {
    CHECK(interpolate(r0.grid.theta, r0.q, th) == doctest::Approx(std::pow(e2_h0(th), 2)).epsilon(1e-7));
  }

  const auto flat = mt::boundary();
  const auto rf = q_mu_negative(flat, 0.0);
  for (std::size_t i = 0; i < rf.grid.size(); i += 500) CHECK(rf.q[i] == doctest::Approx(flat.q_lf(rf.grid.theta[i])));

  // A positive multiplier flattens the bottom.
  const auto r1 = q_mu_negative(e2, 0.03);
  CHECK(r1.q[1] == r1.q[0]);
  CHECK(r1.q[20] == r1.q[0]);
  REQUIRE_FALSE(r1.ironing.pools.empty());
  CHECK(r1.ironing.pools.front().lo == 1.0);
}

TEST_CASE("mu residual: hand value and monotonicity") {
  const auto e2 = mt::e2();
  // int_1^1.5 2 H_0 + 2 H_0(1) - U_lf(1.5) = 1.229167 + 2 - 2.25
  CHECK(mu_residual_negative(e2, 0.0) == doctest::Approx(3.229167 - 2.25).epsilon(1e-6));
  const auto e1 = mt::e1();
  double prev = -INFINITY;
  for (double mu = 0.0; mu <= mu_max(e1); mu += mu_max(e1) / 20.0) {
    const double r = mu_residual_negative(e1, mu);
    CHECK(r >= prev - 1e-12);
    prev = r;
  }
}

TEST_CASE("mu* under negative correlation") {
  CHECK(mu_star_negative(mt::e2()) == 0.0);
  CHECK(mu_star_negative(mt::boundary()) == 0.0);
  const double mu = mu_star_negative(mt::e1());
  CHECK(mu >= 0.5 - 1e-12);
  CHECK(mu <= 0.5625 + 1e-12);
}

TEST_CASE("negative correlation: E2 closed form") {
  const auto env = mt::e2();
  const auto s = solve_negative(env);
  CHECK(s.diag.mu_star == 0.0);
  REQUIRE(s.diag.theta_H_star);
  CHECK(*s.diag.theta_H_star == doctest::Approx(1.5).epsilon(1e-10));
  CHECK(s.mechanism.U_floor == doctest::Approx(2.25 - e2_int_nu(1.0, 1.5)).epsilon(1e-9));
  CHECK(s.mechanism.U_floor == doctest::Approx(1.020833).epsilon(1e-6));
  CHECK(s.diag.intervene);
  const auto& m = s.mechanism;
  for (std::size_t i = 0; i < m.size(); i += 100) {
    const double th = m.theta[i];
    CAPTURE(th);
    if (th <= 1.5) {
      CHECK(m.q[i] == doctest::Approx(std::pow(e2_h0(th), 2)).epsilon(1e-8));
      CHECK(m.U[i] == doctest::Approx(m.U_floor + e2_int_nu(1.0, th)).epsilon(1e-9));
    } else {
      CHECK(m.q[i] == doctest::Approx(env.q_lf(th)).epsilon(1e-12));
      CHECK(m.U[i] == doctest::Approx(env.U_lf(th)).epsilon(1e-9));
    }
  }
  CHECK(s.diag.welfare_gain > 0.0);
  CHECK(s.diag.multiplier.lambda.size() == env.grid().size());
  CHECK(s.diag.warnings.empty());
}

TEST_CASE("negative correlation: public option when E[omega] > alpha") {
  const auto env = mt::e1();
  const auto s = solve(env);
  CHECK(s.diag.mu_star >= 0.5 - 1e-12);
  CHECK(s.diag.regions.front().kind == RegionKind::PublicOption);
  CHECK(std::abs(s.mechanism.t.front()) < 1e-9);
  CHECK(verify_feasibility(s.mechanism, env).worst() <= 1e-7);
}

TEST_CASE("boundary: omega equal to alpha leaves laissez-faire in place") {
  for (Correlation c : {Correlation::Negative, Correlation::Positive}) {
    const auto env = mt::boundary(c, 2001);
    const auto s = solve(env);
    const auto lf = laissez_faire(env);
    CHECK_FALSE(s.diag.intervene);
    CHECK(std::abs(s.diag.welfare_gain) <= 1e-12);
    for (std::size_t i = 0; i < lf.size(); ++i) {
      CHECK(s.mechanism.q[i] == doctest::Approx(lf.q[i]).epsilon(1e-12));
      CHECK(s.mechanism.U[i] == doctest::Approx(lf.U[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("theta_L*") {
  CHECK(theta_L_star(mt::e4()) == doctest::Approx(1.5).epsilon(1e-9));
  CHECK(theta_L_star(linear(-1.5, 2.0, 1.0, Correlation::Positive)) == 1.0);
  // With omega equal to alpha every type qualifies; the smallest is reported.
  CHECK(theta_L_star(mt::boundary(Correlation::Positive)) == 1.0);
}

TEST_CASE("positive correlation: E4 closed form") {
  const auto env = mt::e4();
  const auto r = q_mu_positive(env, 0.0, 1.5);
  CHECK(interpolate(r.grid.theta, r.q, 1.75) == doctest::Approx(3.17285156).epsilon(1e-8));

  const auto s = solve_positive(env);
  CHECK(s.diag.mu_star == 0.0);
  REQUIRE(s.diag.theta_L_star);
  CHECK(*s.diag.theta_L_star == doctest::Approx(1.5).epsilon(1e-9));
  const auto& m = s.mechanism;
  for (std::size_t i = 0; i < m.size(); i += 100) {
    const double th = m.theta[i];
    CAPTURE(th);
    if (th < 1.5) {
      CHECK(m.q[i] == doctest::Approx(env.q_lf(th)).epsilon(1e-12));
      CHECK(m.U[i] == doctest::Approx(env.U_lf(th)).epsilon(1e-9));
    } else {
      CHECK(m.q[i] == doctest::Approx(std::pow(e4_j0(th), 2)).epsilon(1e-8));
      CHECK(m.U[i] == doctest::Approx(2.25 + e4_int_nu(1.5, th)).epsilon(1e-9));
      CHECK(m.q[i] >= env.q_lf(th) - 1e-12);
    }
  }
}

TEST_CASE("positive correlation: mu* = (E[omega] - alpha)+") {
  const auto rich = linear(-1.5, 2.0, 1.0, Correlation::Positive);
  const auto s = solve(rich);
  CHECK(s.diag.mu_star == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(s.diag.theta_L_star == 1.0);
  CHECK(verify_feasibility(s.mechanism, rich).worst() <= 1e-7);
}

TEST_CASE("full control") {
  const auto flat = mt::boundary(Correlation::Negative, 2001);
  const auto fc_flat = solve_full_control(flat);
  for (std::size_t i = 0; i < flat.grid().size(); i += 100) {
    CHECK(fc_flat.mechanism.q[i] == doctest::Approx(flat.q_lf(flat.grid().theta[i])).epsilon(1e-10));
  }

  const auto e2 = mt::e2(2001);
  const auto fc = solve_full_control(e2);
  for (std::size_t i = 0; i + 1 < e2.grid().size(); ++i) CHECK(fc.mechanism.q[i] < e2.q_lf(e2.grid().theta[i]));

  const auto e1 = mt::e1(2001);
  const auto fc1 = solve_full_control(e1);
  CHECK(fc1.mechanism.q[50] == fc1.mechanism.q[0]);
  CHECK(std::abs(fc1.mechanism.t[0]) < 1e-9);
}

TEST_CASE("solve dispatches on the correlation label") {
  CHECK(solve(mt::e2(1001)).diag.correlation == Correlation::Negative);
  CHECK(solve(mt::e4(1001)).diag.correlation == Correlation::Positive);
}

TEST_CASE("interpolate") {
  const std::vector<double> x{0.0, 1.0, 3.0}, y{1.0, 3.0, 7.0};
  CHECK(interpolate(x, y, 0.5) == doctest::Approx(2.0));
  CHECK(interpolate(x, y, 2.0) == doctest::Approx(5.0));
  CHECK(interpolate(x, y, -1.0) == 1.0);
  CHECK(interpolate(x, y, 4.0) == 7.0);
}
