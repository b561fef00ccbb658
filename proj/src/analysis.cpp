#include "mechd/analysis.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "mechd/errors.hpp"
#include "mechd/ironing.hpp"

namespace mechd {

namespace {

template <class Pred>
std::vector<Interval> intervals_where(const std::vector<double>& theta, Pred pred) {
  std::vector<Interval> out;
  bool open = false;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    if (pred(i)) {
      if (!open) out.push_back({theta[i], theta[i]});
      out.back().hi = theta[i];
      open = true;
    } else {
      open = false;
    }
  }
  return out;
}

bool monotone(const std::vector<double>& v, int dir, double tol) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (dir * (v[i] - v[i - 1]) < -tol * std::max(1.0, std::abs(v[i - 1]))) return false;
  }
  return true;
}

std::string fmt12(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

}  // namespace

bool public_option_test(const Environment& env) {
  const int sign = mean_weight_sign(env);
  if (sign > 0) return true;
  if (env.correlation() == Correlation::Positive) return false;
  if (!scope_test(env)) return false;
  return mu_residual_negative(env, 0.0) < 0.0;
}

ToppingUpReport topping_up_test(const Environment& env) {
  ToppingUpReport r;
  r.predicted = env.correlation() == Correlation::Negative && scope_test(env);
  const auto s = solve(env);
  const auto& m = s.mechanism;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double gap = env.q_lf(m.theta[i]) - m.q[i];
    if (gap > r.violation) {
      r.violation = gap;
      r.at_theta = m.theta[i];
    }
  }
  r.benefits_from_ban = r.violation > kToppingUpTol;
  return r;
}

SweepResult alpha_sweep(const Environment& env, const std::vector<double>& alphas, double tol) {
  if (alphas.size() < 2) throw Error(ErrorCode::InvalidParameter, "alpha sweep needs at least 2 values");
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    if (!(alphas[i] > 0.0)) throw Error(ErrorCode::InvalidParameter, "alpha values must be positive");
    if (i > 0 && !(alphas[i] > alphas[i - 1])) {
      throw Error(ErrorCode::InvalidParameter, "alpha values must increase strictly");
    }
  }
  SweepResult out;
  std::vector<double> mus, thetas, gains;
  for (double a : alphas) {
    const Environment e = env.with_alpha(a);
    const auto s = solve(e);
    SweepPoint p;
    p.alpha = a;
    p.mu_star = s.diag.mu_star;
    p.theta_H_star = s.diag.theta_H_star;
    p.theta_L_star = s.diag.theta_L_star;
    p.welfare_gain = s.diag.welfare_gain;
    for (std::size_t r = 1; r < s.diag.regions.size(); ++r) p.region_boundaries.push_back(s.diag.regions[r].span.lo);
    mus.push_back(p.mu_star);
    thetas.push_back(p.theta_H_star ? *p.theta_H_star : p.theta_L_star.value_or(0.0));
    gains.push_back(p.welfare_gain);
    out.points.push_back(std::move(p));
  }
  out.mu_nonincreasing = monotone(mus, -1, tol);
  out.theta_nondecreasing = monotone(thetas, 1, tol);
  out.theta_nonincreasing = monotone(thetas, -1, tol);
  // Gains are differences of welfare levels; compare on an absolute scale.
  out.gain_nonincreasing = true;
  for (std::size_t i = 1; i < gains.size(); ++i) {
    if (gains[i] > gains[i - 1] + tol) out.gain_nonincreasing = false;
  }
  return out;
}

std::string sweep_to_csv(const SweepResult& s) {
  std::string out = "alpha,mu_star,theta_H_star,theta_L_star,welfare_gain,region_boundaries\n";
  for (const auto& p : s.points) {
    std::string bounds;
    for (std::size_t k = 0; k < p.region_boundaries.size(); ++k) {
      if (k) bounds += ';';
      bounds += fmt12(p.region_boundaries[k]);
    }
    out += fmt12(p.alpha) + ',' + fmt12(p.mu_star) + ',' + (p.theta_H_star ? fmt12(*p.theta_H_star) : "") + ',' +
           (p.theta_L_star ? fmt12(*p.theta_L_star) : "") + ',' + fmt12(p.welfare_gain) + ',' + bounds + '\n';
  }
  return out;
}

DeviationGain subsidy_deviation_gain(const Environment& env, double kappa, double delta) {
  const double lo = env.theta_min(), hi = env.theta_max();
  if (!(kappa > lo && kappa <= hi)) {
    std::ostringstream msg;
    msg << "kappa=" << kappa << " outside (" << lo << ", " << hi << "]";
    throw Error(ErrorCode::KappaOutOfRange, msg.str());
  }
  if (!(delta > 0.0)) throw Error(ErrorCode::InvalidParameter, "delta must be positive");

  const double nu_k = env.nu_lf(kappa);
  const double q_k = env.q_lf(kappa);
  const double u_k = env.U_lf(kappa);
  auto line = [&](double th) { return u_k + delta + nu_k * (th - kappa); };
  // U_lf is convex, so U_lf - line increases to the right of kappa.
  double meet = hi;
  if (env.U_lf(hi) > line(hi)) {
    double a = kappa, b = hi;
    for (int it = 0; it < 200 && b - a > 1e-15 * std::max(1.0, hi); ++it) {
      const double mid = 0.5 * (a + b);
      (env.U_lf(mid) > line(mid) ? b : a) = mid;
    }
    meet = 0.5 * (a + b);
  }

  // Below kappa only U moves: the change is delta * int (omega - alpha) dF.
  double gain = -delta * env.phi_from_bottom(kappa);
  if (meet > kappa) {
    const double a = env.alpha(), c = env.cost();
    auto integrand = [&](double th) {
      const double du = line(th) - env.U_lf(th);
      const double dnu = nu_k - env.nu_lf(th);
      const double dq = q_k - env.q_lf(th);
      return ((env.omega(th) - a) * du + a * (th * dnu - c * dq)) * env.f(th);
    };
    gain += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, kappa, meet, 12, 1e-13);
  }
  DeviationGain r;
  r.gain = gain;
  r.theta_meet = meet;
  r.per_width = gain / (kappa - lo);
  return r;
}

double KktReport::worst() const { return std::max({nu_residual, ls_slackness, ir_slackness, lambda_decrease}); }

KktReport kkt_verify(const Mechanism& m, const SolverDiagnostics& diag, const Environment& env) {
  KktReport r;
  const auto& g = env.grid();
  const std::size_t n = g.size();
  const auto& lam = diag.multiplier.lambda;
  const double mu = diag.multiplier.mu;
  const double a = env.alpha();
  if (lam.size() != n) throw Error(ErrorCode::InvalidParameter, "multiplier profile does not match the grid");

  // Stationarity: nu must come from ironing the transform implied by (mu, Lambda).
  ScreeningTransform t;
  t.base.resize(n);
  const double lam_top = lam.back();
  for (std::size_t i = 0; i < n; ++i) {
    const double f = env.density_nodes()[i];
    const double num = -env.phi_to_top(g.theta[i]) + lam_top - lam[i];
    t.base[i] = g.theta[i] + (std::isinf(f) ? 0.0 : num / (a * f));
  }
  t.atom_mass = mu * env.theta_min() / a;
  const auto ir = iron(t, g);

  std::vector<double> nu_m(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) nu_m[i] = env.util().v(m.q[i]);
  for (std::size_t i = 0; i < n; ++i) {
    const double want = env.util().v(env.quality_at(ir.ironed[i]));
    const double have = interpolate(m.theta, nu_m, g.theta[i]);
    r.nu_residual = std::max(r.nu_residual, std::abs(want - have));
  }

  r.ls_slackness = std::abs(mu * (m.theta.front() * nu_m.front() - m.U_floor));
  double acc = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    const double step = lam[i] - lam[i - 1];
    r.lambda_decrease = std::max(r.lambda_decrease, -step);
    const double th = g.theta[i];
    acc += (interpolate(m.theta, m.U, th) - env.U_lf(th)) * step;
  }
  r.ir_slackness = std::abs(acc);
  return r;
}

CounterfactualReport counterfactual_compare(const Environment& env, double tol) {
  CounterfactualReport r;
  r.correlation = env.correlation();
  r.mean_weight_sign = mean_weight_sign(env);
  const auto fc = solve_full_control(env);
  const auto opt = solve(env);
  const auto& th = env.grid().theta;
  const std::size_t n = th.size();
  std::vector<double> d_fc(n), d_opt(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = env.U_lf(th[i]);
    d_fc[i] = fc.mechanism.U[i] - u;
    d_opt[i] = opt.mechanism.U[i] - u;
  }
  r.counterfactual_better = intervals_where(th, [&](std::size_t i) { return d_fc[i] > tol; });
  r.counterfactual_worse = intervals_where(th, [&](std::size_t i) { return d_fc[i] < -tol; });
  r.constrained_better = intervals_where(th, [&](std::size_t i) { return d_opt[i] > tol; });

  // First sign change of U_fc - U_lf, refined linearly between nodes.
  for (std::size_t i = 1; i < n; ++i) {
    if ((d_fc[i - 1] > 0.0) != (d_fc[i] > 0.0)) {
      const double s = d_fc[i - 1] / (d_fc[i - 1] - d_fc[i]);
      r.theta_hat = th[i - 1] + s * (th[i] - th[i - 1]);
      break;
    }
  }
  // The threshold is defined for positive correlation with E[omega] <= alpha
  // and for negative correlation with E[omega] > alpha. Without a crossing
  // every type below the top sits on one side, so it is placed at the top.
  const bool defined = (r.correlation == Correlation::Positive) == (r.mean_weight_sign <= 0);
  if (defined && !r.theta_hat) r.theta_hat = th.back();
  r.theta_L_star = opt.diag.theta_L_star;
  if (r.correlation == Correlation::Positive && r.mean_weight_sign <= 0 && r.theta_hat && r.theta_L_star) {
    r.theta_L_below_hat = *r.theta_L_star < *r.theta_hat;
  }
  return r;
}

}  // namespace mechd
