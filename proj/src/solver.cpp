#include "mechd/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mechd/errors.hpp"
#include "mechd/quadrature.hpp"

namespace mechd {

namespace {

constexpr double kGolden = 0.6180339887498949;

double density_at(const Environment& env, const TypeGrid& g, std::size_t k) {
  const long o = g.origin[k];
  return o >= 0 ? env.density_nodes()[static_cast<std::size_t>(o)] : env.f(g.theta[k]);
}

// (a + b) / (alpha f), with an unbounded density sending the ratio to zero.
double over_alpha_f(const Environment& env, double num, double f) {
  if (std::isinf(f)) return 0.0;
  return num / (env.alpha() * f);
}

// Location of the minimum of theta -> Phi(theta_min, theta): coarse scan on
// the grid, then golden section inside the bracketing cells.
double argmin_phi_bottom(const Environment& env) {
  const auto& th = env.grid().theta;
  const std::size_t n = th.size();
  std::size_t best = 0;
  double best_val = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    const double v = env.phi_from_bottom(th[i]);
    if (v < best_val) {
      best_val = v;
      best = i;
    }
  }
  if (best == 0) return th.front();
  double a = th[best - 1];
  double b = th[std::min(best + 1, n - 1)];
  double c = b - kGolden * (b - a);
  double d = a + kGolden * (b - a);
  double fc = env.phi_from_bottom(c);
  double fd = env.phi_from_bottom(d);
  while (b - a > kThetaTol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kGolden * (b - a);
      fc = env.phi_from_bottom(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kGolden * (b - a);
      fd = env.phi_from_bottom(d);
    }
  }
  const double x = 0.5 * (a + b);
  return env.phi_from_bottom(x) < best_val ? x : th[best];
}

// Bisection on a bracket [lo, hi] with pred(lo) false and pred(hi) true;
// returns the true side.
template <class Pred>
double bisect(double lo, double hi, Pred pred, double tol) {
  for (int it = 0; it < 200 && hi - lo > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (pred(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

std::vector<double> subutility(const Environment& env, const std::vector<double>& q) {
  std::vector<double> nu(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) nu[i] = env.util().v(q[i]);
  return nu;
}

RestrictedAllocation allocate(const Environment& env, TypeGrid grid, ScreeningTransform t) {
  RestrictedAllocation r;
  r.ironing = iron(t, grid);
  r.q.resize(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) r.q[k] = env.quality_at(r.ironing.ironed[k]);
  r.nu = subutility(env, r.q);
  r.grid = std::move(grid);
  return r;
}

// Writes the restricted program onto the full grid. Nodes outside the program
// interval keep laissez-faire values; `U_prog` is the utility on the
// restricted nodes.
Mechanism stitch(const Environment& env, const RestrictedAllocation& prog, const std::vector<double>& U_prog) {
  const auto& full = env.grid();
  const std::size_t n = full.size();
  Mechanism m = laissez_faire(env);
  for (std::size_t k = 0; k < prog.grid.size(); ++k) {
    const long o = prog.grid.origin[k];
    if (o < 0) continue;
    const auto j = static_cast<std::size_t>(o);
    m.q[j] = prog.q[k];
    m.U[j] = U_prog[k];
  }
  for (std::size_t j = 0; j < n; ++j) m.t[j] = full.theta[j] * env.util().v(m.q[j]) - m.U[j];
  m.U_floor = m.U.front();
  return m;
}

void check_stitch(const Environment& env, const Mechanism& m, double boundary, double q_prog_at_boundary,
                  std::vector<std::string>& warnings) {
  const double q_lf = env.q_lf(boundary);
  const double jump = std::abs(q_prog_at_boundary - q_lf) / std::max(1.0, std::abs(q_lf));
  if (jump > kStitchTol) {
    std::ostringstream msg;
    msg << "allocation jumps by " << jump << " (relative) at the program boundary theta=" << boundary;
    warnings.push_back(msg.str());
  }
  for (std::size_t i = 1; i < m.size(); ++i) {
    if (m.q[i] < m.q[i - 1] - kStitchTol * std::max(1.0, m.q[i - 1])) {
      std::ostringstream msg;
      msg << "allocation decreases at theta=" << m.theta[i];
      warnings.push_back(msg.str());
      break;
    }
  }
}

// The edge of the private-market region is known exactly; replace the
// grid-resolution estimate from classification.
void snap_market_edge(const SolverDiagnostics& d, RegionSegmentation& regions) {
  if (regions.size() < 2) return;
  if (d.theta_H_star && regions.back().kind == RegionKind::PrivateMarket) {
    regions.back().span.lo = *d.theta_H_star;
    regions[regions.size() - 2].span.hi = *d.theta_H_star;
  }
  if (d.theta_L_star && regions.front().kind == RegionKind::PrivateMarket) {
    regions.front().span.hi = *d.theta_L_star;
    regions[1].span.lo = *d.theta_L_star;
  }
}

void finish(const Environment& env, Solution& s) {
  const double w_lf = welfare(laissez_faire(env), env).total;
  const double w_opt = welfare(s.mechanism, env).total;
  s.diag.welfare_lf = w_lf;
  s.diag.welfare_opt = w_opt;
  s.diag.welfare_gain = w_opt - w_lf;
  s.diag.regions = classify_regions(s.mechanism, env);
  snap_market_edge(s.diag, s.diag.regions);
  s.diag.intervene = scope_test(env);
}

}  // namespace

double interpolate(const std::vector<double>& x, const std::vector<double>& y, double at) {
  if (at <= x.front()) return y.front();
  if (at >= x.back()) return y.back();
  const auto it = std::upper_bound(x.begin(), x.end(), at);
  const std::size_t j = static_cast<std::size_t>(it - x.begin());
  const double s = (at - x[j - 1]) / (x[j] - x[j - 1]);
  return y[j - 1] + s * (y[j] - y[j - 1]);
}

int mean_weight_sign(const Environment& env) {
  const double gap = env.mean_weight() - env.alpha();
  if (std::abs(gap) <= kMeanTieTol * std::max(1.0, env.alpha())) return 0;
  return gap > 0.0 ? 1 : -1;
}

bool scope_test(const Environment& env) { return env.max_weight() > env.alpha(); }

bool all_ir_bind_check(const Environment& env) {
  if (mean_weight_sign(env) > 0) return false;
  const auto& th = env.grid().theta;
  const double tol = -kMeanTieTol * std::max(1.0, env.alpha());
  for (double x : th) {
    const double v = env.correlation() == Correlation::Negative ? env.phi_from_bottom(x) : env.phi_to_top(x);
    if (v < tol) return false;
  }
  return true;
}

double mu_max(const Environment& env) {
  const double x = argmin_phi_bottom(env);
  return std::max(0.0, -env.phi_from_bottom(x));
}

double theta_H(const Environment& env, double mu) {
  const double mmax = mu_max(env);
  if (mu < -kMuTol || mu > mmax + kMuTol) {
    std::ostringstream msg;
    msg << "mu=" << mu << " outside [0, " << mmax << "]";
    throw Error(ErrorCode::MuOutOfRange, msg.str());
  }
  if (mean_weight_sign(env) > 0) return env.theta_max();
  const double tie = kMeanTieTol * std::max(1.0, env.alpha());
  const double top = env.theta_max();
  if (env.phi_from_bottom(top) + mu <= tie) return top;

  const double xm = argmin_phi_bottom(env);
  if (env.phi_from_bottom(xm) + mu > 0.0) return xm;  // tangency at mu_max
  // Rightmost root of Phi(theta_min, .) + mu on [xm, top].
  const auto& th = env.grid().theta;
  std::size_t i = th.size() - 1;
  while (i > 0 && th[i] > xm && env.phi_from_bottom(th[i]) + mu > tie) --i;
  const double lo = std::max(th[i], xm);
  const double hi = th[std::min(i + 1, th.size() - 1)];
  if (!(hi > lo)) return lo;
  // pred: still above zero, i.e. beyond the root.
  const double root = bisect(lo, hi, [&](double x) { return env.phi_from_bottom(x) + mu > tie; }, kThetaTol);
  // bisect returns the infeasible side; step back to the last feasible point.
  return std::max(lo, root - kThetaTol);
}

RestrictedAllocation q_mu_negative(const Environment& env, double mu) {
  const double hi = theta_H(env, mu);
  TypeGrid g = env.grid().restrict_to(env.dist(), env.theta_min(), hi);
  ScreeningTransform t;
  t.base.resize(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double th = g.theta[k];
    t.base[k] = th + over_alpha_f(env, mu + env.phi_from_bottom(th), density_at(env, g, k));
  }
  t.atom_mass = mu * env.theta_min() / env.alpha();
  return allocate(env, std::move(g), std::move(t));
}

double mu_residual_negative(const Environment& env, double mu) {
  const auto r = q_mu_negative(env, mu);
  const double area = integral(r.grid.theta, r.nu);
  return area + env.theta_min() * r.nu.front() - env.U_lf(r.grid.theta.back());
}

double mu_star_negative(const Environment& env) {
  // Lower bound (E[omega] - alpha)+, with the tie band mapped to zero.
  const double start = mean_weight_sign(env) > 0 ? env.mean_weight() - env.alpha() : 0.0;
  const double hi = mu_max(env);
  if (mu_residual_negative(env, start) >= 0.0) return start;
  if (hi <= start) {
    throw Error(ErrorCode::NoFeasibleMu, "residual negative on a degenerate multiplier interval");
  }
  auto feasible = [&](double mu) { return mu_residual_negative(env, mu) >= 0.0; };
  double top = hi;
  if (!feasible(top)) {
    // Coarse scan in case the residual fails to be monotone numerically.
    bool found = false;
    constexpr int kScan = 256;
    double prev = start;
    for (int k = 1; k <= kScan; ++k) {
      const double mu = start + (hi - start) * k / kScan;
      if (feasible(mu)) {
        top = mu;
        found = true;
        break;
      }
      prev = mu;
    }
    if (!found) {
      std::ostringstream msg;
      msg << "participation residual stays negative up to mu_max=" << hi << " (residual "
          << mu_residual_negative(env, hi) << ")";
      throw Error(ErrorCode::NoFeasibleMu, msg.str());
    }
    return bisect(prev, top, feasible, kMuTol);
  }
  return bisect(start, top, feasible, kMuTol);
}

Solution solve_negative(const Environment& env) {
  Solution s;
  auto& d = s.diag;
  d.correlation = Correlation::Negative;
  d.mu_max = mu_max(env);
  const double mu = mu_star_negative(env);
  d.mu_star = mu;
  const auto prog = q_mu_negative(env, mu);
  const double th_h = prog.grid.theta.back();
  d.theta_H_star = th_h;

  const auto cum = cumulative_integral(prog.grid.theta, prog.nu);
  std::vector<double> U(prog.grid.size());
  // With E[omega] = alpha the floor is not pinned down; take the smallest
  // one that keeps participation, which reproduces laissez-faire when omega = alpha.
  const bool ls_binds = mu > 0.0 || mean_weight_sign(env) > 0;
  if (ls_binds) {
    const double floor = env.theta_min() * prog.nu.front();
    for (std::size_t k = 0; k < U.size(); ++k) U[k] = floor + cum[k];
  } else {
    // Participation binds at theta_H; integrate down from there.
    const double top = env.U_lf(th_h);
    for (std::size_t k = 0; k < U.size(); ++k) U[k] = top - (cum.back() - cum[k]);
  }
  s.mechanism = stitch(env, prog, U);
  if (th_h < env.theta_max()) check_stitch(env, s.mechanism, th_h, prog.q.back(), d.warnings);

  d.multiplier.mu = mu;
  const auto& th = env.grid().theta;
  d.multiplier.lambda.resize(th.size());
  for (std::size_t j = 0; j < th.size(); ++j) {
    d.multiplier.lambda[j] = th[j] <= th_h ? -mu : env.phi_from_bottom(th[j]);
  }
  d.multiplier.lambda.back() = env.alpha() - env.mean_weight();
  finish(env, s);
  return s;
}

double theta_L_star(const Environment& env) {
  const double tie = kMeanTieTol * std::max(1.0, env.alpha());
  if (env.phi_to_top(env.theta_min()) <= tie) return env.theta_min();
  const auto& th = env.grid().theta;
  std::size_t i = 1;
  while (i + 1 < th.size() && env.phi_to_top(th[i]) > tie) ++i;
  return bisect(th[i - 1], th[i], [&](double x) { return env.phi_to_top(x) <= tie; }, kThetaTol);
}

RestrictedAllocation q_mu_positive(const Environment& env, double mu, double theta_lo) {
  TypeGrid g = env.grid().restrict_to(env.dist(), theta_lo, env.theta_max());
  ScreeningTransform t;
  t.base.resize(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double th = g.theta[k];
    t.base[k] = th - over_alpha_f(env, env.phi_to_top(th), density_at(env, g, k));
  }
  // The point mass lives at theta_min; it only enters when the program starts there.
  t.atom_mass = (theta_lo <= env.theta_min()) ? mu * env.theta_min() / env.alpha() : 0.0;
  return allocate(env, std::move(g), std::move(t));
}

Solution solve_positive(const Environment& env) {
  Solution s;
  auto& d = s.diag;
  d.correlation = Correlation::Positive;
  const int sign = mean_weight_sign(env);
  const double mu = sign > 0 ? env.mean_weight() - env.alpha() : 0.0;
  d.mu_star = mu;
  const double th_l = theta_L_star(env);
  d.theta_L_star = th_l;
  const auto prog = q_mu_positive(env, mu, th_l);

  const auto cum = cumulative_integral(prog.grid.theta, prog.nu);
  std::vector<double> U(prog.grid.size());
  const double anchor = sign > 0 ? env.theta_min() * prog.nu.front() : env.U_lf(th_l);
  for (std::size_t k = 0; k < U.size(); ++k) U[k] = anchor + cum[k];
  s.mechanism = stitch(env, prog, U);
  if (th_l > env.theta_min()) check_stitch(env, s.mechanism, th_l, prog.q.front(), d.warnings);

  d.multiplier.mu = mu;
  const auto& th = env.grid().theta;
  d.multiplier.lambda.resize(th.size());
  for (std::size_t j = 0; j < th.size(); ++j) {
    d.multiplier.lambda[j] = env.phi_from_bottom(std::min(th[j], th_l));
  }
  finish(env, s);
  return s;
}

Solution solve_full_control(const Environment& env) {
  Solution s;
  auto& d = s.diag;
  d.correlation = env.correlation();
  const int sign = mean_weight_sign(env);
  const double mu = sign > 0 ? env.mean_weight() - env.alpha() : 0.0;
  d.mu_star = mu;
  TypeGrid g = env.grid();
  ScreeningTransform t;
  t.base.resize(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) {
    t.base[k] = g.theta[k] - over_alpha_f(env, env.phi_to_top(g.theta[k]), env.density_nodes()[k]);
  }
  t.atom_mass = mu * env.theta_min() / env.alpha();
  const auto prog = allocate(env, std::move(g), std::move(t));
  const double floor = sign > 0 ? env.theta_min() * prog.nu.front() : 0.0;
  s.mechanism = transfers_from_allocation(env, prog.q, floor);
  d.multiplier.mu = mu;
  d.multiplier.lambda.assign(env.grid().size(), 0.0);
  finish(env, s);
  return s;
}

Solution solve(const Environment& env) {
  return env.correlation() == Correlation::Negative ? solve_negative(env) : solve_positive(env);
}

}  // namespace mechd
