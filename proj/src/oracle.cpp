#include "mechd/oracle.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <limits>

#include "mechd/errors.hpp"
#include "mechd/mech.hpp"
#include "mechd/solver.hpp"

namespace mechd {

namespace {

// One linear inequality s = ca * x[a] + cb * x[b] - rhs > 0 (b < 0: single term).
struct Ineq {
  int a;
  double ca;
  int b;
  double cb;
  double rhs;
};

double slack(const Ineq& c, const Eigen::VectorXd& x) {
  double s = c.ca * x[c.a] - c.rhs;
  if (c.b >= 0) s += c.cb * x[c.b];
  return s;
}

double dslack(const Ineq& c, const Eigen::VectorXd& dx) {
  double s = c.ca * dx[c.a];
  if (c.b >= 0) s += c.cb * dx[c.b];
  return s;
}

struct Problem {
  const Environment* env;
  int n;
  std::vector<double> theta, w, omega, b, dtheta;
  std::vector<Ineq> ineq;
  double v0, vA;

  int nu(int i) const { return i; }
  int U(int i) const { return n + i; }

  double psi(double nu) const { return env->util().v_inverse(nu); }
  double psi1(double nu) const { return 1.0 / env->util().dv(psi(nu)); }
  double psi2(double nu) const {
    const double q = psi(nu);
    const double d1 = env->util().dv(q);
    return -env->util().d2v(q) / (d1 * d1 * d1);
  }

  double objective(const Eigen::VectorXd& x) const {
    const double a = env->alpha(), c = env->cost();
    double f = 0.0;
    for (int i = 0; i < n; ++i) {
      const auto k = static_cast<std::size_t>(i);
      f += w[k] * ((omega[k] - a) * x[U(i)] + a * (theta[k] * x[nu(i)] - c * psi(x[nu(i)])));
    }
    return f;
  }
};

Problem build_problem(const Environment& env_n) {
  Problem p;
  p.env = &env_n;
  const auto& g = env_n.grid();
  p.n = static_cast<int>(g.size());
  const auto n = g.size();
  p.theta = g.theta;
  p.w.assign(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double h = g.z[i + 1] - g.z[i];
    p.w[i] += 0.5 * h;
    p.w[i + 1] += 0.5 * h;
  }
  p.omega.assign(env_n.omega_nodes().begin(), env_n.omega_nodes().end());
  p.dtheta.resize(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) p.dtheta[i] = g.theta[i + 1] - g.theta[i];
  // Participation floor: discrete envelope of the laissez-faire subutility, so
  // the laissez-faire point is exactly feasible for the discrete program.
  p.b.resize(n);
  p.b[0] = env_n.U_lf(g.theta[0]);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    p.b[i + 1] = p.b[i] + 0.5 * p.dtheta[i] * (env_n.nu_lf(g.theta[i]) + env_n.nu_lf(g.theta[i + 1]));
  }
  p.v0 = env_n.util().v(0.0);
  p.vA = env_n.util().v(env_n.cap());

  const int m = p.n;
  for (int i = 0; i + 1 < m; ++i) p.ineq.push_back({p.nu(i + 1), 1.0, p.nu(i), -1.0, 0.0});
  p.ineq.push_back({p.nu(0), 1.0, -1, 0.0, p.v0});
  p.ineq.push_back({p.nu(m - 1), -1.0, -1, 0.0, -p.vA});
  for (int i = 0; i < m; ++i) p.ineq.push_back({p.U(i), 1.0, -1, 0.0, p.b[static_cast<std::size_t>(i)]});
  p.ineq.push_back({p.nu(0), g.theta.front(), p.U(0), -1.0, 0.0});
  return p;
}

Eigen::VectorXd initial_point(const Problem& p, OracleInit init) {
  const auto n = static_cast<std::size_t>(p.n);
  std::vector<double> base(n);
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    base[i] = p.env->nu_lf(p.theta[i]);
    if (init == OracleInit::HalfCap) base[i] = std::max(base[i], 0.5 * p.vA);
    top = std::max(top, base[i]);
  }
  const double eps = std::min(1e-2, 0.25 * (p.vA - top));
  const auto& z = p.env->grid().z;
  Eigen::VectorXd x(2 * p.n);
  for (int i = 0; i < p.n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    x[p.nu(i)] = base[k] + eps * (1.0 + z[k]);
  }
  // Halfway between the participation floor and the limited-subsidy bound.
  x[p.U(0)] = 0.5 * (p.b[0] + p.theta[0] * x[p.nu(0)]);
  for (int i = 0; i + 1 < p.n; ++i) {
    x[p.U(i + 1)] = x[p.U(i)] + 0.5 * p.dtheta[static_cast<std::size_t>(i)] * (x[p.nu(i)] + x[p.nu(i + 1)]);
  }
  return x;
}

}  // namespace

OracleSolution oracle_solve(const Environment& env, std::size_t n, double tol, OracleInit init) {
  if (n < 16) throw Error(ErrorCode::InvalidParameter, "oracle grid needs at least 16 nodes");
  const Environment env_n = env.with_grid(n);
  const Problem p = build_problem(env_n);
  const int nv = 2 * p.n;
  const int ne = p.n - 1;
  const int dim = nv + ne;
  const double m = static_cast<double>(p.ineq.size());
  const double a = env_n.alpha(), c = env_n.cost();

  Eigen::VectorXd x = initial_point(p, init);
  for (const auto& ci : p.ineq) {
    if (!(slack(ci, x) > 0.0)) throw Error(ErrorCode::InvalidParameter, "oracle start point is infeasible");
  }

  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  bool analysed = false;
  std::vector<Eigen::Triplet<double>> trip;
  Eigen::SparseMatrix<double> K(dim, dim);
  Eigen::VectorXd rhs(dim), grad(nv), s(p.ineq.size()), ds(p.ineq.size());

  constexpr int kMaxNewton = 3000;
  constexpr int kMaxCentering = 200;
  // Centring is judged in objective units (decrement / t): at large t the
  // barrier-scale decrement bottoms out at rounding noise of order eps * t.
  constexpr double kDecrementTol = 1e-10;
  constexpr double kObjectiveCentringTol = 1e-12;
  OracleSolution out;
  double t = 1.0;
  int iters = 0;
  bool budget_ok = true;

  while (true) {
    bool centred = false;
    for (int inner = 0; inner < kMaxCentering && iters < kMaxNewton; ++inner, ++iters) {
      for (std::size_t j = 0; j < p.ineq.size(); ++j) s[static_cast<Eigen::Index>(j)] = slack(p.ineq[j], x);

      trip.clear();
      grad.setZero();
      for (int i = 0; i < p.n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        const double nu = x[p.nu(i)];
        grad[p.nu(i)] -= t * p.w[k] * a * (p.theta[k] - c * p.psi1(nu));
        grad[p.U(i)] -= t * p.w[k] * (p.omega[k] - a);
        trip.emplace_back(p.nu(i), p.nu(i), t * p.w[k] * a * c * p.psi2(nu));
        trip.emplace_back(p.U(i), p.U(i), 0.0);
      }
      for (std::size_t j = 0; j < p.ineq.size(); ++j) {
        const auto& ci = p.ineq[j];
        const double sj = s[static_cast<Eigen::Index>(j)];
        const double inv = 1.0 / sj, inv2 = inv * inv;
        grad[ci.a] -= ci.ca * inv;
        trip.emplace_back(ci.a, ci.a, ci.ca * ci.ca * inv2);
        if (ci.b >= 0) {
          grad[ci.b] -= ci.cb * inv;
          trip.emplace_back(ci.b, ci.b, ci.cb * ci.cb * inv2);
          trip.emplace_back(ci.a, ci.b, ci.ca * ci.cb * inv2);
          trip.emplace_back(ci.b, ci.a, ci.ca * ci.cb * inv2);
        }
      }
      // Envelope rows: U_{i+1} - U_i - d_i (nu_i + nu_{i+1}) / 2 = 0.
      for (int e = 0; e < ne; ++e) {
        const int row = nv + e;
        const double h = 0.5 * p.dtheta[static_cast<std::size_t>(e)];
        const double coef[4] = {1.0, -1.0, -h, -h};
        const int col[4] = {p.U(e + 1), p.U(e), p.nu(e), p.nu(e + 1)};
        double r = 0.0;
        for (int q = 0; q < 4; ++q) {
          trip.emplace_back(row, col[q], coef[q]);
          trip.emplace_back(col[q], row, coef[q]);
          r += coef[q] * x[col[q]];
        }
        rhs[row] = -r;
      }
      rhs.head(nv) = -grad;
      K.setFromTriplets(trip.begin(), trip.end());
      if (!analysed) {
        lu.analyzePattern(K);
        analysed = true;
      }
      lu.factorize(K);
      if (lu.info() != Eigen::Success) break;
      Eigen::VectorXd sol = lu.solve(rhs);
      // The system grows ill-conditioned as t increases; two refinement
      // sweeps keep the envelope rows satisfied to rounding.
      for (int ref = 0; ref < 2; ++ref) sol += lu.solve(rhs - K * sol);
      const Eigen::VectorXd dx = sol.head(nv);
      const double decrement = -grad.dot(dx);
      if (decrement / 2.0 <= std::max(kDecrementTol, kObjectiveCentringTol * t)) {
        centred = true;
        break;
      }

      double step = 1.0;
      for (std::size_t j = 0; j < p.ineq.size(); ++j) {
        const double d = dslack(p.ineq[j], dx);
        ds[static_cast<Eigen::Index>(j)] = d;
        if (d < 0.0) step = std::min(step, -0.99 * s[static_cast<Eigen::Index>(j)] / d);
      }
      // Outside the quadratic region, backtrack on the barrier function; the
      // change is accumulated term by term to keep it accurate at large t.
      if (decrement > 0.1) {
        for (int bt = 0; bt < 60; ++bt) {
          double dphi = 0.0;
          for (int i = 0; i < p.n; ++i) {
            const auto k = static_cast<std::size_t>(i);
            const double nu0 = x[p.nu(i)], nu1 = nu0 + step * dx[p.nu(i)];
            const double df = p.w[k] * ((p.omega[k] - a) * step * dx[p.U(i)] +
                                        a * (p.theta[k] * step * dx[p.nu(i)] - c * (p.psi(nu1) - p.psi(nu0))));
            dphi -= t * df;
          }
          for (Eigen::Index j = 0; j < s.size(); ++j) dphi -= std::log1p(step * ds[j] / s[j]);
          if (dphi <= -0.25 * step * decrement) break;
          step *= 0.5;
        }
      }
      x += step * dx;
    }
    if (!centred) {
      budget_ok = false;
      break;
    }
    const double f = p.objective(x);
    out.kkt_residual = m / t;
    if (m / t <= tol * std::max(1.0, std::abs(f))) break;
    if (iters >= kMaxNewton) {
      budget_ok = false;
      break;
    }
    t *= 10.0;
  }

  out.theta = p.theta;
  out.nu.resize(static_cast<std::size_t>(p.n));
  out.U.resize(static_cast<std::size_t>(p.n));
  for (int i = 0; i < p.n; ++i) {
    out.nu[static_cast<std::size_t>(i)] = x[p.nu(i)];
    out.U[static_cast<std::size_t>(i)] = x[p.U(i)];
  }
  out.u_floor = out.U.front();
  out.objective = p.objective(x);
  out.kkt_residual = m / t;
  out.iterations = iters;
  out.converged = budget_ok;
  return out;
}

OracleFeasibility oracle_feasibility(const Environment& env, const OracleSolution& s) {
  OracleFeasibility r;
  const std::size_t n = s.nu.size();
  const double v0 = env.util().v(0.0), vA = env.util().v(env.cap());
  double b = env.U_lf(s.theta.front());
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) {
      const double h = s.theta[i] - s.theta[i - 1];
      b += 0.5 * h * (env.nu_lf(s.theta[i - 1]) + env.nu_lf(s.theta[i]));
      r.monotone = std::max(r.monotone, s.nu[i - 1] - s.nu[i]);
      r.envelope = std::max(r.envelope, std::abs(s.U[i] - s.U[i - 1] - 0.5 * h * (s.nu[i - 1] + s.nu[i])));
    }
    r.box = std::max({r.box, v0 - s.nu[i], s.nu[i] - vA});
    r.ir = std::max(r.ir, b - s.U[i]);
  }
  r.ls = std::max(0.0, s.U.front() - s.theta.front() * s.nu.front());
  return r;
}

Mechanism oracle_mechanism(const Environment& env, const OracleSolution& s) {
  Mechanism m;
  m.theta = s.theta;
  m.U = s.U;
  m.q.resize(s.nu.size());
  m.t.resize(s.nu.size());
  for (std::size_t i = 0; i < s.nu.size(); ++i) {
    m.q[i] = std::clamp(env.util().v_inverse(s.nu[i]), 0.0, env.cap());
    m.t[i] = s.theta[i] * s.nu[i] - s.U[i];
  }
  m.U_floor = s.u_floor;
  return m;
}

OracleGap oracle_gap(const Environment& env, const Mechanism& closed_form, std::size_t n, double tol) {
  OracleGap g;
  g.oracle = oracle_solve(env, n, tol);
  std::vector<double> nu_cf(closed_form.size());
  for (std::size_t i = 0; i < nu_cf.size(); ++i) nu_cf[i] = env.util().v(closed_form.q[i]);
  for (std::size_t i = 0; i < g.oracle.nu.size(); ++i) {
    const double ref = interpolate(closed_form.theta, nu_cf, g.oracle.theta[i]);
    g.nu_sup = std::max(g.nu_sup, std::abs(g.oracle.nu[i] - ref));
  }
  const Environment env_n = env.with_grid(n);
  const double w_cf = welfare(closed_form, env).total;
  const double w_or = welfare(oracle_mechanism(env_n, g.oracle), env_n).total;
  g.objective = (w_or - w_cf) / std::max(std::abs(w_cf), 1e-12);
  return g;
}

}  // namespace mechd
