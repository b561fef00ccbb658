#include "mechd/mech.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "mechd/errors.hpp"
#include "mechd/quadrature.hpp"

namespace mechd {

namespace {

std::vector<double> subutility(const Environment& env, std::span<const double> q) {
  std::vector<double> nu(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) nu[i] = env.util().v(q[i]);
  return nu;
}

std::vector<double> quantiles_of(const Environment& env, std::span<const double> theta) {
  const auto& g = env.grid();
  if (theta.size() == g.size() && std::equal(theta.begin(), theta.end(), g.theta.begin())) return g.z;
  std::vector<double> z(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) z[i] = env.F(theta[i]);
  return z;
}

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); }

std::string fmt12(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

}  // namespace

std::string to_string(RegionKind k) {
  switch (k) {
    case RegionKind::PublicOption: return "PublicOption";
    case RegionKind::Subsidy: return "Subsidy";
    case RegionKind::PrivateMarket: return "PrivateMarket";
  }
  return "Unknown";
}

double FeasibilityReport::worst() const {
  return std::max({ic_violation, envelope_violation, ir_violation, ls_violation});
}

Mechanism transfers_from_allocation(const Environment& env, std::span<const double> theta,
                                    std::span<const double> q, double u_floor) {
  for (std::size_t i = 1; i < q.size(); ++i) {
    if (q[i] < q[i - 1]) {
      std::ostringstream msg;
      msg << "q decreases between theta=" << theta[i - 1] << " and " << theta[i];
      throw Error(ErrorCode::NonMonotoneAllocation, msg.str());
    }
  }
  Mechanism m;
  m.theta.assign(theta.begin(), theta.end());
  m.q.assign(q.begin(), q.end());
  const auto nu = subutility(env, q);
  const auto cum = cumulative_integral(theta, nu);
  m.U.resize(q.size());
  m.t.resize(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    m.U[i] = u_floor + cum[i];
    m.t[i] = theta[i] * nu[i] - m.U[i];
  }
  m.U_floor = u_floor;
  return m;
}

Mechanism transfers_from_allocation(const Environment& env, std::span<const double> q, double u_floor) {
  return transfers_from_allocation(env, env.grid().theta, q, u_floor);
}

FeasibilityReport verify_feasibility(const Mechanism& m, const Environment& env, double /*tol*/) {
  FeasibilityReport r;
  const std::size_t n = m.size();
  if (n == 0) return r;
  for (std::size_t i = 1; i < n; ++i) r.ic_violation = std::max(r.ic_violation, m.q[i - 1] - m.q[i]);
  const auto nu = subutility(env, m.q);
  const auto cum = cumulative_integral(m.theta, nu);
  for (std::size_t i = 0; i < n; ++i) {
    r.envelope_violation = std::max(r.envelope_violation, std::abs(m.U[i] - (m.U_floor + cum[i])));
    r.ir_violation = std::max(r.ir_violation, env.U_lf(m.theta[i]) - m.U[i]);
    r.ls_violation = std::max(r.ls_violation, -m.t[i]);
  }
  return r;
}

WelfareBreakdown welfare(const Mechanism& m, const Environment& env) {
  const std::size_t n = m.size();
  const auto z = quantiles_of(env, m.theta);
  std::vector<double> cs(n), profit(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double th = m.theta[i];
    cs[i] = env.omega(th) * (th * env.util().v(m.q[i]) - m.t[i]);
    profit[i] = env.alpha() * (m.t[i] - env.cost() * m.q[i]);
  }
  WelfareBreakdown w;
  w.weighted_consumer_surplus = integral(z, cs);
  w.weighted_profit = integral(z, profit);
  w.total = w.weighted_consumer_surplus + w.weighted_profit;
  return w;
}

RegionSegmentation classify_regions(const Mechanism& m, const Environment& env, double tol) {
  const std::size_t n = m.size();
  RegionSegmentation out;
  if (n == 0) return out;

  std::vector<RegionKind> label(n, RegionKind::Subsidy);
  for (std::size_t i = 0; i < n; ++i) {
    const double th = m.theta[i];
    if (close(m.q[i], env.q_lf(th), tol) && close(m.U[i], env.U_lf(th), tol)) {
      label[i] = RegionKind::PrivateMarket;
    }
  }
  // Public option: the flat, free segment at the bottom.
  std::size_t po = 0;
  while (po < n && close(m.q[po], m.q[0], tol) && m.t[po] <= tol) ++po;
  if (po >= 2) {
    for (std::size_t i = 0; i < po; ++i) label[i] = RegionKind::PublicOption;
  }

  // Runs; a run of a single node is grid noise at a boundary and joins the
  // region before it.
  struct Run { std::size_t start; RegionKind kind; };
  std::vector<Run> runs;
  for (std::size_t i = 0; i < n; ++i) {
    if (runs.empty() || runs.back().kind != label[i]) runs.push_back({i, label[i]});
  }
  std::vector<Run> merged;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    const std::size_t end = (r + 1 < runs.size()) ? runs[r + 1].start : n;
    const bool tiny = end - runs[r].start < 2 && runs.size() > 1;
    if (tiny && !merged.empty()) continue;
    if (tiny && merged.empty() && r + 1 < runs.size()) {
      runs[r + 1].start = runs[r].start;
      continue;
    }
    if (!merged.empty() && merged.back().kind == runs[r].kind) continue;
    merged.push_back(runs[r]);
  }
  for (std::size_t r = 0; r < merged.size(); ++r) {
    const double lo = m.theta[merged[r].start];
    const double hi = (r + 1 < merged.size()) ? m.theta[merged[r + 1].start] : m.theta.back();
    out.push_back({{lo, hi}, merged[r].kind});
  }
  return out;
}

std::vector<RegionKind> region_labels(const Mechanism& m, const RegionSegmentation& regions) {
  std::vector<RegionKind> out(m.size(), RegionKind::Subsidy);
  std::size_t r = 0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    while (r + 1 < regions.size() && m.theta[i] >= regions[r + 1].span.lo) ++r;
    if (!regions.empty()) out[i] = regions[r].kind;
  }
  return out;
}

std::vector<Interval> beneficiaries(const Mechanism& m, const Environment& env, double tol) {
  std::vector<Interval> out;
  bool open = false;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const bool gains = m.U[i] - env.U_lf(m.theta[i]) > tol;
    if (gains && !open) {
      out.push_back({m.theta[i], m.theta[i]});
      open = true;
    } else if (gains) {
      out.back().hi = m.theta[i];
    } else {
      open = false;
    }
  }
  return out;
}

std::string mechanism_to_csv(const Mechanism& m, const Environment& env) {
  return mechanism_to_csv(m, env, classify_regions(m, env));
}

std::string mechanism_to_csv(const Mechanism& m, const Environment& env, const RegionSegmentation& regions) {
  const auto labels = region_labels(m, regions);
  std::string out = "theta,q,t,U,q_lf,U_lf,region\n";
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double th = m.theta[i];
    out += fmt12(th) + ',' + fmt12(m.q[i]) + ',' + fmt12(m.t[i]) + ',' + fmt12(m.U[i]) + ',' +
           fmt12(env.q_lf(th)) + ',' + fmt12(env.U_lf(th)) + ',' + to_string(labels[i]) + '\n';
  }
  return out;
}

Mechanism mechanism_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::InvalidParameter, "empty mechanism CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "theta,q,t,U,q_lf,U_lf,region") {
    throw Error(ErrorCode::InvalidParameter, "unexpected CSV header '" + line + "'");
  }
  Mechanism m;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() != 7) {
      throw Error(ErrorCode::InvalidParameter, "row " + std::to_string(row) + " has " +
                                                   std::to_string(cells.size()) + " fields, expected 7");
    }
    double vals[4];
    for (int k = 0; k < 4; ++k) {
      try {
        std::size_t used = 0;
        vals[k] = std::stod(cells[static_cast<std::size_t>(k)], &used);
        if (used != cells[static_cast<std::size_t>(k)].size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw Error(ErrorCode::InvalidParameter, "row " + std::to_string(row) + " has a non-numeric field");
      }
    }
    m.theta.push_back(vals[0]);
    m.q.push_back(vals[1]);
    m.t.push_back(vals[2]);
    m.U.push_back(vals[3]);
  }
  if (m.theta.size() < 2) throw Error(ErrorCode::InvalidParameter, "mechanism CSV needs at least 2 rows");
  for (std::size_t i = 1; i < m.theta.size(); ++i) {
    if (!(m.theta[i] > m.theta[i - 1])) throw Error(ErrorCode::InvalidParameter, "theta column must increase");
  }
  m.U_floor = m.U.front();
  return m;
}

}  // namespace mechd
