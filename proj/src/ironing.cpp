#include "mechd/ironing.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

namespace mechd {

namespace {

// Cell boundaries: first and last node sit on the edges of their cells.
std::vector<double> cell_boundaries(const TypeGrid& grid) {
  const std::size_t n = grid.size();
  std::vector<double> b(n + 1);
  b[0] = grid.z.front();
  for (std::size_t i = 1; i < n; ++i) b[i] = 0.5 * (grid.z[i - 1] + grid.z[i]);
  b[n] = grid.z.back();
  return b;
}

double cross(double ox, double oy, double ax, double ay, double bx, double by) {
  return (ax - ox) * (by - oy) - (ay - oy) * (bx - ox);
}

}  // namespace

std::vector<double> node_masses(const TypeGrid& grid) {
  const auto b = cell_boundaries(grid);
  std::vector<double> w(grid.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = b[i + 1] - b[i];
  return w;
}

CumulativeProfile cumulative_from_top(const ScreeningTransform& t, const TypeGrid& grid) {
  assert(t.base.size() == grid.size());
  CumulativeProfile out;
  out.z = cell_boundaries(grid);
  const std::size_t n = grid.size();
  out.g.assign(n + 1, 0.0);
  for (std::size_t k = n; k-- > 0;) out.g[k] = out.g[k + 1] + t.base[k] * (out.z[k + 1] - out.z[k]);
  out.g[0] += t.atom_mass;
  return out;
}

CumulativeProfile cumulative_from_top(const ScreeningTransform& t, const Environment& env) {
  return cumulative_from_top(t, env.grid());
}

std::vector<std::size_t> hull_vertices(std::span<const double> x, std::span<const double> y) {
  std::vector<std::size_t> h;
  h.reserve(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    while (h.size() >= 2) {
      const std::size_t o = h[h.size() - 2];
      const std::size_t a = h.back();
      if (cross(x[o], y[o], x[a], y[a], x[k], y[k]) >= 0.0) {
        h.pop_back();
      } else {
        break;
      }
    }
    h.push_back(k);
  }
  return h;
}

std::vector<double> concave_majorant(std::span<const double> x, std::span<const double> y) {
  const auto v = hull_vertices(x, y);
  std::vector<double> out(x.size());
  for (std::size_t s = 0; s + 1 < v.size(); ++s) {
    const std::size_t a = v[s], b = v[s + 1];
    out[a] = y[a];
    const double slope = (y[b] - y[a]) / (x[b] - x[a]);
    for (std::size_t k = a + 1; k < b; ++k) out[k] = y[a] + slope * (x[k] - x[a]);
  }
  if (!v.empty()) out[v.back()] = y[v.back()];
  return out;
}

std::vector<double> concave_majorant(std::span<const double> y) {
  std::vector<double> x(y.size());
  const double denom = y.size() > 1 ? static_cast<double>(y.size() - 1) : 1.0;
  for (std::size_t i = 0; i < y.size(); ++i) x[i] = static_cast<double>(i) / denom;
  return concave_majorant(x, y);
}

IroningResult iron(const ScreeningTransform& t, const TypeGrid& grid) {
  const std::size_t n = grid.size();
  const auto prof = cumulative_from_top(t, grid);
  const auto v = hull_vertices(prof.z, prof.g);

  IroningResult r;
  r.ironed.resize(n);
  r.hull = concave_majorant(prof.z, prof.g);
  r.hull_z = prof.z;

  // Every hull segment spans whole node cells, so each node reads one slope.
  for (std::size_t s = 0; s + 1 < v.size(); ++s) {
    const std::size_t a = v[s], b = v[s + 1];
    const bool single = (b == a + 1);
    if (single && !(a == 0 && t.atom_mass != 0.0)) {
      r.ironed[a] = t.base[a];
      continue;
    }
    const double level = (prof.g[a] - prof.g[b]) / (prof.z[b] - prof.z[a]);
    bool deviates = false;
    for (std::size_t k = a; k < b; ++k) {
      r.ironed[k] = level;
      if (std::abs(level - t.base[k]) > 1e-9 * std::max(1.0, std::abs(t.base[k]))) deviates = true;
    }
    if (deviates) r.pools.push_back({grid.theta[a], grid.theta[b - 1]});
  }
  return r;
}

IroningResult iron(const ScreeningTransform& t, const Environment& env) { return iron(t, env.grid()); }

}  // namespace mechd
