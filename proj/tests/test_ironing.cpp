#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "mechd/ironing.hpp"
#include "mechd/isotonic.hpp"

using namespace mechd;

namespace {

TypeGrid uniform_grid(double lo, double hi, std::size_t n) {
  const auto d = make_uniform(lo, hi);
  return TypeGrid::quantile_uniform(*d, lo, hi, n);
}

ScreeningTransform sample(const TypeGrid& g, auto h, double atom = 0.0) {
  ScreeningTransform t;
  for (double th : g.theta) t.base.push_back(h(th));
  t.atom_mass = atom;
  return t;
}

// Least concave majorant at each x[k]: best chord over pairs bracketing k.
std::vector<double> brute_majorant(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  std::vector<double> out(y);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t a = 0; a <= k; ++a) {
      for (std::size_t b = k; b < n; ++b) {
        if (a == b) continue;
        const double v = y[a] + (y[b] - y[a]) * (x[k] - x[a]) / (x[b] - x[a]);
        out[k] = std::max(out[k], v);
      }
    }
  }
  return out;
}

// Weighted isotonic fit by the max-min formula over block averages.
std::vector<double> brute_isotonic(const std::vector<double>& y, const std::vector<double>& w) {
  const std::size_t n = y.size();
  std::vector<double> sw(n + 1, 0.0), swy(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    sw[i + 1] = sw[i] + w[i];
    swy[i + 1] = swy[i] + w[i] * y[i];
  }
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double best = -INFINITY;
    for (std::size_t s = 0; s <= i; ++s) {
      double inner = INFINITY;
      for (std::size_t t = i; t < n; ++t) inner = std::min(inner, (swy[t + 1] - swy[s]) / (sw[t + 1] - sw[s]));
      best = std::max(best, inner);
    }
    out[i] = best;
  }
  return out;
}

double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("cumulative from the top: unit, linear and pure-atom integrands") {
  const auto g = uniform_grid(0.0, 1.0, 1001);
  const auto one = cumulative_from_top(sample(g, [](double) { return 1.0; }), g);
  const auto lin = cumulative_from_top(sample(g, [](double th) { return 1.0 - th; }), g);
  const auto atom = cumulative_from_top(sample(g, [](double) { return 0.0; }, 0.5), g);
  REQUIRE(one.z.size() == g.size() + 1);
  for (std::size_t k = 0; k < one.z.size(); k += 50) {
    const double z = one.z[k];
    CHECK(one.g[k] == doctest::Approx(1.0 - z).epsilon(1e-12));
    CHECK(lin.g[k] == doctest::Approx((1.0 - z) * (1.0 - z) / 2.0).epsilon(1e-6));
  }
  CHECK(atom.g[0] == 0.5);
  for (std::size_t k = 1; k < atom.g.size(); ++k) CHECK(atom.g[k] == 0.0);
}

TEST_CASE("concave majorant: textbook shapes") {
  std::vector<double> x, concave, convex, spike;
  for (int k = 0; k <= 100; ++k) {
    const double z = k / 100.0;
    x.push_back(z);
    concave.push_back(std::sqrt(z) - z * z);
    convex.push_back((1.0 - z) * (1.0 - z) / 2.0);
    spike.push_back(k == 0 ? 1.0 : 0.0);
  }
  CHECK(sup_diff(concave_majorant(x, concave), concave) == 0.0);
  const auto chord = concave_majorant(x, convex);
  const auto line = concave_majorant(spike);
  for (std::size_t k = 0; k < x.size(); ++k) {
    CHECK(chord[k] == doctest::Approx((1.0 - x[k]) / 2.0).epsilon(1e-14));
    CHECK(line[k] == doctest::Approx(1.0 - x[k]).epsilon(1e-14));
  }
  // Collinear interior points are dropped.
  const std::vector<double> lx{0, 1, 2, 3}, ly{0, 1, 2, 3};
  CHECK(hull_vertices(lx, ly) == std::vector<std::size_t>{0, 3});
}

TEST_CASE("concave majorant agrees with the quadratic-time oracle") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 5 + trial * 6;  // up to 179 points
    std::vector<double> x(n), y(n);
    double pos = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      pos += 0.01 + std::abs(u(rng));
      x[i] = pos;
      y[i] = trial % 3 == 0 ? u(rng) : std::sin(3.0 * pos) + 0.1 * u(rng);
    }
    CAPTURE(n);
    CHECK(sup_diff(concave_majorant(x, y), brute_majorant(x, y)) <= 1e-12);
  }
}

TEST_CASE("iron: nondecreasing transform is left alone") {
  const auto g = uniform_grid(1.0, 2.0, 2001);
  const auto t = sample(g, [](double th) { return th * th - 0.5 * th; });
  const auto r = iron(t, g);
  CHECK(sup_diff(r.ironed, t.base) <= 1e-8);
  CHECK(r.pools.empty());
}

TEST_CASE("iron: decreasing line pools to its mean") {
  const auto g = uniform_grid(0.0, 1.0, 1001);
  const auto r = iron(sample(g, [](double th) { return 1.0 - th; }), g);
  for (double v : r.ironed) CHECK(v == doctest::Approx(0.5).epsilon(1e-10));
  REQUIRE(r.pools.size() == 1);
  CHECK(r.pools[0].lo == 0.0);
  CHECK(r.pools[0].hi == 1.0);
}

TEST_CASE("iron: atom spreads over an initial pool by mass balance") {
  const auto g = uniform_grid(1.0, 2.0, 4001);
  auto h = [](double th) { return th; };
  SUBCASE("interior pool") {
    // (theta_b - 1)^2 / 2 = 0.125 gives theta_b = 1.5 and level 1.5.
    const auto r = iron(sample(g, h, 0.125), g);
    REQUIRE_FALSE(r.pools.empty());
    CHECK(r.pools[0].lo == 1.0);
    CHECK(r.pools[0].hi == doctest::Approx(1.5).epsilon(1e-3));
    CHECK(r.ironed[0] == doctest::Approx(1.5).epsilon(1e-3));
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (g.theta[i] > 1.51) CHECK(r.ironed[i] == doctest::Approx(g.theta[i]).epsilon(1e-9));
    }
    // int over the pool of (level - h) dF equals the atom.
    double excess = 0.0;
    const auto w = node_masses(g);
    for (std::size_t i = 0; i < g.size(); ++i) excess += (r.ironed[i] - g.theta[i]) * w[i];
    CHECK(excess == doctest::Approx(0.125).epsilon(1e-9));
  }
  SUBCASE("pool covering the support") {
    const auto r = iron(sample(g, h, 0.5), g);
    for (double v : r.ironed) CHECK(v == doctest::Approx(2.0).epsilon(1e-6));
  }
}

TEST_CASE("iron: idempotent and monotone on rough inputs") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> noise(0.0, 0.3);
  const auto g = uniform_grid(1.0, 3.0, 301);
  for (int trial = 0; trial < 10; ++trial) {
    ScreeningTransform t;
    for (double th : g.theta) t.base.push_back(std::sin(4.0 * th) + noise(rng));
    t.atom_mass = trial % 2 ? 0.05 * trial : 0.0;
    const auto once = iron(t, g);
    for (std::size_t i = 1; i < once.ironed.size(); ++i) CHECK(once.ironed[i] >= once.ironed[i - 1] - 1e-12);
    const auto twice = iron(ScreeningTransform{once.ironed, 0.0}, g);
    CHECK(sup_diff(twice.ironed, once.ironed) <= 1e-10);
  }
}

TEST_CASE("isotonic regression matches the max-min formula") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 1 + static_cast<std::size_t>(trial) * 3;
    std::vector<double> y(n), w(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = std::cos(0.7 * i) + u(rng);
      w[i] = 0.1 + u(rng);
    }
    CHECK(sup_diff(isotonic_regression(y, w), brute_isotonic(y, w)) <= 1e-12);
  }
  const std::vector<double> y{3, 1, 2}, w{1, 1, 1};
  CHECK(isotonic_regression(y, w) == std::vector<double>{2, 2, 2});
}

TEST_CASE("isotonic regression with cell masses equals ironing without an atom") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> noise(0.0, 0.2);
  const auto d = make_truncated_normal(1.0, 2.0, 1.3, 0.4);
  const auto g = TypeGrid::quantile_uniform(*d, 1.0, 2.0, 400);
  ScreeningTransform t;
  for (double th : g.theta) t.base.push_back(std::cos(5.0 * th) + noise(rng));
  const auto ironed = iron(t, g).ironed;
  const auto w = node_masses(g);
  CHECK(sup_diff(ironed, isotonic_regression(t.base, w)) <= 1e-10);
}
