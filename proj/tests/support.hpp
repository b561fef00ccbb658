#pragma once

// Shared environments for the test suites and the acceptance runner.

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "mechd/env.hpp"

namespace mechd::testing {

/// uniform[1,2], v = 2 sqrt(q), c = 1, omega = intercept + slope * theta.
inline EnvConfig linear_config(double intercept, double slope, double alpha, Correlation corr,
                               std::size_t n = kDefaultGridSize) {
  EnvConfig c;
  c.theta_min = 1.0;
  c.theta_max = 2.0;
  c.distribution = {"uniform", {}, {}, {}};
  c.utility = {"sqrt", {}, {}, {}};
  c.cost = 1.0;
  c.alpha = alpha;
  c.weight = {"linear", {{"intercept", intercept}, {"slope", slope}}, {}, {}};
  c.correlation = corr;
  c.grid_n = n;
  return c;
}

inline Environment e1(std::size_t n = kDefaultGridSize) {
  return build_environment(linear_config(4.5, -2.0, 1.0, Correlation::Negative, n));
}
inline Environment e2(std::size_t n = kDefaultGridSize) {
  return build_environment(linear_config(4.5, -2.0, 2.0, Correlation::Negative, n));
}
inline Environment e4(std::size_t n = kDefaultGridSize) {
  return build_environment(linear_config(-1.5, 2.0, 2.0, Correlation::Positive, n));
}
inline Environment boundary(Correlation corr = Correlation::Negative, std::size_t n = kDefaultGridSize) {
  return build_environment(linear_config(1.0, 0.0, 1.0, corr, n));
}

/// Six oracle environments: each correlation sign with E[omega] in
/// {alpha + 0.25, alpha, alpha - 0.25}, alpha = 1, |slope| = 1.
inline std::vector<std::pair<std::string, Environment>> canonical(std::size_t n = kDefaultGridSize) {
  std::vector<std::pair<std::string, Environment>> out;
  for (Correlation corr : {Correlation::Negative, Correlation::Positive}) {
    const double slope = corr == Correlation::Negative ? -1.0 : 1.0;
    for (double mean : {1.25, 1.0, 0.75}) {
      const double intercept = mean - 1.5 * slope;
      std::string name = to_string(corr) + " E[omega]=" + std::to_string(mean).substr(0, 4);
      out.emplace_back(name, build_environment(linear_config(intercept, slope, 1.0, corr, n)));
    }
  }
  return out;
}

struct BatteryEnv {
  std::string name;
  Environment env;
};

/// Randomised monotone-omega environments over all built-in families. Half
/// have scope (alpha below max omega by at least 10% of the omega range), the
/// rest have alpha >= max omega, one of them with equality.
inline std::vector<BatteryEnv> battery(Correlation corr, int count, unsigned seed,
                                       std::size_t n = kDefaultGridSize) {
  std::mt19937_64 rng(seed);
  auto uni = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
  std::vector<BatteryEnv> out;
  const double sign = corr == Correlation::Negative ? -1.0 : 1.0;
  for (int k = 0; k < count; ++k) {
    EnvConfig c;
    c.correlation = corr;
    c.grid_n = n;
    c.theta_min = uni(0.5, 2.0);
    c.theta_max = c.theta_min + uni(0.5, 2.0);
    const double lo = c.theta_min, hi = c.theta_max, w = hi - lo;
    switch (k % 3) {
      case 0: c.distribution = {"uniform", {}, {}, {}}; break;
      case 1:
        c.distribution = {"truncated-normal", {{"mean", lo + uni(0.2, 0.8) * w}, {"sd", uni(0.3, 1.0) * w}}, {}, {}};
        break;
      default: c.distribution = {"scaled-beta", {{"a", uni(0.6, 1.0)}, {"b", uni(0.6, 1.0)}}, {}, {}}; break;
    }
    switch ((k / 3) % 3) {
      case 0: c.utility = {"sqrt", {}, {}, {}}; break;
      case 1: c.utility = {"log", {}, {}, {}}; break;
      default: c.utility = {"crra", {{"gamma", uni(0.3, 0.7)}}, {}, {}}; break;
    }
    c.cost = uni(0.5, 1.5);
    if (c.utility.type == "log") c.cost = std::min(c.cost, 0.9 * lo);  // keep q_lf > 0 at the bottom
    const double base = uni(0.5, 2.0), span = uni(0.5, 2.0);
    switch (k % 4) {
      case 0:
      case 1: {
        const double slope = sign * span / w;
        const double intercept = base - slope * (sign < 0 ? hi : lo);
        c.weight = {"linear", {{"intercept", intercept}, {"slope", slope}}, {}, {}};
        break;
      }
      case 2: {
        const double rate = uni(0.5, 1.5) / w;
        const double scale = sign * span / (std::exp(rate * hi) - std::exp(rate * lo));
        const double shift = base - scale * std::exp(rate * (sign < 0 ? hi : lo));
        c.weight = {"exponential", {{"shift", shift}, {"scale", scale}, {"rate", rate}}, {}, {}};
        break;
      }
      default: {
        FamilySpec t{"tabulated-monotone", {}, {}, {}};
        const int knots = 3 + static_cast<int>(rng() % 3);
        std::vector<double> steps(static_cast<std::size_t>(knots - 1));
        double total = 0.0;
        for (auto& s : steps) total += (s = uni(0.1, 1.0));
        double v = sign < 0 ? base + span : base;
        for (int j = 0; j < knots; ++j) {
          t.knot_theta.push_back(lo + w * j / (knots - 1));
          t.knot_value.push_back(v);
          if (j + 1 < knots) v += sign * span * steps[static_cast<std::size_t>(j)] / total;
        }
        c.weight = t;
        break;
      }
    }
    c.alpha = 1.0;
    const Environment probe = build_environment(c);
    const double wmax = probe.max_weight();
    double wmin = wmax;
    for (double v : probe.omega_nodes()) wmin = std::min(wmin, v);
    double alpha;
    if (k % 2 == 0) {
      alpha = wmin * 0.8 + uni(0.0, 1.0) * (wmax - 0.1 * (wmax - wmin) - wmin * 0.8);
    } else {
      alpha = k == 1 ? wmax : wmax * (1.0 + uni(0.05, 0.5));
    }
    out.push_back({to_string(corr) + "#" + std::to_string(k), probe.with_alpha(alpha)});
  }
  return out;
}

}  // namespace mechd::testing
