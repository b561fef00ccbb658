#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mechd/env.hpp"
#include "mechd/ironing.hpp"
#include "mechd/mech.hpp"

namespace mechd {

inline constexpr double kMuTol = 1e-10;
inline constexpr double kResidualTol = 1e-8;
inline constexpr double kThetaTol = 1e-10;
inline constexpr double kStitchTol = 1e-7;

/// Multiplier on the participation constraints, sampled on the grid.
struct MultiplierProfile {
  std::vector<double> lambda;
  double mu = 0.0;
};

struct SolverDiagnostics {
  Correlation correlation = Correlation::Negative;
  bool intervene = false;
  double mu_star = 0.0;
  std::optional<double> mu_max;
  std::optional<double> theta_H_star;
  std::optional<double> theta_L_star;
  MultiplierProfile multiplier;
  RegionSegmentation regions;
  double welfare_lf = 0.0;
  double welfare_opt = 0.0;
  double welfare_gain = 0.0;
  std::vector<std::string> warnings;
};

struct Solution {
  Mechanism mechanism;
  SolverDiagnostics diag;
};

/// Allocation of the program on a sub-interval of types, as produced by
/// ironing a screening transform there.
struct RestrictedAllocation {
  TypeGrid grid;
  std::vector<double> q;
  std::vector<double> nu;
  IroningResult ironing;
};

bool scope_test(const Environment& env);
bool all_ir_bind_check(const Environment& env);

/// alpha - E[omega], with |.| below this treated as zero.
inline constexpr double kMeanTieTol = 1e-12;
/// Sign of E[omega] - alpha after the tie tolerance: -1, 0 or +1.
int mean_weight_sign(const Environment& env);

// Negative correlation.
double mu_max(const Environment& env);
double theta_H(const Environment& env, double mu);
RestrictedAllocation q_mu_negative(const Environment& env, double mu);
/// int nu_mu + theta_min nu_mu(theta_min) - U_lf(theta_H(mu)); nondecreasing in mu.
double mu_residual_negative(const Environment& env, double mu);
double mu_star_negative(const Environment& env);
Solution solve_negative(const Environment& env);

// Positive correlation.
double theta_L_star(const Environment& env);
RestrictedAllocation q_mu_positive(const Environment& env, double mu, double theta_lo);
Solution solve_positive(const Environment& env);

/// Relaxation without participation constraints (planner controls the market).
Solution solve_full_control(const Environment& env);

/// Dispatch on env.correlation().
Solution solve(const Environment& env);

/// Piecewise-linear read-out of a sampled profile.
double interpolate(const std::vector<double>& x, const std::vector<double>& y, double at);

}  // namespace mechd
