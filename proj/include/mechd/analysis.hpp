#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mechd/env.hpp"
#include "mechd/mech.hpp"
#include "mechd/solver.hpp"

namespace mechd {

/// Whether a free public option is part of the optimum, decided from the
/// primitives without running the full solver.
bool public_option_test(const Environment& env);

inline constexpr double kToppingUpTol = 1e-9;

struct ToppingUpReport {
  bool predicted = false;          ///< rule: negative correlation and max omega > alpha
  bool benefits_from_ban = false;  ///< measured: violation > kToppingUpTol
  double violation = 0.0;          ///< max (q_lf - q*)+ over the grid
  double at_theta = 0.0;           ///< where that maximum is attained
};

/// Would the planner gain from preventing consumers topping up the public
/// good in the private market? A ban helps exactly when the optimum has
/// q* < q_lf somewhere, which is measured on the solver output.
ToppingUpReport topping_up_test(const Environment& env);

struct SweepPoint {
  double alpha = 0.0;
  double mu_star = 0.0;
  std::optional<double> theta_H_star;
  std::optional<double> theta_L_star;
  double welfare_gain = 0.0;
  std::vector<double> region_boundaries;
};

struct SweepResult {
  std::vector<SweepPoint> points;
  bool mu_nonincreasing = true;
  bool theta_nondecreasing = true;   ///< theta_H* or theta_L*, whichever applies
  bool theta_nonincreasing = true;
  bool gain_nonincreasing = true;
};

/// Re-solves with alpha overridden at each value; values must increase
/// strictly and be positive.
SweepResult alpha_sweep(const Environment& env, const std::vector<double>& alphas, double tol = 1e-8);

/// Sweep as CSV: alpha,mu_star,theta_H_star,theta_L_star,welfare_gain,region_boundaries
/// (boundaries separated by ';', missing values empty).
std::string sweep_to_csv(const SweepResult& s);

struct DeviationGain {
  double gain = 0.0;        ///< welfare of the deviation minus laissez-faire welfare
  double theta_meet = 0.0;  ///< where the shifted tangent meets U_lf again
  double per_width = 0.0;   ///< gain / (kappa - theta_min)
};

/// Cash-subsidy probe: raise U_lf by delta on [theta_min, kappa], continue
/// along the tangent of U_lf at kappa until it meets U_lf, and evaluate the
/// welfare change. Throws KappaOutOfRange unless theta_min < kappa <= theta_max.
DeviationGain subsidy_deviation_gain(const Environment& env, double kappa, double delta);

struct KktReport {
  double nu_residual = 0.0;       ///< sup |nu - nu from ironing the Lagrangian transform|
  double ls_slackness = 0.0;      ///< |mu (theta_min nu(theta_min) - U_floor)|
  double ir_slackness = 0.0;      ///< |sum (U - U_lf) dLambda|
  double lambda_decrease = 0.0;   ///< largest downward step of Lambda
  double worst() const;
};

/// Sufficiency check of a mechanism against the multipliers in `diag`.
KktReport kkt_verify(const Mechanism& m, const SolverDiagnostics& diag, const Environment& env);

struct CounterfactualReport {
  Correlation correlation = Correlation::Negative;
  int mean_weight_sign = 0;
  /// Crossing of U_fc - U_lf. Where the threshold is defined (positive with
  /// E[omega] <= alpha, negative with E[omega] > alpha) and no crossing exists,
  /// theta_max.
  std::optional<double> theta_hat;
  std::optional<double> theta_L_star;
  std::vector<Interval> counterfactual_better;
  std::vector<Interval> counterfactual_worse;
  std::vector<Interval> constrained_better;
  /// theta_L* < theta_hat; only meaningful for positive correlation with E[omega] <= alpha.
  std::optional<bool> theta_L_below_hat;
};

/// Compares the full-control optimum (participation replaced by U_floor >= 0)
/// with the constrained optimum.
CounterfactualReport counterfactual_compare(const Environment& env, double tol = kClassifyTol);

}  // namespace mechd
