#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mechd/families.hpp"
#include "mechd/mechanism.hpp"

namespace mechd {

enum class Correlation { Negative, Positive };

std::string to_string(Correlation c);

inline constexpr std::size_t kDefaultGridSize = 10001;

/// Type nodes with their quantiles. Nodes may come from a quantile-uniform
/// build or from restricting such a grid to a sub-interval, in which case the
/// end points are exact and `origin` maps back to the parent index (-1 for
/// nodes that were added).
struct TypeGrid {
  std::vector<double> theta;
  std::vector<double> z;
  std::vector<long> origin;

  std::size_t size() const { return theta.size(); }

  static TypeGrid quantile_uniform(const Distribution& dist, double lo, double hi, std::size_t n);
  TypeGrid restrict_to(const Distribution& dist, double lo, double hi) const;
};

/// Family name plus named scalar parameters; tabulated weights also carry knots.
struct FamilySpec {
  std::string type;
  std::map<std::string, double> params;
  std::vector<double> knot_theta;
  std::vector<double> knot_value;
};

struct EnvConfig {
  double theta_min = 1.0;
  double theta_max = 2.0;
  FamilySpec distribution{"uniform", {}, {}, {}};
  FamilySpec utility{"sqrt", {}, {}, {}};
  std::optional<double> cap;
  double cost = 1.0;
  double alpha = 1.0;
  FamilySpec weight{"linear", {{"intercept", 1.0}, {"slope", 0.0}}, {}, {}};
  Correlation correlation = Correlation::Negative;
  std::size_t grid_n = kDefaultGridSize;
};

/// Validated market primitives on a shared type grid. Immutable; copies share
/// the family objects.
class Environment {
 public:
  double theta_min() const { return grid_.theta.front(); }
  double theta_max() const { return grid_.theta.back(); }
  double cap() const { return cap_; }
  double cost() const { return cost_; }
  double alpha() const { return alpha_; }
  Correlation correlation() const { return correlation_; }
  const TypeGrid& grid() const { return grid_; }
  const Distribution& dist() const { return *dist_; }
  const Utility& util() const { return *util_; }
  const EnvConfig& config() const { return config_; }

  double F(double theta) const;
  double f(double theta) const;
  double omega(double theta) const { return (*weight_)(theta); }

  std::span<const double> omega_nodes() const { return omega_; }
  std::span<const double> density_nodes() const { return density_; }
  double max_weight() const { return max_omega_; }
  double mean_weight() const { return omega_cum_.back(); }

  /// int_a^b [alpha - omega] dF for arbitrary a <= b in the support.
  double weight_integral(double a, double b) const;
  double phi_from_bottom(double theta) const { return weight_integral(theta_min(), theta); }
  double phi_to_top(double theta) const { return weight_integral(theta, theta_max()); }

  /// D(p, theta) clamped to [0, A].
  double demand(double p, double theta) const;
  /// Quality chosen at price c by a consumer whose marginal value is x; used
  /// to map (possibly nonpositive) virtual types to allocations.
  double quality_at(double x) const { return x > 0.0 ? demand(cost_, x) : 0.0; }
  double q_lf(double theta) const { return demand(cost_, theta); }
  double nu_lf(double theta) const { return util_->v(q_lf(theta)); }
  double U_lf(double theta) const;

  /// Same primitives with a different weight on profit.
  Environment with_alpha(double alpha) const;
  /// Same primitives on a quantile-uniform grid of another size.
  Environment with_grid(std::size_t n) const;

 private:
  friend Environment build_environment(const EnvConfig& config);
  Environment() = default;
  void precompute();
  double omega_cumulative(double theta) const;

  EnvConfig config_;
  std::shared_ptr<const Distribution> dist_;
  std::shared_ptr<const Utility> util_;
  std::shared_ptr<const WeightFunction> weight_;
  double cap_ = 0.0;
  double cost_ = 1.0;
  double alpha_ = 1.0;
  Correlation correlation_ = Correlation::Negative;
  TypeGrid grid_;
  std::vector<double> omega_;
  std::vector<double> density_;
  std::vector<double> omega_cum_;  // int_{theta_min}^{theta_i} omega dF
  double max_omega_ = 0.0;
};

Environment build_environment(const EnvConfig& config);

double demand(const Environment& env, double p, double theta);
Mechanism laissez_faire(const Environment& env);
/// Laissez-faire on arbitrary nodes (used for grids other than env.grid()).
Mechanism laissez_faire(const Environment& env, std::span<const double> theta);
double weight_integral(const Environment& env, double a, double b);

}  // namespace mechd
