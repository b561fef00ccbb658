#pragma once

#include <memory>
#include <string>
#include <vector>

namespace mechd {

/// Type distribution on a closed interval [lo, hi].
class Distribution {
 public:
  virtual ~Distribution() = default;
  virtual double cdf(double theta) const = 0;
  virtual double pdf(double theta) const = 0;
  virtual double quantile(double z) const = 0;
  virtual std::string name() const = 0;
};

std::unique_ptr<Distribution> make_uniform(double lo, double hi);
std::unique_ptr<Distribution> make_truncated_normal(double lo, double hi, double mean, double sd);
/// Beta(a, b) stretched onto [lo, hi].
std::unique_ptr<Distribution> make_scaled_beta(double lo, double hi, double a, double b);

/// Gross utility from quality, v(q) on [0, A].
class Utility {
 public:
  virtual ~Utility() = default;
  virtual double v(double q) const = 0;
  virtual double dv(double q) const = 0;
  virtual double d2v(double q) const = 0;
  /// Inverse of v' without clamping; callers clamp to [0, A].
  virtual double dv_inverse(double y) const = 0;
  virtual double v_inverse(double nu) const = 0;
  virtual std::string name() const = 0;
};

std::unique_ptr<Utility> make_sqrt_utility();
std::unique_ptr<Utility> make_log_utility();
std::unique_ptr<Utility> make_crra_utility(double gamma);

/// Welfare weight omega(theta).
class WeightFunction {
 public:
  virtual ~WeightFunction() = default;
  virtual double operator()(double theta) const = 0;
  virtual std::string name() const = 0;
};

/// omega = intercept + slope * theta
std::unique_ptr<WeightFunction> make_linear_weight(double intercept, double slope);
/// omega = shift + scale * exp(rate * theta)
std::unique_ptr<WeightFunction> make_exponential_weight(double shift, double scale, double rate);
/// Piecewise-linear through the knots, flat beyond the end knots.
std::unique_ptr<WeightFunction> make_tabulated_weight(std::vector<double> thetas,
                                                      std::vector<double> values);

}  // namespace mechd
