#include "mechd/families.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/normal.hpp>

#include "mechd/errors.hpp"

namespace mechd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

class Uniform final : public Distribution {
 public:
  Uniform(double lo, double hi) : lo_(lo), hi_(hi) {}
  double cdf(double t) const override { return std::clamp((t - lo_) / (hi_ - lo_), 0.0, 1.0); }
  double pdf(double t) const override { return (t < lo_ || t > hi_) ? 0.0 : 1.0 / (hi_ - lo_); }
  double quantile(double z) const override {
    if (z <= 0.0) return lo_;
    if (z >= 1.0) return hi_;
    return lo_ + z * (hi_ - lo_);
  }
  std::string name() const override { return "uniform"; }

 private:
  double lo_, hi_;
};

class TruncatedNormal final : public Distribution {
 public:
  TruncatedNormal(double lo, double hi, double mean, double sd)
      : lo_(lo), hi_(hi), normal_(mean, sd) {
    plo_ = boost::math::cdf(normal_, lo);
    phi_ = boost::math::cdf(normal_, hi);
    mass_ = phi_ - plo_;
    if (!(mass_ > 0.0)) {
      throw Error(ErrorCode::DensityNotPositive, "truncated-normal has no mass on the support");
    }
  }
  double cdf(double t) const override {
    if (t <= lo_) return 0.0;
    if (t >= hi_) return 1.0;
    return std::clamp((boost::math::cdf(normal_, t) - plo_) / mass_, 0.0, 1.0);
  }
  double pdf(double t) const override {
    if (t < lo_ || t > hi_) return 0.0;
    return boost::math::pdf(normal_, t) / mass_;
  }
  double quantile(double z) const override {
    if (z <= 0.0) return lo_;
    if (z >= 1.0) return hi_;
    const double p = plo_ + z * mass_;
    return std::clamp(boost::math::quantile(normal_, p), lo_, hi_);
  }
  std::string name() const override { return "truncated-normal"; }

 private:
  double lo_, hi_;
  boost::math::normal_distribution<double> normal_;
  double plo_ = 0.0, phi_ = 0.0, mass_ = 0.0;
};

class ScaledBeta final : public Distribution {
 public:
  ScaledBeta(double lo, double hi, double a, double b) : lo_(lo), hi_(hi), beta_(a, b) {}
  double cdf(double t) const override {
    if (t <= lo_) return 0.0;
    if (t >= hi_) return 1.0;
    return boost::math::cdf(beta_, (t - lo_) / (hi_ - lo_));
  }
  double pdf(double t) const override {
    if (t < lo_ || t > hi_) return 0.0;
    const double x = (t - lo_) / (hi_ - lo_);
    // Boost refuses the endpoints for shapes below one, where the density is unbounded.
    if ((x == 0.0 && beta_.alpha() < 1.0) || (x == 1.0 && beta_.beta() < 1.0)) return kInf;
    return boost::math::pdf(beta_, x) / (hi_ - lo_);
  }
  double quantile(double z) const override {
    if (z <= 0.0) return lo_;
    if (z >= 1.0) return hi_;
    return lo_ + (hi_ - lo_) * boost::math::quantile(beta_, z);
  }
  std::string name() const override { return "scaled-beta"; }

 private:
  double lo_, hi_;
  boost::math::beta_distribution<double> beta_;
};

class SqrtUtility final : public Utility {
 public:
  double v(double q) const override { return 2.0 * std::sqrt(q); }
  double dv(double q) const override { return q > 0.0 ? 1.0 / std::sqrt(q) : kInf; }
  double d2v(double q) const override { return q > 0.0 ? -0.5 / (q * std::sqrt(q)) : -kInf; }
  double dv_inverse(double y) const override { return 1.0 / (y * y); }
  double v_inverse(double nu) const override { return 0.25 * nu * nu; }
  std::string name() const override { return "sqrt"; }
};

class LogUtility final : public Utility {
 public:
  double v(double q) const override { return std::log1p(q); }
  double dv(double q) const override { return 1.0 / (1.0 + q); }
  double d2v(double q) const override { return -1.0 / ((1.0 + q) * (1.0 + q)); }
  double dv_inverse(double y) const override { return 1.0 / y - 1.0; }
  double v_inverse(double nu) const override { return std::expm1(nu); }
  std::string name() const override { return "log"; }
};

class CrraUtility final : public Utility {
 public:
  explicit CrraUtility(double gamma) : g_(gamma) {}
  double v(double q) const override { return std::pow(q, 1.0 - g_) / (1.0 - g_); }
  double dv(double q) const override { return q > 0.0 ? std::pow(q, -g_) : kInf; }
  double d2v(double q) const override { return q > 0.0 ? -g_ * std::pow(q, -g_ - 1.0) : -kInf; }
  double dv_inverse(double y) const override { return std::pow(y, -1.0 / g_); }
  double v_inverse(double nu) const override {
    return nu <= 0.0 ? 0.0 : std::pow((1.0 - g_) * nu, 1.0 / (1.0 - g_));
  }
  std::string name() const override { return "crra"; }

 private:
  double g_;
};

class LinearWeight final : public WeightFunction {
 public:
  LinearWeight(double a, double b) : a_(a), b_(b) {}
  double operator()(double t) const override { return a_ + b_ * t; }
  std::string name() const override { return "linear"; }

 private:
  double a_, b_;
};

class ExponentialWeight final : public WeightFunction {
 public:
  ExponentialWeight(double shift, double scale, double rate) : s_(shift), k_(scale), r_(rate) {}
  double operator()(double t) const override { return s_ + k_ * std::exp(r_ * t); }
  std::string name() const override { return "exponential"; }

 private:
  double s_, k_, r_;
};

class TabulatedWeight final : public WeightFunction {
 public:
  TabulatedWeight(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {}
  double operator()(double t) const override {
    if (t <= x_.front()) return y_.front();
    if (t >= x_.back()) return y_.back();
    const auto it = std::upper_bound(x_.begin(), x_.end(), t);
    const std::size_t j = static_cast<std::size_t>(it - x_.begin());
    const double s = (t - x_[j - 1]) / (x_[j] - x_[j - 1]);
    return y_[j - 1] + s * (y_[j] - y_[j - 1]);
  }
  std::string name() const override { return "tabulated-monotone"; }

 private:
  std::vector<double> x_, y_;
};

}  // namespace

std::unique_ptr<Distribution> make_uniform(double lo, double hi) {
  return std::make_unique<Uniform>(lo, hi);
}

std::unique_ptr<Distribution> make_truncated_normal(double lo, double hi, double mean, double sd) {
  if (!(sd > 0.0) || !std::isfinite(mean)) {
    throw Error(ErrorCode::InvalidParameter, "truncated-normal needs finite mean and sd > 0");
  }
  return std::make_unique<TruncatedNormal>(lo, hi, mean, sd);
}

std::unique_ptr<Distribution> make_scaled_beta(double lo, double hi, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw Error(ErrorCode::InvalidParameter, "scaled-beta needs shapes a > 0 and b > 0");
  }
  return std::make_unique<ScaledBeta>(lo, hi, a, b);
}

std::unique_ptr<Utility> make_sqrt_utility() { return std::make_unique<SqrtUtility>(); }
std::unique_ptr<Utility> make_log_utility() { return std::make_unique<LogUtility>(); }

std::unique_ptr<Utility> make_crra_utility(double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw Error(ErrorCode::NonConcaveUtility, "crra needs gamma in (0,1)");
  }
  return std::make_unique<CrraUtility>(gamma);
}

std::unique_ptr<WeightFunction> make_linear_weight(double intercept, double slope) {
  return std::make_unique<LinearWeight>(intercept, slope);
}

std::unique_ptr<WeightFunction> make_exponential_weight(double shift, double scale, double rate) {
  return std::make_unique<ExponentialWeight>(shift, scale, rate);
}

std::unique_ptr<WeightFunction> make_tabulated_weight(std::vector<double> thetas,
                                                      std::vector<double> values) {
  if (thetas.size() < 2 || thetas.size() != values.size()) {
    throw Error(ErrorCode::InvalidParameter, "tabulated weight needs >= 2 matching knots");
  }
  for (std::size_t i = 1; i < thetas.size(); ++i) {
    if (!(thetas[i] > thetas[i - 1])) {
      throw Error(ErrorCode::InvalidParameter, "tabulated weight knots must increase strictly");
    }
  }
  return std::make_unique<TabulatedWeight>(std::move(thetas), std::move(values));
}

}  // namespace mechd
