#include "mechd/env.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mechd/errors.hpp"
#include "mechd/quadrature.hpp"

namespace mechd {

namespace {

double param(const FamilySpec& spec, const std::string& key) {
  const auto it = spec.params.find(key);
  if (it == spec.params.end()) {
    throw Error(ErrorCode::InvalidParameter, spec.type + " needs parameter '" + key + "'");
  }
  return it->second;
}

std::unique_ptr<Distribution> make_distribution(const EnvConfig& c) {
  const auto& s = c.distribution;
  if (s.type == "uniform") return make_uniform(c.theta_min, c.theta_max);
  if (s.type == "truncated-normal") {
    return make_truncated_normal(c.theta_min, c.theta_max, param(s, "mean"), param(s, "sd"));
  }
  if (s.type == "scaled-beta") return make_scaled_beta(c.theta_min, c.theta_max, param(s, "a"), param(s, "b"));
  throw Error(ErrorCode::InvalidParameter, "unknown distribution type '" + s.type + "'");
}

std::unique_ptr<Utility> make_utility(const FamilySpec& s) {
  if (s.type == "sqrt") return make_sqrt_utility();
  if (s.type == "log") return make_log_utility();
  if (s.type == "crra") return make_crra_utility(param(s, "gamma"));
  throw Error(ErrorCode::InvalidParameter, "unknown utility type '" + s.type + "'");
}

std::unique_ptr<WeightFunction> make_weight(const FamilySpec& s) {
  if (s.type == "linear") return make_linear_weight(param(s, "intercept"), param(s, "slope"));
  if (s.type == "exponential") {
    return make_exponential_weight(param(s, "shift"), param(s, "scale"), param(s, "rate"));
  }
  if (s.type == "tabulated-monotone") return make_tabulated_weight(s.knot_theta, s.knot_value);
  throw Error(ErrorCode::InvalidParameter, "unknown welfare_weight type '" + s.type + "'");
}

void check_utility(const Utility& u, double cap) {
  constexpr int kSamples = 200;
  double prev_v = u.v(0.0);
  double prev_slope = std::numeric_limits<double>::infinity();
  double prev_q = 0.0;
  for (int k = 1; k <= kSamples; ++k) {
    // Quadratic spacing puts more samples near zero where curvature lives.
    const double s = static_cast<double>(k) / kSamples;
    const double q = cap * s * s;
    const double vq = u.v(q);
    const double d1 = u.dv(q);
    const double d2 = u.d2v(q);
    if (!(d1 > 0.0) || !(d2 < 0.0) || !std::isfinite(vq)) {
      std::ostringstream msg;
      msg << "v' > 0 and v'' < 0 fail at q=" << q;
      throw Error(ErrorCode::NonConcaveUtility, msg.str());
    }
    const double slope = (vq - prev_v) / (q - prev_q);
    if (!(slope > 0.0) || slope > prev_slope * (1.0 + 1e-12)) {
      std::ostringstream msg;
      msg << "sampled v is not increasing and concave near q=" << q;
      throw Error(ErrorCode::NonConcaveUtility, msg.str());
    }
    prev_v = vq;
    prev_slope = slope;
    prev_q = q;
  }
}

}  // namespace

std::string to_string(Correlation c) { return c == Correlation::Negative ? "negative" : "positive"; }

TypeGrid TypeGrid::quantile_uniform(const Distribution& dist, double lo, double hi, std::size_t n) {
  TypeGrid g;
  g.theta.resize(n);
  g.z.resize(n);
  g.origin.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double z = static_cast<double>(i) / static_cast<double>(n - 1);
    g.z[i] = z;
    g.theta[i] = (i == 0) ? lo : (i + 1 == n) ? hi : dist.quantile(z);
    g.origin[i] = static_cast<long>(i);
  }
  return g;
}

TypeGrid TypeGrid::restrict_to(const Distribution& dist, double lo, double hi) const {
  TypeGrid g;
  const double eps = 1e-12 * (theta.back() - theta.front());
  g.theta.push_back(lo);
  g.z.push_back(dist.cdf(lo));
  long first = -1;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    if (std::abs(theta[i] - lo) <= eps) first = static_cast<long>(i);
  }
  g.origin.push_back(first);
  for (std::size_t i = 0; i < theta.size(); ++i) {
    if (theta[i] > lo + eps && theta[i] < hi - eps) {
      g.theta.push_back(theta[i]);
      g.z.push_back(z[i]);
      g.origin.push_back(static_cast<long>(i));
    }
  }
  if (hi > lo + eps) {
    long last = -1;
    for (std::size_t i = 0; i < theta.size(); ++i) {
      if (std::abs(theta[i] - hi) <= eps) last = static_cast<long>(i);
    }
    g.theta.push_back(hi);
    g.z.push_back(last >= 0 ? z[static_cast<std::size_t>(last)] : dist.cdf(hi));
    g.origin.push_back(last);
  }
  if (g.origin.front() >= 0) g.z.front() = z[static_cast<std::size_t>(g.origin.front())];
  return g;
}

double Environment::F(double theta) const { return dist_->cdf(theta); }
double Environment::f(double theta) const { return dist_->pdf(theta); }

double Environment::demand(double p, double theta) const {
  if (!(theta > 0.0)) return 0.0;
  const double y = p / theta;
  if (y >= util_->dv(0.0)) return 0.0;
  if (y <= util_->dv(cap_)) return cap_;
  return std::clamp(util_->dv_inverse(y), 0.0, cap_);
}

double Environment::U_lf(double theta) const {
  const double q = q_lf(theta);
  return theta * util_->v(q) - cost_ * q;
}

double Environment::omega_cumulative(double theta) const {
  const auto& th = grid_.theta;
  if (theta <= th.front()) return 0.0;
  if (theta >= th.back()) return omega_cum_.back();
  const auto it = std::upper_bound(th.begin(), th.end(), theta);
  const std::size_t i = static_cast<std::size_t>(it - th.begin()) - 1;
  if (theta == th[i]) return omega_cum_[i];
  const double za = grid_.z[i];
  const double zb = dist_->cdf(theta);
  const double zm = 0.5 * (za + zb);
  return omega_cum_[i] + simpson(omega_[i], omega(dist_->quantile(zm)), omega(theta), zb - za);
}

double Environment::weight_integral(double a, double b) const {
  if (b <= a) return 0.0;
  const double mass = ((b >= theta_max()) ? 1.0 : F(b)) - ((a <= theta_min()) ? 0.0 : F(a));
  return alpha_ * mass - (omega_cumulative(b) - omega_cumulative(a));
}

void Environment::precompute() {
  const std::size_t n = grid_.size();
  omega_.resize(n);
  density_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    omega_[i] = omega(grid_.theta[i]);
    density_[i] = f(grid_.theta[i]);
  }
  omega_cum_.assign(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double zm = 0.5 * (grid_.z[i] + grid_.z[i + 1]);
    omega_cum_[i + 1] = omega_cum_[i] + simpson(omega_[i], omega(dist_->quantile(zm)), omega_[i + 1],
                                                grid_.z[i + 1] - grid_.z[i]);
  }
  max_omega_ = *std::max_element(omega_.begin(), omega_.end());
}

Environment Environment::with_alpha(double alpha) const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw Error(ErrorCode::InvalidParameter, "alpha must be positive and finite");
  }
  Environment e = *this;
  e.alpha_ = alpha;
  e.config_.alpha = alpha;
  return e;
}

Environment Environment::with_grid(std::size_t n) const {
  EnvConfig c = config_;
  c.grid_n = n;
  c.cap = cap_;
  return build_environment(c);
}

Environment build_environment(const EnvConfig& config) {
  if (!(config.theta_min > 0.0) || !std::isfinite(config.theta_min)) {
    throw Error(ErrorCode::InvalidSupport, "theta_min must be positive");
  }
  if (!(config.theta_max > config.theta_min) || !std::isfinite(config.theta_max)) {
    throw Error(ErrorCode::InvalidSupport, "theta_max must exceed theta_min");
  }
  if (!(config.cost > 0.0) || !std::isfinite(config.cost)) {
    throw Error(ErrorCode::InvalidParameter, "cost must be positive");
  }
  if (!(config.alpha > 0.0) || !std::isfinite(config.alpha)) {
    throw Error(ErrorCode::InvalidParameter, "alpha must be positive");
  }
  if (config.grid_n < 2) throw Error(ErrorCode::InvalidParameter, "grid_n must be at least 2");

  Environment env;
  env.config_ = config;
  env.dist_ = make_distribution(config);
  env.util_ = make_utility(config.utility);
  env.weight_ = make_weight(config.weight);
  env.cost_ = config.cost;
  env.alpha_ = config.alpha;
  env.correlation_ = config.correlation;

  if (config.cap) {
    if (!(*config.cap > 0.0)) throw Error(ErrorCode::InvalidParameter, "utility cap A must be positive");
    env.cap_ = *config.cap;
  } else {
    env.cap_ = std::numeric_limits<double>::infinity();
    env.cap_ = 100.0 * std::max(env.q_lf(config.theta_max), 1.0);
  }
  env.config_.cap = env.cap_;
  check_utility(*env.util_, env.cap_);

  env.grid_ = TypeGrid::quantile_uniform(*env.dist_, config.theta_min, config.theta_max, config.grid_n);
  for (std::size_t i = 1; i < env.grid_.size(); ++i) {
    if (!(env.grid_.theta[i] > env.grid_.theta[i - 1])) {
      throw Error(ErrorCode::DensityNotPositive, "quantile grid collapses; density vanishes somewhere");
    }
  }
  env.precompute();

  for (std::size_t i = 0; i < env.grid_.size(); ++i) {
    if (!(env.density_[i] > 0.0)) {
      std::ostringstream msg;
      msg << "f(" << env.grid_.theta[i] << ") = " << env.density_[i];
      throw Error(ErrorCode::DensityNotPositive, msg.str());
    }
  }

  double scale = 1.0;
  for (double w : env.omega_) {
    if (!std::isfinite(w) || w < 0.0) {
      throw Error(ErrorCode::InvalidParameter, "welfare weights must be finite and nonnegative");
    }
    scale = std::max(scale, std::abs(w));
  }
  const double tol = 1e-12 * scale;
  const bool negative = config.correlation == Correlation::Negative;
  for (std::size_t i = 1; i < env.omega_.size(); ++i) {
    const double step = env.omega_[i] - env.omega_[i - 1];
    if ((negative && step > tol) || (!negative && step < -tol)) {
      std::ostringstream msg;
      msg << "weight is not " << (negative ? "nonincreasing" : "nondecreasing") << " near theta="
          << env.grid_.theta[i];
      throw Error(ErrorCode::NonMonotoneWeight, msg.str());
    }
  }
  return env;
}

double demand(const Environment& env, double p, double theta) { return env.demand(p, theta); }

double weight_integral(const Environment& env, double a, double b) { return env.weight_integral(a, b); }

Mechanism laissez_faire(const Environment& env, std::span<const double> theta) {
  Mechanism m;
  m.theta.assign(theta.begin(), theta.end());
  const std::size_t n = theta.size();
  m.q.resize(n);
  m.t.resize(n);
  m.U.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    m.q[i] = env.q_lf(theta[i]);
    m.t[i] = env.cost() * m.q[i];
    m.U[i] = env.U_lf(theta[i]);
  }
  m.U_floor = m.U.front();
  return m;
}

Mechanism laissez_faire(const Environment& env) { return laissez_faire(env, env.grid().theta); }

}  // namespace mechd
