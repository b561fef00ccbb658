#include "mechd/quadrature.hpp"

#include <cassert>

namespace mechd {

namespace {

// 2 * second divided difference over (i, i+1, i+2), i.e. the curvature of the
// interpolating quadratic. Returns false on a degenerate stencil.
bool curvature(std::span<const double> x, std::span<const double> y, std::size_t i, double& out) {
  const double h0 = x[i + 1] - x[i];
  const double h1 = x[i + 2] - x[i + 1];
  if (h0 <= 0.0 || h1 <= 0.0) return false;
  const double d0 = (y[i + 1] - y[i]) / h0;
  const double d1 = (y[i + 2] - y[i + 1]) / h1;
  out = 2.0 * (d1 - d0) / (h0 + h1);
  return true;
}

}  // namespace

std::vector<double> cumulative_integral(std::span<const double> x, std::span<const double> y) {
  assert(x.size() == y.size());
  const std::size_t n = x.size();
  std::vector<double> out(n, 0.0);
  if (n < 2) return out;

  // curv[j] belongs to the stencil starting at node j.
  std::vector<double> curv(n >= 3 ? n - 2 : 0, 0.0);
  std::vector<char> ok(curv.size(), 0);
  for (std::size_t j = 0; j + 2 < n; ++j) ok[j] = curvature(x, y, j, curv[j]);

  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double h = x[i + 1] - x[i];
    double cell = 0.5 * h * (y[i] + y[i + 1]);
    double sum = 0.0;
    int count = 0;
    if (i >= 1 && ok[i - 1]) { sum += curv[i - 1]; ++count; }
    if (i + 2 < n && ok[i]) { sum += curv[i]; ++count; }
    if (count > 0) cell -= h * h * h / 12.0 * (sum / count);
    out[i + 1] = out[i] + cell;
  }
  return out;
}

double integral(std::span<const double> x, std::span<const double> y) {
  if (x.size() < 2) return 0.0;
  return cumulative_integral(x, y).back();
}

}  // namespace mechd
