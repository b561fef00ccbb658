#pragma once

#include <span>
#include <vector>

namespace mechd {

/// Weighted least-squares nondecreasing fit (pool-adjacent-violators).
/// Weights must be positive.
std::vector<double> isotonic_regression(std::span<const double> y, std::span<const double> w);

}  // namespace mechd
