#pragma once

#include <vector>

namespace mechd {

/// Direct mechanism sampled on a set of type nodes. U is the equilibrium
/// utility profile and U_floor its value at the lowest node.
struct Mechanism {
  std::vector<double> theta;
  std::vector<double> q;
  std::vector<double> t;
  std::vector<double> U;
  double U_floor = 0.0;

  std::size_t size() const { return theta.size(); }
};

}  // namespace mechd
