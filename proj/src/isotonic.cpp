#include "mechd/isotonic.hpp"

#include <cassert>

namespace mechd {

std::vector<double> isotonic_regression(std::span<const double> y, std::span<const double> w) {
  assert(y.size() == w.size());
  struct Block {
    double mean;
    double weight;
    std::size_t count;
  };
  std::vector<Block> stack;
  stack.reserve(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    Block b{y[i], w[i], 1};
    while (!stack.empty() && stack.back().mean >= b.mean) {
      const Block& p = stack.back();
      const double wt = p.weight + b.weight;
      b = {(p.mean * p.weight + b.mean * b.weight) / wt, wt, p.count + b.count};
      stack.pop_back();
    }
    stack.push_back(b);
  }
  std::vector<double> out;
  out.reserve(y.size());
  for (const auto& b : stack) out.insert(out.end(), b.count, b.mean);
  return out;
}

}  // namespace mechd
