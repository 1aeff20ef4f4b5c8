#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "slicenego/rng.hpp"

namespace slicenego::testing {

// Smallest l among the samples with #{x <= l} / N >= alpha, by exhaustive scan.
inline double brute_var(const std::vector<double>& xs, double alpha) {
  const double n = static_cast<double>(xs.size());
  double best = 0.0;
  bool found = false;
  for (const double l : xs) {
    std::size_t count = 0;
    for (const double x : xs) count += x <= l ? 1 : 0;
    if (static_cast<double>(count) / n >= alpha && (!found || l < best)) {
      best = l;
      found = true;
    }
  }
  return best;
}

// Plain average of the strict upper tail, in ascending order.
inline double brute_cvar(const std::vector<double>& xs, double alpha) {
  const double var = brute_var(xs, alpha);
  std::vector<double> tail;
  for (const double x : xs) {
    if (x > var) tail.push_back(x);
  }
  if (tail.empty()) return var;
  std::sort(tail.begin(), tail.end());
  double sum = 0.0;
  for (const double x : tail) sum += x;
  return sum / static_cast<double>(tail.size());
}

// Values on a quarter grid keep every partial sum exact, so the oracle and the
// library must agree bit for bit whatever order they add in.
inline std::vector<double> grid_array(SplitMix64& gen, std::size_t len) {
  std::vector<double> xs(len);
  for (auto& x : xs) x = static_cast<double>(gen() % 41) * 0.25;
  return xs;
}

inline double grid_alpha(SplitMix64& gen) {
  // Mix round fractions (ties with k/N) and arbitrary ones.
  if (gen() % 2 == 0) return static_cast<double>(1 + gen() % 99) / 100.0;
  return 0.001 + 0.998 * uniform01(gen);
}

}  // namespace slicenego::testing
