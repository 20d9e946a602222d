#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "diraccbd/signal.hpp"

namespace testsupport {

inline constexpr double kG = 9.81;

inline bool rel_close(double a, double b, double tol) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? true : std::abs(a - b) <= tol * scale;
}

inline diraccbd::ImpulseVector random_impulses(std::mt19937_64& rng, unsigned max_order, double lo = -5.0,
                                               double hi = 5.0) {
  std::uniform_real_distribution<double> value(lo, hi);
  std::bernoulli_distribution present(0.6);
  diraccbd::ImpulseVector v;
  for (unsigned i = 0; i <= max_order; ++i) {
    if (present(rng)) v.set(i, value(rng));
  }
  return v;
}

inline diraccbd::StepSample random_sample(std::mt19937_64& rng, unsigned max_order = 3) {
  std::uniform_real_distribution<double> value(-100.0, 100.0);
  return {value(rng), value(rng), random_impulses(rng, max_order)};
}

/// Binomial coefficient from Pascal's triangle, independent of the library's.
inline long long pascal(unsigned n, unsigned k) {
  if (k > n) return 0;
  std::vector<long long> row{1};
  for (unsigned i = 1; i <= n; ++i) {
    std::vector<long long> next(i + 1, 1);
    for (unsigned j = 1; j < i; ++j) next[j] = row[j - 1] + row[j];
    row = std::move(next);
  }
  return row[k];
}

/// Dense termwise expansion of sum_i a_i sum_k C(i,k) u^(k) (-1)^k delta^(i-k).
inline std::vector<double> brute_force_product(const std::vector<double>& u, const std::vector<double>& a) {
  std::vector<double> out(a.size(), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t k = 0; k <= i; ++k) {
      const double term = a[i] * static_cast<double>(pascal(static_cast<unsigned>(i), static_cast<unsigned>(k))) *
                          u[k] * (k % 2 == 0 ? 1.0 : -1.0);
      out[i - k] += term;
    }
  }
  return out;
}

inline std::vector<double> dense(const diraccbd::ImpulseVector& v, std::size_t size) {
  std::vector<double> out(size, 0.0);
  for (const auto& [order, c] : v) {
    if (order >= out.size()) out.resize(order + 1, 0.0);
    out[order] = c;
  }
  return out;
}

}  // namespace testsupport
