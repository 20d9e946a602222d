#include "diraccbd/signal.hpp"

#include <string>

#include "diraccbd/error.hpp"

namespace diraccbd {

ImpulseVector::ImpulseVector(std::initializer_list<std::pair<const Order, double>> init) {
  for (const auto& [order, value] : init) accumulate(order, value);
}

double ImpulseVector::at(Order order) const noexcept {
  auto it = coeffs_.find(order);
  return it == coeffs_.end() ? 0.0 : it->second;
}

void ImpulseVector::set(Order order, double value) {
  if (value == 0.0) {
    coeffs_.erase(order);
  } else {
    coeffs_[order] = value;
  }
}

void ImpulseVector::accumulate(Order order, double value) {
  auto it = coeffs_.find(order);
  if (it == coeffs_.end()) {
    if (value != 0.0) coeffs_.emplace(order, value);
    return;
  }
  it->second += value;
  if (it->second == 0.0) coeffs_.erase(it);
}

StepSample add_samples(const StepSample& a, const StepSample& b) {
  StepSample out{a.left + b.left, a.right + b.right, a.impulses};
  for (const auto& [order, value] : b.impulses) out.impulses.accumulate(order, value);
  return out;
}

StepSample negate_sample(const StepSample& a) {
  StepSample out{-a.left, -a.right, {}};
  for (const auto& [order, value] : a.impulses) out.impulses.set(order, -value);
  return out;
}

ImpulseVector shift_orders_up(const ImpulseVector& v) {
  ImpulseVector out;
  for (const auto& [order, value] : v) out.set(order + 1, value);
  return out;
}

OrderZeroSplit extract_order_zero(const ImpulseVector& v) {
  OrderZeroSplit out;
  for (const auto& [order, value] : v) {
    if (order == 0) {
      out.jump = value;
    } else {
      out.rest.set(order - 1, value);
    }
  }
  return out;
}

double binomial(unsigned n, unsigned k) noexcept {
  if (k > n) return 0.0;
  if (k > n - k) k = n - k;
  double result = 1.0;
  for (unsigned j = 1; j <= k; ++j) {
    result = result * static_cast<double>(n - k + j) / static_cast<double>(j);
  }
  return result;
}

ImpulseVector leibniz_product(std::span<const double> u_derivatives, const ImpulseVector& v) {
  if (v.empty()) return {};
  const auto needed = static_cast<std::size_t>(v.max_order()) + 1;
  if (u_derivatives.size() < needed) {
    throw CbdError(ErrorCode::InsufficientDerivatives,
                   "need " + std::to_string(needed) + " derivative values of the smooth factor, got " +
                       std::to_string(u_derivatives.size()));
  }
  ImpulseVector out;
  for (const auto& [order, coeff] : v) {
    for (unsigned k = 0; k <= order; ++k) {
      const double sign = (k % 2 == 0) ? 1.0 : -1.0;
      out.accumulate(order - k, coeff * binomial(order, k) * u_derivatives[k] * sign);
    }
  }
  return out;
}

}  // namespace diraccbd
