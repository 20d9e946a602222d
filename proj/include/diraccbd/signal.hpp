#pragma once

#include <cstddef>
#include <initializer_list>
#include <map>
#include <span>
#include <utility>

namespace diraccbd {

/// Sparse coefficients a_i of the impulse derivatives delta^(i) present at one
/// instant. Exact zeros are never stored, so `empty()` is a structural test
/// for "carries impulses".
class ImpulseVector {
 public:
  using Order = unsigned;
  using Storage = std::map<Order, double>;

  ImpulseVector() = default;
  ImpulseVector(std::initializer_list<std::pair<const Order, double>> init);

  [[nodiscard]] bool empty() const noexcept { return coeffs_.empty(); }
  [[nodiscard]] std::size_t size() const noexcept { return coeffs_.size(); }

  /// Coefficient at `order`; 0 when absent.
  [[nodiscard]] double at(Order order) const noexcept;

  /// Highest stored order. Requires !empty().
  [[nodiscard]] Order max_order() const noexcept { return coeffs_.rbegin()->first; }

  /// Stores `value` at `order`; storing 0 erases the entry.
  void set(Order order, double value);

  /// Adds `value` to the coefficient at `order`, dropping exact-zero results.
  void accumulate(Order order, double value);

  [[nodiscard]] auto begin() const noexcept { return coeffs_.begin(); }
  [[nodiscard]] auto end() const noexcept { return coeffs_.end(); }

  friend bool operator==(const ImpulseVector&, const ImpulseVector&) = default;

 private:
  Storage coeffs_;
};

/// One signal value at one scheduled instant: the impulse-free left and right
/// limits plus the impulses shared by both limits.
struct StepSample {
  double left = 0.0;
  double right = 0.0;
  ImpulseVector impulses;

  StepSample() = default;
  StepSample(double l, double r, ImpulseVector imp = {}) : left(l), right(r), impulses(std::move(imp)) {}
  static StepSample constant(double value) { return {value, value, {}}; }

  [[nodiscard]] bool is_continuous() const noexcept { return left == right; }
  [[nodiscard]] bool has_impulses() const noexcept { return !impulses.empty(); }

  friend bool operator==(const StepSample&, const StepSample&) = default;
};

StepSample add_samples(const StepSample& a, const StepSample& b);
StepSample negate_sample(const StepSample& a);

/// delta^(i) -> delta^(i+1): the distributional derivative of the impulse part.
ImpulseVector shift_orders_up(const ImpulseVector& v);

struct OrderZeroSplit {
  double jump = 0.0;
  ImpulseVector rest;
};

/// Integrates the impulse part: the order-0 coefficient becomes a jump in the
/// impulse-free part, every other order drops by one.
OrderZeroSplit extract_order_zero(const ImpulseVector& v);

/// Product of a smooth signal u with an impulse vector via the general Leibniz
/// rule. `u_derivatives[k]` is u^(k) at the impulse instant; the contribution of
/// coefficient a_i to order i-k is a_i * C(i,k) * u^(k) * (-1)^k.
/// Throws InsufficientDerivatives when fewer than 1 + max order values are given.
ImpulseVector leibniz_product(std::span<const double> u_derivatives, const ImpulseVector& v);

/// Binomial coefficient as a double; exact for the small arguments used here.
double binomial(unsigned n, unsigned k) noexcept;

}  // namespace diraccbd
