#pragma once

#include <string>
#include <vector>

#include "diraccbd/engine.hpp"

namespace diraccbd {

/// Backward-difference cascade applied to a unit Heaviside step at offset 0.
/// Rows are step offsets m = -1..n, columns derivative orders 0..n.
struct DiffTable {
  unsigned order = 0;
  double step = 0.0;
  std::vector<std::vector<double>> rows;  ///< rows[m + 1][k]

  [[nodiscard]] double at(int m, unsigned k) const { return rows.at(static_cast<std::size_t>(m + 1)).at(k); }
  [[nodiscard]] int first_offset() const noexcept { return -1; }
  [[nodiscard]] int last_offset() const noexcept { return static_cast<int>(order); }
};

/// Errors: InvalidArgument when h is not positive and finite.
DiffTable finite_difference_table(unsigned n, double h);

struct MagnitudeEstimate {
  double value = 0.0;
  bool overflow_risk = false;  ///< value above 1e300
};

/// D times the largest magnitude in the order-n column of the table.
/// Errors: InvalidArgument for n == 0, h <= 0 or D < 0.
MagnitudeEstimate max_magnitude(unsigned n, double h, double amplitude);

/// D / h^k with k = floor(n/2), reported next to the table scan for comparison.
double printed_max_magnitude(unsigned n, double h, double amplitude);

struct SignalDeviation {
  std::string signal;
  double left = 0.0;   ///< max |a - b| over left limits, relative to the signal's magnitude
  double right = 0.0;
  double worst_time = 0.0;
};

struct ImpulseMatch {
  double time = 0.0;
  std::string signal;
  double coefficient = 0.0;
  double step = 0.0;      ///< h*, width of the step ending at `time`
  double expected = 0.0;  ///< left limit plus coefficient / h*
  double observed = 0.0;
  double relative_error = 0.0;
  bool matched = false;
};

struct DelayFinding {
  double time = 0.0;
  std::string signal;
  unsigned order = 0;
  double delay = 0.0;  ///< order * h*
};

struct ComparisonReport {
  double rel_tol = 0.0;
  std::vector<SignalDeviation> signals;
  std::vector<ImpulseMatch> impulses;
  std::vector<DelayFinding> delays;
  double max_deviation = 0.0;
  bool pass = false;
};

/// Aligns two traces step by step. Where exactly one trace carries impulses,
/// order-0 impulses are matched against the other trace's value at that step
/// and higher orders are reported as delays, with the affected window left out
/// of the limit comparison. Where one trace jumps and the other is single
/// valued, the single value may match either limit.
/// Errors: TimeGridMismatch; InvalidArgument when the signal sets differ.
ComparisonReport compare_traces(const Trace& a, const Trace& b, double rel_tol);

struct BallState {
  double y = 0.0;
  double v = 0.0;
  std::vector<double> bounces;  ///< contact times up to t
};

/// Piecewise parabolic flight with v+ = -e * v- at each contact.
/// Errors: InvalidArgument unless y0 > 0, g > 0, 0 <= e <= 1, t >= 0.
BallState analytic_bouncing_ball(double y0, double v0, double g, double restitution, double t);

}  // namespace diraccbd
