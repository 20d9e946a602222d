#include "diraccbd/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "diraccbd/error.hpp"

namespace diraccbd {

DiffTable finite_difference_table(unsigned n, double h) {
  if (!(std::isfinite(h) && h > 0.0)) throw CbdError(ErrorCode::InvalidArgument, "step must be positive");
  DiffTable table{n, h, {}};
  const std::size_t rows = n + 2;
  table.rows.assign(rows, std::vector<double>(n + 1, 0.0));
  for (std::size_t r = 1; r < rows; ++r) table.rows[r][0] = 1.0;
  for (unsigned k = 0; k < n; ++k) {
    for (std::size_t r = 0; r < rows; ++r) {
      const double previous = r == 0 ? 0.0 : table.rows[r - 1][k];
      table.rows[r][k + 1] = (table.rows[r][k] - previous) / h;
    }
  }
  return table;
}

MagnitudeEstimate max_magnitude(unsigned n, double h, double amplitude) {
  if (n == 0) throw CbdError(ErrorCode::InvalidArgument, "order must be at least 1");
  if (!(std::isfinite(amplitude) && amplitude >= 0.0)) {
    throw CbdError(ErrorCode::InvalidArgument, "amplitude must be non-negative");
  }
  const DiffTable table = finite_difference_table(n, h);
  double peak = 0.0;
  for (const auto& row : table.rows) peak = std::max(peak, std::abs(row[n]));
  const double value = amplitude * peak;
  return {value, !(value <= 1e300)};
}

double printed_max_magnitude(unsigned n, double h, double amplitude) {
  if (!(std::isfinite(h) && h > 0.0)) throw CbdError(ErrorCode::InvalidArgument, "step must be positive");
  return amplitude / std::pow(h, static_cast<double>(n / 2));
}

namespace {

double step_width(const Trace& t, std::size_t k) { return k == 0 ? 0.0 : t.times[k] - t.times[k - 1]; }

}  // namespace

ComparisonReport compare_traces(const Trace& a, const Trace& b, double rel_tol) {
  if (a.times != b.times) {
    std::string why = a.times.size() != b.times.size()
                          ? "traces have " + std::to_string(a.times.size()) + " and " + std::to_string(b.times.size()) +
                                " committed steps"
                          : "committed times differ";
    throw CbdError(ErrorCode::TimeGridMismatch, why);
  }
  if (std::set<std::string>(a.signals.begin(), a.signals.end()) !=
      std::set<std::string>(b.signals.begin(), b.signals.end())) {
    throw CbdError(ErrorCode::InvalidArgument, "traces watch different signals");
  }

  ComparisonReport report;
  report.rel_tol = rel_tol;
  const std::size_t steps = a.times.size();
  for (std::size_t sa = 0; sa < a.signals.size(); ++sa) {
    const std::string& name = a.signals[sa];
    const auto& xs = a.samples[sa];
    const auto& ys = b.of(name);
    std::vector<bool> excluded(steps, false);

    for (std::size_t k = 0; k < steps; ++k) {
      const bool ia = xs[k].has_impulses();
      const bool ib = ys[k].has_impulses();
      if (ia == ib) continue;
      const StepSample& imp = ia ? xs[k] : ys[k];
      const StepSample& other = ia ? ys[k] : xs[k];
      const double h = step_width(a, k);
      const unsigned order = imp.impulses.max_order();
      if (order == 0 && h > 0.0) {
        ImpulseMatch m;
        m.time = a.times[k];
        m.signal = name;
        m.coefficient = imp.impulses.at(0);
        m.step = h;
        m.expected = imp.left + m.coefficient / h;
        m.observed = other.left;
        m.relative_error = std::abs(m.observed - m.expected) / std::abs(m.expected);
        m.matched = m.relative_error <= rel_tol;
        report.impulses.push_back(m);
        excluded[k] = true;
      } else {
        report.delays.push_back({a.times[k], name, order, order * h});
        for (std::size_t j = k; j < steps && j <= k + order; ++j) excluded[j] = true;
      }
    }

    double scale = 0.0;
    for (std::size_t k = 0; k < steps; ++k) {
      if (excluded[k]) continue;
      scale = std::max({scale, std::abs(xs[k].left), std::abs(xs[k].right), std::abs(ys[k].left),
                        std::abs(ys[k].right)});
    }
    SignalDeviation dev{name, 0.0, 0.0, 0.0};
    double worst = 0.0;
    for (std::size_t k = 0; k < steps; ++k) {
      if (excluded[k]) continue;
      const StepSample& x = xs[k];
      const StepSample& y = ys[k];
      double dl, dr;
      if (x.is_continuous() != y.is_continuous()) {
        const StepSample& jump = x.is_continuous() ? y : x;
        const double single = x.is_continuous() ? x.left : y.left;
        dl = dr = std::min(std::abs(single - jump.left), std::abs(single - jump.right));
      } else {
        dl = std::abs(x.left - y.left);
        dr = std::abs(x.right - y.right);
      }
      if (x.has_impulses() && y.has_impulses()) {
        std::set<unsigned> orders;
        for (const auto& [o, c] : x.impulses) orders.insert(o);
        for (const auto& [o, c] : y.impulses) orders.insert(o);
        for (unsigned o : orders) {
          const double ca = x.impulses.at(o), cb = y.impulses.at(o);
          const double rel = std::abs(ca - cb) / std::max(std::abs(ca), std::abs(cb));
          report.max_deviation = std::max(report.max_deviation, rel);
        }
      }
      if (scale > 0.0) {
        dl /= scale;
        dr /= scale;
      }
      dev.left = std::max(dev.left, dl);
      dev.right = std::max(dev.right, dr);
      if (std::max(dl, dr) > worst) {
        worst = std::max(dl, dr);
        dev.worst_time = a.times[k];
      }
    }
    report.max_deviation = std::max({report.max_deviation, dev.left, dev.right});
    report.signals.push_back(dev);
  }

  report.pass = report.max_deviation <= rel_tol &&
                std::all_of(report.impulses.begin(), report.impulses.end(), [](const auto& m) { return m.matched; });
  return report;
}

BallState analytic_bouncing_ball(double y0, double v0, double g, double restitution, double t) {
  if (!(y0 > 0.0 && g > 0.0 && restitution >= 0.0 && restitution <= 1.0 && t >= 0.0) || !std::isfinite(y0) ||
      !std::isfinite(v0) || !std::isfinite(g) || !std::isfinite(t)) {
    throw CbdError(ErrorCode::InvalidArgument, "need y0 > 0, g > 0, 0 <= e <= 1 and t >= 0");
  }
  BallState out;
  double t0 = 0.0, y = y0, v = v0;
  for (std::size_t guard = 0; guard < 10'000'000; ++guard) {
    const double s = (v + std::sqrt(v * v + 2.0 * g * y)) / g;
    const bool resting = y <= 0.0 && s <= 1e-14 * std::max(1.0, t0);
    if (resting) return {0.0, 0.0, out.bounces};
    if (t0 + s > t) {
      const double dt = t - t0;
      out.y = y + v * dt - 0.5 * g * dt * dt;
      out.v = v - g * dt;
      return out;
    }
    t0 += s;
    out.bounces.push_back(t0);
    v = -restitution * (v - g * s);
    y = 0.0;
  }
  return {0.0, 0.0, out.bounces};
}

}  // namespace diraccbd
