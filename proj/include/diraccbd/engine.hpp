#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "diraccbd/blocks.hpp"
#include "diraccbd/graph.hpp"
#include "diraccbd/model.hpp"

namespace diraccbd {

struct SimConfig {
  Mode mode = Mode::Symbolic;
  double step = 1e-3;
  double end = 1.0;
  double zc_tol = 1e-9;
  double min_step = 1e-12;
  std::vector<std::string> watch;  ///< empty: top outputs, or every block when there are none
  unsigned max_order = 16;
  std::size_t history_depth = 4;

  /// Throws InvalidConfig.
  void validate() const;
};

struct ImpulseEvent {
  double time = 0.0;
  std::string signal;
  unsigned order = 0;
  double coefficient = 0.0;

  friend bool operator==(const ImpulseEvent&, const ImpulseEvent&) = default;
};

struct Warning {
  std::string kind;  ///< "StepUnderflow", "OverflowRisk", ...
  double time = 0.0;
  std::string message;
};

struct Trace {
  std::vector<std::string> signals;
  std::vector<double> times;
  std::vector<std::vector<StepSample>> samples;  ///< [signal][step]
  std::vector<ImpulseEvent> impulses;
  std::vector<Warning> warnings;

  [[nodiscard]] std::size_t signal_index(const std::string& name) const;  ///< throws UnknownSignal
  [[nodiscard]] const std::vector<StepSample>& of(const std::string& name) const {
    return samples[signal_index(name)];
  }
};

/// Everything that persists between committed steps.
struct EngineState {
  std::vector<BlockState> blocks;
  std::vector<StepSample> signals;  ///< last committed sample of every block output
  double time = 0.0;
  std::uint64_t steps = 0;
};

EngineState initial_state(const FlatGraph& flat);

/// One step at time `t`, `h` after the previous committed step. Left limits are
/// computed first in schedule order, then impulses and right limits, repeated
/// until the impulse part settles.
/// Errors: block errors tagged with the block path; ImpulseInLoop.
EngineState step(const FlatGraph& flat, const EngineState& state, double t, double h, Mode mode,
                 std::size_t history_depth = 4);

/// Signal indices feeding Switch/Decision conditions.
std::vector<std::size_t> condition_signals(const FlatGraph& flat);

/// Conditions whose Heaviside side changed between `before`'s right limit and
/// `after`'s left limit.
std::vector<std::size_t> crossings(const FlatGraph& flat, const EngineState& before, const EngineState& after);

struct LocatedStep {
  double step = 0.0;
  EngineState state;
  bool crossed = false;
  bool underflow = false;
};

/// Takes a trial step of size `h`. If it produces a crossing, bisects the step
/// size until every crossing condition is within `zc_tol` of zero at the new
/// step, or the bracket is narrower than `min_step`.
LocatedStep locate_crossing(const FlatGraph& flat, const EngineState& committed, double h, const SimConfig& config);

Trace simulate(const FlatGraph& flat, const SimConfig& config);
Trace simulate(const Model& model, const std::string& top, const SimConfig& config);

}  // namespace diraccbd
