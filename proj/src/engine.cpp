#include "diraccbd/engine.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "diraccbd/error.hpp"

namespace diraccbd {

void SimConfig::validate() const {
  auto fail = [](const std::string& why) { throw CbdError(ErrorCode::InvalidConfig, why); };
  if (!(std::isfinite(step) && step > 0.0)) fail("step must be a positive finite number");
  if (!(std::isfinite(end) && end > 0.0)) fail("end time must be a positive finite number");
  if (!(std::isfinite(zc_tol) && zc_tol > 0.0)) fail("zero-crossing tolerance must be positive");
  if (!(std::isfinite(min_step) && min_step > 0.0)) fail("minimum step must be positive");
  if (min_step > step) fail("minimum step exceeds the nominal step");
  if (history_depth == 0) fail("history depth must be at least 1");
}

std::size_t Trace::signal_index(const std::string& name) const {
  auto it = std::find(signals.begin(), signals.end(), name);
  if (it == signals.end()) throw CbdError(ErrorCode::UnknownSignal, "trace has no signal '" + name + "'");
  return static_cast<std::size_t>(it - signals.begin());
}

EngineState initial_state(const FlatGraph& flat) {
  EngineState state;
  state.blocks.resize(flat.blocks.size());
  state.signals.resize(flat.blocks.size());
  return state;
}

namespace {

std::vector<StepSample> gather(const FlatBlock& block, const std::vector<StepSample>& values) {
  std::vector<StepSample> inputs;
  inputs.reserve(block.inputs.size());
  for (std::size_t in : block.inputs) inputs.push_back(values[in]);
  return inputs;
}

BlockStep run_block(const FlatBlock& block, const std::vector<StepSample>& values, const BlockState& state,
                    const StepContext& ctx) {
  try {
    return step_block(block.spec, gather(block, values), state, ctx);
  } catch (const CbdError& e) {
    throw e.at_block(block.path);
  }
}

std::vector<double> solve_loop(const FlatGraph& flat, const ScheduleGroup& group, const std::vector<double>& values) {
  try {
    return solve_linear_loop(flat, group, values);
  } catch (const CbdError& e) {
    throw e.at_block(flat.blocks[group.blocks.front()].path);
  }
}

}  // namespace

EngineState step(const FlatGraph& flat, const EngineState& state, double t, double h, Mode mode,
                 std::size_t history_depth) {
  const StepContext ctx{t, h, mode, history_depth};
  const std::size_t n = flat.blocks.size();

  // Phase 1: left limits.
  std::vector<StepSample> current(n);
  for (const auto& group : flat.schedule) {
    if (!group.algebraic_loop) {
      const std::size_t b = group.blocks.front();
      current[b] = StepSample::constant(run_block(flat.blocks[b], current, state.blocks[b], ctx).output.left);
      continue;
    }
    std::vector<double> lefts(n);
    for (std::size_t s = 0; s < n; ++s) lefts[s] = current[s].left;
    const auto solved = solve_loop(flat, group, lefts);
    for (std::size_t i = 0; i < solved.size(); ++i) current[group.blocks[i]] = StepSample::constant(solved[i]);
  }
  std::vector<double> lefts(n);
  for (std::size_t s = 0; s < n; ++s) lefts[s] = current[s].left;

  // Phase 2: impulses and right limits, relaxed until nothing changes.
  EngineState next;
  next.blocks = state.blocks;
  next.time = t;
  next.steps = state.steps + 1;
  const std::size_t max_passes = flat.schedule.size() + 2;
  for (std::size_t pass = 0; pass < max_passes; ++pass) {
    const std::vector<StepSample> before = current;
    std::optional<CbdError> deferred;
    auto defer = [&](const CbdError& e) {
      if (!deferred) deferred = e;
    };
    for (const auto& group : flat.schedule) {
      if (!group.algebraic_loop) {
        const std::size_t b = group.blocks.front();
        try {
          auto out = run_block(flat.blocks[b], current, state.blocks[b], ctx);
          current[b] = std::move(out.output);
          next.blocks[b] = std::move(out.state);
        } catch (const CbdError& e) {
          defer(e);
        }
        continue;
      }
      const FlatBlock* impulsive = nullptr;
      for (std::size_t b : group.blocks) {
        for (std::size_t in : flat.blocks[b].inputs) {
          if (current[in].has_impulses()) impulsive = &flat.blocks[b];
        }
      }
      if (impulsive) {
        defer(CbdError(ErrorCode::ImpulseInLoop, "impulse enters an algebraic loop", impulsive->path));
        continue;
      }
      try {
        std::vector<double> rights(n);
        for (std::size_t s = 0; s < n; ++s) rights[s] = current[s].right;
        const auto solved = solve_loop(flat, group, rights);
        for (std::size_t i = 0; i < solved.size(); ++i) {
          current[group.blocks[i]] = StepSample(lefts[group.blocks[i]], solved[i]);
        }
        for (std::size_t b : group.blocks) {
          next.blocks[b] = run_block(flat.blocks[b], current, state.blocks[b], ctx).state;
        }
      } catch (const CbdError& e) {
        defer(e);
      }
    }
    if (current == before) {
      if (deferred) throw *deferred;
      next.signals = std::move(current);
      return next;
    }
    if (pass + 1 == max_passes && deferred) throw *deferred;
  }
  throw CbdError(ErrorCode::ImpulseInLoop, "impulse feedback did not settle within one step");
}

std::vector<std::size_t> condition_signals(const FlatGraph& flat) {
  std::vector<std::size_t> out;
  for (const auto& block : flat.blocks) {
    if (auto c = block.spec.condition_input()) out.push_back(block.inputs[*c]);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<std::size_t> crossings(const FlatGraph& flat, const EngineState& before, const EngineState& after) {
  std::vector<std::size_t> out;
  if (before.steps == 0) return out;
  for (std::size_t s : condition_signals(flat)) {
    if (heaviside(before.signals[s].right) != heaviside(after.signals[s].left)) out.push_back(s);
  }
  return out;
}

LocatedStep locate_crossing(const FlatGraph& flat, const EngineState& committed, double h, const SimConfig& config) {
  const double t0 = committed.time;
  auto trial = [&](double s) { return step(flat, committed, t0 + s, s, config.mode, config.history_depth); };

  LocatedStep hi{h, trial(h), false, false};
  auto crossed = crossings(flat, committed, hi.state);
  if (crossed.empty()) return hi;
  hi.crossed = true;

  double lo = 0.0;
  while (true) {
    double residual = 0.0;
    for (std::size_t s : crossed) residual = std::max(residual, std::abs(hi.state.signals[s].left));
    if (residual <= config.zc_tol) return hi;
    const double mid = lo + (hi.step - lo) / 2.0;
    if (hi.step - lo <= config.min_step || mid <= lo || mid >= hi.step) {
      hi.underflow = true;
      return hi;
    }
    auto state = trial(mid);
    auto c = crossings(flat, committed, state);
    if (c.empty()) {
      lo = mid;
    } else {
      hi.step = mid;
      hi.state = std::move(state);
      crossed = std::move(c);
    }
  }
}

namespace {

class Recorder {
 public:
  Recorder(const FlatGraph& flat, const SimConfig& config, Trace& trace) : flat_(flat), config_(config), trace_(trace) {
    std::vector<std::string> names = config.watch;
    if (names.empty()) {
      names = flat.top_outputs;
      if (names.empty()) {
        for (const auto& block : flat.blocks) names.push_back(block.path);
      }
    }
    for (const auto& name : names) {
      auto index = flat.find_signal(name);
      if (!index) throw CbdError(ErrorCode::UnknownSignal, "no signal named '" + name + "'");
      trace.signals.push_back(name);
      indices_.push_back(*index);
    }
    trace.samples.resize(names.size());
  }

  void record(const EngineState& state) {
    for (std::size_t b = 0; b < state.signals.size(); ++b) {
      const auto& impulses = state.signals[b].impulses;
      if (!impulses.empty() && impulses.max_order() > config_.max_order) {
        throw CbdError(ErrorCode::MaxOrderExceeded,
                       "impulse of order " + std::to_string(impulses.max_order()) + " exceeds the limit of " +
                           std::to_string(config_.max_order),
                       flat_.blocks[b].path);
      }
    }
    trace_.times.push_back(state.time);
    for (std::size_t w = 0; w < indices_.size(); ++w) {
      const StepSample& sample = state.signals[indices_[w]];
      trace_.samples[w].push_back(sample);
      for (const auto& [order, coefficient] : sample.impulses) {
        trace_.impulses.push_back({state.time, trace_.signals[w], order, coefficient});
      }
      if (!overflow_warned_ && (std::abs(sample.left) > 1e300 || std::abs(sample.right) > 1e300 ||
                                !std::isfinite(sample.left) || !std::isfinite(sample.right))) {
        overflow_warned_ = true;
        trace_.warnings.push_back({"OverflowRisk", state.time, "signal '" + trace_.signals[w] + "' exceeds 1e300"});
      }
    }
  }

 private:
  const FlatGraph& flat_;
  const SimConfig& config_;
  Trace& trace_;
  std::vector<std::size_t> indices_;
  bool overflow_warned_ = false;
};

}  // namespace

Trace simulate(const FlatGraph& flat, const SimConfig& config) {
  config.validate();
  Trace trace;
  Recorder recorder(flat, config, trace);

  EngineState state = step(flat, initial_state(flat), 0.0, config.step, config.mode, config.history_depth);
  recorder.record(state);

  const double slack = 1e-9 * config.step;
  double h = config.step;
  std::size_t streak = 0;
  double streak_start = 0.0;
  while (state.time + h <= config.end + slack) {
    LocatedStep located = locate_crossing(flat, state, h, config);
    if (located.underflow) {
      trace.warnings.push_back({"StepUnderflow", located.state.time,
                                "crossing not within tolerance at the minimum step; committed anyway"});
    }
    if (located.crossed) {
      if (streak++ == 0) streak_start = state.time;
      if (streak > 1000 && located.state.time - streak_start < config.min_step * 1000.0) {
        throw CbdError(ErrorCode::ZenoSuspected, "more than 1000 consecutive events without time advancing");
      }
    } else {
      streak = 0;
    }
    // shortened event steps are repeated once
    h = located.crossed && located.step < h ? located.step : config.step;
    state = std::move(located.state);
    recorder.record(state);
  }
  return trace;
}

Trace simulate(const Model& model, const std::string& top, const SimConfig& config) {
  config.validate();
  return simulate(flatten(model, top), config);
}

}  // namespace diraccbd
