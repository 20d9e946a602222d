#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "diraccbd/signal.hpp"

namespace diraccbd {

enum class Mode { Symbolic, Numerical };

std::string_view to_string(Mode mode) noexcept;
std::optional<Mode> parse_mode(std::string_view text) noexcept;

enum class BlockKind { Constant, Adder, Negator, Multiplier, Inverter, Integrator, Derivative, Switch, Decision, Delay };

std::string_view to_string(BlockKind kind) noexcept;
std::optional<BlockKind> parse_block_kind(std::string_view name) noexcept;

/// Primitive block with its kind-specific parameter.
///  Constant: value. Integrator: y(0). Derivative/Delay: first output.
///  Adder/Multiplier: `arity` inputs (>= 2).
struct BlockSpec {
  BlockKind kind = BlockKind::Constant;
  double parameter = 0.0;
  std::size_t arity = 0;

  static BlockSpec make(BlockKind kind, double parameter = 0.0, std::size_t arity = 0);

  [[nodiscard]] std::vector<std::string> input_ports() const;
  [[nodiscard]] static std::string_view output_port() noexcept { return "out"; }

  /// Integrator and Delay read their data input from the previous step only.
  [[nodiscard]] bool consumes_previous_step() const noexcept {
    return kind == BlockKind::Integrator || kind == BlockKind::Delay;
  }
  /// Index of the condition input for Switch/Decision, if any.
  [[nodiscard]] std::optional<std::size_t> condition_input() const noexcept;
};

/// Name of the primary parameter a kind accepts ("value", "initial", "inputs"),
/// or empty when the kind takes none.
std::string_view primary_parameter(BlockKind kind) noexcept;

/// Default input count for n-ary kinds, 1 or 3 for the fixed ones.
std::size_t default_arity(BlockKind kind) noexcept;

struct HistoryPoint {
  double time = 0.0;
  double value = 0.0;
};

/// Persistent per-block state. Only the fields relevant to the block kind are used.
struct BlockState {
  std::uint64_t steps = 0;
  double accumulator = 0.0;
  std::optional<StepSample> previous_input;
  /// Multiplier: committed right limits of each input, newest first.
  std::vector<std::deque<HistoryPoint>> history;

  friend bool operator==(const BlockState&, const BlockState&) = default;
};

struct StepContext {
  double time = 0.0;
  double step = 0.0;
  Mode mode = Mode::Symbolic;
  std::size_t history_depth = 4;
  double div_tolerance = 1e-300;
};

struct BlockStep {
  StepSample output;
  BlockState state;
};

/// H(x) = 1 for x >= 0.
double heaviside(double x) noexcept;

StepSample step_constant(double value);
StepSample step_adder(std::span<const StepSample> inputs);
StepSample step_negator(const StepSample& input);
BlockStep step_multiplier(std::span<const StepSample> inputs, const BlockState& state, const StepContext& ctx);
StepSample step_inverter(const StepSample& input, double div_tolerance = 1e-300);
BlockStep step_integrator(const StepSample& input, const BlockState& state, double initial, const StepContext& ctx);
BlockStep step_derivative(const StepSample& input, const BlockState& state, double initial, const StepContext& ctx);
/// `state.previous_input` holds the condition committed at the previous step. In
/// symbolic mode a sign change between its right limit and the current left
/// limit is a crossing at this instant: the output's left limit stays on the
/// pre-crossing side.
BlockStep step_switch(const StepSample& condition, const BlockState& state, const StepContext& ctx);
BlockStep step_decision(const StepSample& u, const StepSample& v, const StepSample& condition,
                        const BlockState& state, const StepContext& ctx);
BlockStep step_delay(const StepSample& input, const BlockState& state, double initial);

/// Dispatches on `spec.kind`. In numerical mode rejects impulsive inputs first.
BlockStep step_block(const BlockSpec& spec, std::span<const StepSample> inputs, const BlockState& state,
                     const StepContext& ctx);

/// k-th derivative estimates u^(0..k) at the newest point from backward divided
/// differences; `points` is newest first and must hold at least k+1 entries.
std::vector<double> backward_derivatives(std::span<const HistoryPoint> points, std::size_t k);

}  // namespace diraccbd
