#include "diraccbd/blocks.hpp"

#include <array>
#include <cmath>
#include <string>

#include "diraccbd/error.hpp"

namespace diraccbd {

std::string_view to_string(Mode mode) noexcept {
  return mode == Mode::Symbolic ? "symbolic" : "numerical";
}

std::optional<Mode> parse_mode(std::string_view text) noexcept {
  if (text == "symbolic") return Mode::Symbolic;
  if (text == "numerical") return Mode::Numerical;
  return std::nullopt;
}

namespace {

constexpr std::array<std::pair<BlockKind, std::string_view>, 10> kKindNames{{
    {BlockKind::Constant, "Constant"},
    {BlockKind::Adder, "Adder"},
    {BlockKind::Negator, "Negator"},
    {BlockKind::Multiplier, "Multiplier"},
    {BlockKind::Inverter, "Inverter"},
    {BlockKind::Integrator, "Integrator"},
    {BlockKind::Derivative, "Derivative"},
    {BlockKind::Switch, "Switch"},
    {BlockKind::Decision, "Decision"},
    {BlockKind::Delay, "Delay"},
}};

void require_impulse_free(const StepSample& s, ErrorCode code, const char* what) {
  if (s.has_impulses()) throw CbdError(code, what);
}

}  // namespace

std::string_view to_string(BlockKind kind) noexcept {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "?";
}

std::optional<BlockKind> parse_block_kind(std::string_view name) noexcept {
  for (const auto& [k, n] : kKindNames) {
    if (n == name) return k;
  }
  return std::nullopt;
}

std::string_view primary_parameter(BlockKind kind) noexcept {
  switch (kind) {
    case BlockKind::Constant: return "value";
    case BlockKind::Integrator:
    case BlockKind::Derivative:
    case BlockKind::Delay: return "initial";
    case BlockKind::Adder:
    case BlockKind::Multiplier: return "inputs";
    default: return "";
  }
}

std::size_t default_arity(BlockKind kind) noexcept {
  switch (kind) {
    case BlockKind::Constant: return 0;
    case BlockKind::Adder:
    case BlockKind::Multiplier: return 2;
    case BlockKind::Decision: return 3;
    default: return 1;
  }
}

BlockSpec BlockSpec::make(BlockKind kind, double parameter, std::size_t arity) {
  BlockSpec spec{kind, parameter, arity == 0 ? default_arity(kind) : arity};
  const bool nary = kind == BlockKind::Adder || kind == BlockKind::Multiplier;
  if (nary ? spec.arity < 2 : spec.arity != default_arity(kind)) {
    throw CbdError(ErrorCode::BadArity,
                   std::string(to_string(kind)) + " cannot take " + std::to_string(spec.arity) + " inputs");
  }
  return spec;
}

std::vector<std::string> BlockSpec::input_ports() const {
  switch (kind) {
    case BlockKind::Constant: return {};
    case BlockKind::Adder:
    case BlockKind::Multiplier: {
      std::vector<std::string> ports;
      for (std::size_t i = 1; i <= arity; ++i) ports.push_back("in" + std::to_string(i));
      return ports;
    }
    case BlockKind::Switch: return {"C"};
    case BlockKind::Decision: return {"U", "V", "C"};
    default: return {"in"};
  }
}

std::optional<std::size_t> BlockSpec::condition_input() const noexcept {
  if (kind == BlockKind::Switch) return 0;
  if (kind == BlockKind::Decision) return 2;
  return std::nullopt;
}

double heaviside(double x) noexcept { return x >= 0.0 ? 1.0 : 0.0; }

StepSample step_constant(double value) { return StepSample::constant(value); }

StepSample step_adder(std::span<const StepSample> inputs) {
  StepSample acc = inputs.front();
  for (std::size_t i = 1; i < inputs.size(); ++i) acc = add_samples(acc, inputs[i]);
  return acc;
}

StepSample step_negator(const StepSample& input) { return negate_sample(input); }

std::vector<double> backward_derivatives(std::span<const HistoryPoint> points, std::size_t k) {
  if (points.size() < k + 1) {
    throw CbdError(ErrorCode::InsufficientHistory,
                   "order-" + std::to_string(k) + " derivative needs " + std::to_string(k + 1) + " samples, have " +
                       std::to_string(points.size()));
  }
  // Newton divided-difference table over points[0..k]; column j holds f[t_i .. t_{i+j}].
  std::vector<double> column(k + 1);
  for (std::size_t i = 0; i <= k; ++i) column[i] = points[i].value;
  std::vector<double> out{column[0]};
  double factorial = 1.0;
  for (std::size_t j = 1; j <= k; ++j) {
    for (std::size_t i = 0; i + j <= k; ++i) {
      column[i] = (column[i] - column[i + 1]) / (points[i].time - points[i + j].time);
    }
    factorial *= static_cast<double>(j);
    out.push_back(factorial * column[0]);
  }
  return out;
}

BlockStep step_multiplier(std::span<const StepSample> inputs, const BlockState& state, const StepContext& ctx) {
  std::optional<std::size_t> impulsive;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (!inputs[i].has_impulses()) continue;
    if (impulsive) throw CbdError(ErrorCode::BothInputsImpulsive, "product of two impulsive signals is undefined");
    impulsive = i;
  }

  BlockStep result{StepSample{inputs[0].left, inputs[0].right, {}}, state};
  for (std::size_t i = 1; i < inputs.size(); ++i) {
    result.output.left *= inputs[i].left;
    result.output.right *= inputs[i].right;
  }

  if (impulsive) {
    const auto& carrier = inputs[*impulsive];
    const std::size_t order = carrier.impulses.max_order();
    // Smooth factor u: product of every other input, newest point at the left limit.
    std::vector<HistoryPoint> u_points;
    auto smooth_value = [&](auto value_of) {
      double u = 1.0;
      for (std::size_t i = 0; i < inputs.size(); ++i) {
        if (i != *impulsive) u *= value_of(i);
      }
      return u;
    };
    u_points.push_back({ctx.time, smooth_value([&](std::size_t i) { return inputs[i].left; })});
    const std::size_t available = state.history.empty() ? 0 : state.history.front().size();
    for (std::size_t p = 0; p < std::min(available, order); ++p) {
      u_points.push_back({state.history.front()[p].time,
                          smooth_value([&](std::size_t i) { return state.history[i][p].value; })});
    }
    const auto derivs = backward_derivatives(u_points, order);
    result.output.impulses = leibniz_product(derivs, carrier.impulses);
  }

  auto& history = result.state.history;
  history.resize(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    history[i].push_front({ctx.time, inputs[i].right});
    while (history[i].size() > ctx.history_depth) history[i].pop_back();
  }
  ++result.state.steps;
  return result;
}

StepSample step_inverter(const StepSample& input, double div_tolerance) {
  require_impulse_free(input, ErrorCode::ImpulseOnInverter, "inverter input carries impulses");
  if (std::abs(input.left) <= div_tolerance || std::abs(input.right) <= div_tolerance) {
    throw CbdError(ErrorCode::DivisionNearZero, "inverter input within division tolerance of zero");
  }
  return {1.0 / input.left, 1.0 / input.right, {}};
}

BlockStep step_integrator(const StepSample& input, const BlockState& state, double initial, const StepContext& ctx) {
  BlockStep result{{}, state};
  double x = initial;
  if (state.steps > 0 && state.previous_input) {
    // Explicit form: the previous step's input, at the value it held on
    // arrival, times the width of the step just taken.
    x = state.accumulator + state.previous_input->left * ctx.step;
  }
  auto [jump, rest] = extract_order_zero(input.impulses);
  result.output = StepSample{x, x + jump, std::move(rest)};
  result.state.accumulator = x + jump;
  result.state.previous_input = input;
  ++result.state.steps;
  return result;
}

BlockStep step_derivative(const StepSample& input, const BlockState& state, double initial, const StepContext& ctx) {
  BlockStep result{{}, state};
  if (state.steps == 0 || !state.previous_input) {
    result.output = StepSample::constant(initial);
  } else {
    const double base = (input.left - state.previous_input->right) / ctx.step;
    ImpulseVector impulses = shift_orders_up(input.impulses);
    if (ctx.mode == Mode::Symbolic && input.left != input.right) {
      impulses.accumulate(0, input.right - input.left);
    }
    result.output = StepSample{base, base, std::move(impulses)};
  }
  result.state.previous_input = input;
  ++result.state.steps;
  return result;
}

namespace {

/// Side of H the condition's left limit sits on; pre-crossing side at a crossing.
double condition_left(const StepSample& condition, const BlockState& state, const StepContext& ctx) {
  const double now = heaviside(condition.left);
  if (ctx.mode != Mode::Symbolic || state.steps == 0 || !state.previous_input) return now;
  const double before = heaviside(state.previous_input->right);
  return before != now ? before : now;
}

}  // namespace

BlockStep step_switch(const StepSample& condition, const BlockState& state, const StepContext& ctx) {
  require_impulse_free(condition, ErrorCode::ImpulseOnCondition, "switch condition carries impulses");
  BlockStep result{{condition_left(condition, state, ctx), heaviside(condition.right), {}}, state};
  result.state.previous_input = condition;
  ++result.state.steps;
  return result;
}

BlockStep step_decision(const StepSample& u, const StepSample& v, const StepSample& condition,
                        const BlockState& state, const StepContext& ctx) {
  require_impulse_free(condition, ErrorCode::ImpulseOnCondition, "decision condition carries impulses");
  const bool take_u_left = condition_left(condition, state, ctx) != 0.0;
  const bool take_u_right = heaviside(condition.right) != 0.0;
  if (take_u_left != take_u_right && (u.has_impulses() || v.has_impulses())) {
    throw CbdError(ErrorCode::ImpulseAtSwitchingInstant, "decision branches carry impulses at a switching instant");
  }
  const StepSample& l = take_u_left ? u : v;
  const StepSample& r = take_u_right ? u : v;
  BlockStep result{{l.left, r.right, r.impulses}, state};
  result.state.previous_input = condition;
  ++result.state.steps;
  return result;
}

BlockStep step_delay(const StepSample& input, const BlockState& state, double initial) {
  BlockStep result{state.steps == 0 || !state.previous_input ? StepSample::constant(initial) : *state.previous_input,
                   state};
  result.state.previous_input = input;
  ++result.state.steps;
  return result;
}

BlockStep step_block(const BlockSpec& spec, std::span<const StepSample> inputs, const BlockState& state,
                     const StepContext& ctx) {
  if (inputs.size() != spec.input_ports().size()) {
    throw CbdError(ErrorCode::BadArity, std::string(to_string(spec.kind)) + " expects " +
                                            std::to_string(spec.input_ports().size()) + " inputs, got " +
                                            std::to_string(inputs.size()));
  }
  if (ctx.mode == Mode::Numerical) {
    for (const auto& in : inputs) {
      require_impulse_free(in, ErrorCode::ImpulseInNumericalMode, "impulse reached a block in numerical mode");
    }
  }
  auto stateless = [&](StepSample out) {
    BlockStep r{std::move(out), state};
    ++r.state.steps;
    return r;
  };
  switch (spec.kind) {
    case BlockKind::Constant: return stateless(step_constant(spec.parameter));
    case BlockKind::Adder: return stateless(step_adder(inputs));
    case BlockKind::Negator: return stateless(step_negator(inputs[0]));
    case BlockKind::Multiplier: return step_multiplier(inputs, state, ctx);
    case BlockKind::Inverter: return stateless(step_inverter(inputs[0], ctx.div_tolerance));
    case BlockKind::Integrator: return step_integrator(inputs[0], state, spec.parameter, ctx);
    case BlockKind::Derivative: return step_derivative(inputs[0], state, spec.parameter, ctx);
    case BlockKind::Switch: return step_switch(inputs[0], state, ctx);
    case BlockKind::Decision: return step_decision(inputs[0], inputs[1], inputs[2], state, ctx);
    case BlockKind::Delay: return step_delay(inputs[0], state, spec.parameter);
  }
  throw CbdError(ErrorCode::InvalidArgument, "unknown block kind");
}

}  // namespace diraccbd
