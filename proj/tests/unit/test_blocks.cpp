#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "diraccbd/blocks.hpp"
#include "diraccbd/error.hpp"
#include "support.hpp"

using namespace diraccbd;
using testsupport::kG;

namespace {

StepContext ctx(double t = 0.0, double h = 0.1, Mode mode = Mode::Symbolic) { return {t, h, mode, 4, 1e-300}; }

template <typename F>
ErrorCode error_of(F&& f) {
  try {
    f();
  } catch (const CbdError& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::InvalidArgument;
}

/// Drives a block through a sequence of inputs; returns every output.
std::vector<StepSample> drive(const BlockSpec& spec, const std::vector<std::vector<StepSample>>& inputs, double h,
                              Mode mode = Mode::Symbolic) {
  BlockState state;
  std::vector<StepSample> out;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    auto r = step_block(spec, inputs[k], state, ctx(static_cast<double>(k) * h, h, mode));
    out.push_back(r.output);
    state = r.state;
  }
  return out;
}

/// k-th backward difference quotient at the newest of `u` (oldest first).
double backward_difference(const std::vector<double>& u, std::size_t k, double h) {
  double sum = 0.0;
  const std::size_t n = u.size() - 1;
  for (std::size_t j = 0; j <= k; ++j) {
    sum += (j % 2 == 0 ? 1.0 : -1.0) * static_cast<double>(testsupport::pascal(static_cast<unsigned>(k),
                                                                                 static_cast<unsigned>(j))) *
           u[n - j];
  }
  return sum / std::pow(h, static_cast<double>(k));
}

}  // namespace

TEST_SUITE("blocks") {
  TEST_CASE("block specs") {
    CHECK(BlockSpec::make(BlockKind::Adder).input_ports() == std::vector<std::string>{"in1", "in2"});
    CHECK(BlockSpec::make(BlockKind::Multiplier, 0, 4).input_ports().size() == 4);
    CHECK(BlockSpec::make(BlockKind::Decision).input_ports() == std::vector<std::string>{"U", "V", "C"});
    CHECK(BlockSpec::make(BlockKind::Switch).input_ports() == std::vector<std::string>{"C"});
    CHECK(BlockSpec::make(BlockKind::Integrator).input_ports() == std::vector<std::string>{"in"});
    CHECK(BlockSpec::make(BlockKind::Constant).input_ports().empty());
    CHECK(error_of([] { (void)BlockSpec::make(BlockKind::Adder, 0, 1); }) == ErrorCode::BadArity);
    CHECK(error_of([] { (void)BlockSpec::make(BlockKind::Negator, 0, 2); }) == ErrorCode::BadArity);
    for (auto k : {BlockKind::Constant, BlockKind::Adder, BlockKind::Negator, BlockKind::Multiplier,
                   BlockKind::Inverter, BlockKind::Integrator, BlockKind::Derivative, BlockKind::Switch,
                   BlockKind::Decision, BlockKind::Delay}) {
      CHECK(parse_block_kind(to_string(k)) == k);
    }
    CHECK_FALSE(parse_block_kind("Gain"));
  }

  TEST_CASE("constant") {
    CHECK(step_constant(kG) == StepSample{9.81, 9.81, {}});
    CHECK(step_constant(0) == StepSample{0, 0, {}});
    CHECK(step_constant(-1) == StepSample{-1, -1, {}});
  }

  TEST_CASE("adder and negator") {
    const std::vector<StepSample> in{{1, 2, {{1, 5}}}, {4, 8, {{0, 2}, {1, -1}}}};
    CHECK(step_adder(in) == StepSample{5, 10, {{0, 2}, {1, 4}}});
    const std::vector<StepSample> three{{1, 1, {}}, {2, 2, {}}, {3, 4, {{0, 1}}}};
    CHECK(step_adder(three) == StepSample{6, 7, {{0, 1}}});
    CHECK(step_negator({1, -2, {{0, 3}}}) == StepSample{-1, 2, {{0, -3}}});
  }

  TEST_CASE("multiplier without impulses") {
    const std::vector<StepSample> in{{2, 2, {}}, {3, 3, {}}};
    CHECK(step_multiplier(in, {}, ctx()).output == StepSample{6, 6, {}});
    const std::vector<StepSample> jump{{2, 3, {}}, {5, 7, {}}};
    CHECK(step_multiplier(jump, {}, ctx()).output == StepSample{10, 21, {}});
  }

  TEST_CASE("multiplier samples the smooth factor at its left limit") {
    const double v_minus = -std::sqrt(2.0 * kG * 10.0);
    const std::vector<StepSample> in{{-2.0 * v_minus, -2.0 * v_minus, {}}, {1, 1, {{0, 1}}}};
    const auto out = step_multiplier(in, {}, ctx()).output;
    CHECK(out.impulses.size() == 1);
    CHECK(out.impulses.at(0) == doctest::Approx(28.0143).epsilon(1e-6));
    CHECK(out.impulses.at(0) == -2.0 * v_minus);
    CHECK(out.left == -2.0 * v_minus);

    // u jumps at the impulse instant: only u(t-) enters the coefficient
    const std::vector<StepSample> jumping{{3, 100, {}}, {0, 0, {{0, 2}}}};
    CHECK(step_multiplier(jumping, {}, ctx()).output.impulses == ImpulseVector{{0, 6}});
  }

  TEST_CASE("multiplier differentiates the smooth factor from history") {
    // u(t) = -g t at t = 1.44 reached on a 0.01 grid; V = delta''
    const double h = 0.01;
    BlockState state;
    for (int j = 2; j >= 1; --j) {
      const double t = 1.44 - j * h;
      const std::vector<StepSample> in{StepSample::constant(-kG * t), StepSample::constant(1.0)};
      state = step_multiplier(in, state, ctx(t, h)).state;
    }
    const std::vector<StepSample> in{StepSample::constant(-kG * 1.44), {1, 1, {{2, 20}}}};
    const auto out = step_multiplier(in, state, ctx(1.44, h)).output;
    CHECK(out.impulses.at(2) == doctest::Approx(-28.8 * kG).epsilon(1e-12));
    CHECK(out.impulses.at(1) == doctest::Approx(40 * kG).epsilon(1e-9));
    CHECK(std::abs(out.impulses.at(0)) <= 1e-9 * 40 * kG);
  }

  TEST_CASE("multiplier errors") {
    const std::vector<StepSample> both{{1, 1, {{0, 1}}}, {1, 1, {{0, 1}}}};
    CHECK(error_of([&] { (void)step_multiplier(both, {}, ctx()); }) == ErrorCode::BothInputsImpulsive);
    const std::vector<StepSample> second_order{{1, 1, {}}, {1, 1, {{2, 1}}}};
    CHECK(error_of([&] { (void)step_multiplier(second_order, {}, ctx()); }) == ErrorCode::InsufficientHistory);
  }

  TEST_CASE("property: multiplier matches the termwise expansion over exact grids") {
    std::mt19937_64 rng(23);
    std::uniform_int_distribution<int> value(-50, 50);
    std::uniform_int_distribution<int> coeff(-20, 20);
    std::uniform_int_distribution<unsigned> order(0, 3);
    std::uniform_int_distribution<int> arity(2, 4);
    const double h = 0.25;
    for (int trial = 0; trial < 1000; ++trial) {
      const unsigned n = order(rng);
      const std::size_t inputs = static_cast<std::size_t>(arity(rng));
      const std::size_t carrier = static_cast<std::size_t>(rng() % inputs);
      ImpulseVector v;
      for (unsigned i = 0; i <= n; ++i) v.set(i, coeff(rng));
      if (v.at(n) == 0.0) v.set(n, 1.0);

      // smooth factors: integer samples at t = 0, h, ..., n h
      std::vector<std::vector<double>> samples(inputs, std::vector<double>(n + 1));
      for (auto& s : samples) {
        for (auto& x : s) x = value(rng);
      }
      BlockState state;
      for (unsigned j = 0; j < n; ++j) {
        std::vector<StepSample> in;
        for (std::size_t i = 0; i < inputs; ++i) in.push_back(StepSample::constant(samples[i][j]));
        state = step_multiplier(in, state, ctx(j * h, h)).state;
      }
      std::vector<StepSample> in;
      for (std::size_t i = 0; i < inputs; ++i) {
        in.push_back(i == carrier ? StepSample{1, 1, v} : StepSample::constant(samples[i][n]));
      }
      const auto got = testsupport::dense(step_multiplier(in, state, ctx(n * h, h)).output.impulses, n + 1);

      std::vector<double> u(n + 1, 1.0);
      for (std::size_t i = 0; i < inputs; ++i) {
        if (i == carrier) continue;
        for (unsigned j = 0; j <= n; ++j) u[j] *= samples[i][j];
      }
      std::vector<double> derivs(n + 1);
      for (unsigned k = 0; k <= n; ++k) derivs[k] = backward_difference(u, k, h);
      const auto want = testsupport::brute_force_product(derivs, testsupport::dense(v, n + 1));
      for (unsigned o = 0; o <= n; ++o) CHECK(testsupport::rel_close(got[o], want[o], 1e-12));
    }
  }

  TEST_CASE("inverter") {
    CHECK(step_inverter({2, 2, {}}) == StepSample{0.5, 0.5, {}});
    CHECK(step_inverter({4, -4, {}}) == StepSample{0.25, -0.25, {}});
    CHECK(error_of([] { (void)step_inverter({1, 1, {{0, 3}}}); }) == ErrorCode::ImpulseOnInverter);
    CHECK(error_of([] { (void)step_inverter({0, 1, {}}); }) == ErrorCode::DivisionNearZero);
    CHECK(error_of([] { (void)step_inverter({1e-301, 1, {}}); }) == ErrorCode::DivisionNearZero);
  }

  TEST_CASE("integrator") {
    const auto spec = BlockSpec::make(BlockKind::Integrator, 0.0);
    const auto out = drive(spec, {{StepSample::constant(1)}, {StepSample::constant(1)}}, 0.1);
    CHECK(out[0] == StepSample{0, 0, {}});
    CHECK(out[1] == StepSample{0.1, 0.1, {}});

    const double v_minus = -std::sqrt(2.0 * kG * 10.0);
    BlockState s;
    s.steps = 1;
    s.accumulator = v_minus;
    s.previous_input = StepSample::constant(0.0);
    const auto bounce = step_integrator({0, 0, {{0, -2.0 * v_minus}}}, s, 0.0, ctx());
    CHECK(bounce.output == StepSample{v_minus, -v_minus, {}});
    CHECK(bounce.state.accumulator == -v_minus);

    const auto lowered = step_integrator({0, 0, {{1, 5}}}, s, 0.0, ctx());
    CHECK(lowered.output.impulses == ImpulseVector{{0, 5}});
    CHECK(lowered.output.left == lowered.output.right);
  }

  TEST_CASE("integrator consumes the previous input's left limit") {
    const auto spec = BlockSpec::make(BlockKind::Integrator, 0.0);
    const auto out = drive(spec, {{{1, 3, {}}}, {StepSample::constant(0)}}, 0.5);
    CHECK(out[1].left == 0.5);
  }

  TEST_CASE("derivative") {
    const auto spec = BlockSpec::make(BlockKind::Derivative, 7.0);
    const auto out = drive(spec, {{StepSample::constant(0)}, {StepSample::constant(0.3)}}, 0.1);
    CHECK(out[0] == StepSample{7, 7, {}});
    CHECK(out[1].left == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(out[1].is_continuous());
    CHECK_FALSE(out[1].has_impulses());

    const double v0 = 3.0, td = 0.2;
    const double pre = v0 - kG * td;
    const auto jump = drive(spec, {{StepSample::constant(pre)}, {{pre, -pre, {}}}}, 0.1);
    CHECK(jump[1].impulses == ImpulseVector{{0, -2 * pre}});
    CHECK(jump[1].left == 0.0);

    const auto numeric = drive(spec, {{StepSample::constant(pre)}, {{pre, -pre, {}}}}, 0.1, Mode::Numerical);
    CHECK_FALSE(numeric[1].has_impulses());

    const auto raised = drive(spec, {{StepSample::constant(0)}, {{0, 0, {{0, 2}}}}}, 0.1);
    CHECK(raised[1].impulses == ImpulseVector{{1, 2}});
  }

  TEST_CASE("switch") {
    CHECK(step_switch({-1, -1, {}}, {}, ctx()).output == StepSample{0, 0, {}});
    CHECK(step_switch({0, 0, {}}, {}, ctx()).output == StepSample{1, 1, {}});
    CHECK(step_switch({-0.5, 0.5, {}}, {}, ctx()).output == StepSample{0, 1, {}});
    CHECK(error_of([] { (void)step_switch({1, 1, {{0, 1}}}, {}, ctx()); }) == ErrorCode::ImpulseOnCondition);
  }

  TEST_CASE("switch keeps the pre-crossing side as left limit in symbolic mode") {
    BlockState s;
    s.steps = 1;
    s.previous_input = StepSample::constant(-1.0);
    CHECK(step_switch(StepSample::constant(1e-10), s, ctx()).output == StepSample{0, 1, {}});
    CHECK(step_switch(StepSample::constant(1e-10), s, ctx(0, 0.1, Mode::Numerical)).output == StepSample{1, 1, {}});
    CHECK(step_switch(StepSample::constant(-2.0), s, ctx()).output == StepSample{0, 0, {}});
  }

  TEST_CASE("decision") {
    const StepSample u{1, 1, {}}, v{2, 2, {}};
    CHECK(step_decision(u, v, {3, 3, {}}, {}, ctx()).output == StepSample{1, 1, {}});
    CHECK(step_decision(u, v, {-1, 1, {}}, {}, ctx()).output == StepSample{2, 1, {}});
    CHECK(error_of([&] { (void)step_decision({1, 1, {{0, 1}}}, v, {-1, 1, {}}, {}, ctx()); }) ==
          ErrorCode::ImpulseAtSwitchingInstant);
    CHECK(error_of([&] { (void)step_decision(u, v, {1, 1, {{0, 1}}}, {}, ctx()); }) == ErrorCode::ImpulseOnCondition);
    CHECK(step_decision({1, 1, {{0, 4}}}, v, {1, 1, {}}, {}, ctx()).output == StepSample{1, 1, {{0, 4}}});
  }

  TEST_CASE("delay") {
    const auto spec = BlockSpec::make(BlockKind::Delay, 0.0);
    const StepSample x{3, 4, {{0, 1}}};
    const auto out = drive(spec, {{x}, {StepSample::constant(5)}}, 0.1);
    CHECK(out[0] == StepSample{0, 0, {}});
    CHECK(out[1] == x);

    // two chained delays shift by two steps
    BlockState a, b;
    std::vector<StepSample> seen;
    for (int k = 0; k < 5; ++k) {
      auto ra = step_delay(StepSample::constant(k), a, 0.0);
      auto rb = step_delay(ra.output, b, 0.0);
      a = ra.state;
      b = rb.state;
      seen.push_back(rb.output);
    }
    CHECK(seen[2] == StepSample::constant(0));
    CHECK(seen[3] == StepSample::constant(1));
    CHECK(seen[4] == StepSample::constant(2));
  }

  TEST_CASE("numerical mode rejects impulses") {
    const auto spec = BlockSpec::make(BlockKind::Negator);
    const std::vector<StepSample> in{{0, 0, {{0, 1}}}};
    CHECK(error_of([&] { (void)step_block(spec, in, {}, ctx(0, 0.1, Mode::Numerical)); }) ==
          ErrorCode::ImpulseInNumericalMode);
  }

  TEST_CASE("property: Derivative then Integrator reproduces a one-jump stream") {
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> d(-10.0, 10.0);
    for (int trial = 0; trial < 200; ++trial) {
      const double a = d(rng), b = d(rng);
      const std::size_t at = 1 + rng() % 8;
      const auto ds = BlockSpec::make(BlockKind::Derivative, 0.0);
      const auto is = BlockSpec::make(BlockKind::Integrator, a);
      BlockState dst, ist;
      for (std::size_t k = 0; k < 12; ++k) {
        const StepSample in = k < at ? StepSample::constant(a) : k == at ? StepSample{a, b, {}} : StepSample::constant(b);
        const auto c = ctx(0.1 * static_cast<double>(k), 0.1);
        auto dr = step_block(ds, std::vector<StepSample>{in}, dst, c);
        auto ir = step_block(is, std::vector<StepSample>{dr.output}, ist, c);
        dst = dr.state;
        ist = ir.state;
        // a + (b - a) rounds once
        const double ulps = 2.0 * std::numeric_limits<double>::epsilon() * (std::abs(a) + std::abs(b));
        CHECK(std::abs(ir.output.right - in.right) <= ulps);
        if (k >= at) CHECK(std::abs(ir.output.left - (k == at ? a : b)) <= ulps);
      }
    }
  }

  TEST_CASE("integrator of a unit impulse is a unit step") {
    const auto spec = BlockSpec::make(BlockKind::Integrator, 0.0);
    const auto out = drive(spec,
                           {{StepSample::constant(0)},
                            {StepSample::constant(0)},
                            {{0, 0, {{0, 1}}}},
                            {StepSample::constant(0)},
                            {StepSample::constant(0)}},
                           0.1);
    CHECK(out[1] == StepSample{0, 0, {}});
    CHECK(out[2] == StepSample{0, 1, {}});
    CHECK(out[3] == StepSample{1, 1, {}});
    CHECK(out[4] == StepSample{1, 1, {}});
  }

  TEST_CASE("property: impulse-free inputs give identical values in both modes") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> d(-5.0, 5.0);
    const std::vector<BlockSpec> specs{
        BlockSpec::make(BlockKind::Constant, 1.5),  BlockSpec::make(BlockKind::Adder, 0, 3),
        BlockSpec::make(BlockKind::Negator),        BlockSpec::make(BlockKind::Multiplier, 0, 2),
        BlockSpec::make(BlockKind::Inverter),       BlockSpec::make(BlockKind::Integrator, 0.5),
        BlockSpec::make(BlockKind::Derivative, 2.0), BlockSpec::make(BlockKind::Switch),
        BlockSpec::make(BlockKind::Decision),       BlockSpec::make(BlockKind::Delay, -1.0)};
    for (const auto& spec : specs) {
      BlockState sym, num;
      std::optional<StepSample> previous_condition;
      for (int k = 0; k < 200; ++k) {
        std::vector<StepSample> in;
        for (std::size_t p = 0; p < spec.input_ports().size(); ++p) {
          const double l = d(rng);
          in.push_back(rng() % 4 == 0 ? StepSample{l, d(rng), {}} : StepSample::constant(l));
        }
        const auto c = ctx(0.01 * k, 0.01);
        auto rs = step_block(spec, in, sym, c);
        auto rn = step_block(spec, in, num, {c.time, c.step, Mode::Numerical});
        bool crossing = false;
        if (auto ci = spec.condition_input()) {
          crossing = previous_condition && heaviside(previous_condition->right) != heaviside(in[*ci].left);
          previous_condition = in[*ci];
        }
        if (!crossing) {
          CHECK(rs.output.left == rn.output.left);
          CHECK(rs.output.right == rn.output.right);
        }
        sym = rs.state;
        num = rn.state;
      }
    }
  }
}
