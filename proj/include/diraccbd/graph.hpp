#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "diraccbd/blocks.hpp"
#include "diraccbd/model.hpp"

namespace diraccbd {

struct FlatBlock {
  std::string path;                 ///< slash-joined instance path, e.g. "ball/integrator_v"
  BlockSpec spec;
  std::vector<std::size_t> inputs;  ///< driving block index per input port
};

/// A group of the computation schedule: one block, or a strongly connected
/// component of current-step dependencies (an algebraic loop).
struct ScheduleGroup {
  std::vector<std::size_t> blocks;
  bool algebraic_loop = false;
};

using Schedule = std::vector<ScheduleGroup>;

/// Primitive-only view of a model. Each block output is one signal, indexed by
/// block index. Composite output ports are kept as aliases ("ball.y"); the top
/// definition's outputs are aliased by their bare port names.
struct FlatGraph {
  std::vector<FlatBlock> blocks;
  std::map<std::string, std::size_t> aliases;
  std::vector<std::string> top_outputs;
  Schedule schedule;

  /// Block path or alias -> signal index.
  [[nodiscard]] std::optional<std::size_t> find_signal(const std::string& name) const;
};

/// Replaces composite blocks by their definitions and resolves every input to
/// its driving primitive. Also computes the schedule.
/// Errors: UnknownDefinition, RecursiveDefinition, UnconnectedInput, MultipleDrivers.
FlatGraph flatten(const Model& model, const std::string& top);

/// Current-step dependency edges, excluding the data input of Integrator and
/// Delay. `deps[b]` lists the blocks `b` reads in the same step.
std::vector<std::vector<std::size_t>> current_step_dependencies(const FlatGraph& flat);

/// Strongly connected components of the dependency graph in topological order;
/// ties are broken by lowest block index so the schedule follows declaration order.
Schedule dependency_sort(const FlatGraph& flat);

/// Solves the linear system an algebraic loop forms for one limit.
/// `values[s]` holds the already known value of every signal outside the group.
/// Returns the output of each block of the group, in group order.
/// Errors: NonlinearLoop, SingularLoop.
std::vector<double> solve_linear_loop(const FlatGraph& flat, const ScheduleGroup& group,
                                      std::span<const double> values);

}  // namespace diraccbd
