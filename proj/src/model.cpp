#include "diraccbd/model.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

#include "diraccbd/error.hpp"

namespace diraccbd {

const BlockInstance* Definition::find_block(const std::string& block) const {
  auto it = std::find_if(blocks.begin(), blocks.end(), [&](const BlockInstance& b) { return b.name == block; });
  return it == blocks.end() ? nullptr : &*it;
}

bool Definition::has_input(const std::string& port) const {
  return std::find(inputs.begin(), inputs.end(), port) != inputs.end();
}

bool Definition::has_output(const std::string& port) const {
  return std::find(outputs.begin(), outputs.end(), port) != outputs.end();
}

const Definition* Model::find(const std::string& name) const {
  auto it = std::find_if(definitions.begin(), definitions.end(), [&](const Definition& d) { return d.name == name; });
  return it == definitions.end() ? nullptr : &*it;
}

BlockSpec primitive_spec(const BlockInstance& instance, BlockKind kind) {
  const std::string_view primary = primary_parameter(kind);
  double parameter = 0.0;
  std::size_t arity = 0;
  for (const auto& [name, value] : instance.parameters) {
    if (primary.empty() || name != primary) {
      throw CbdError(ErrorCode::InvalidParameter,
                     "block '" + instance.name + "' of kind " + std::string(to_string(kind)) +
                         " has no parameter '" + name + "'");
    }
    if (!std::isfinite(value)) {
      throw CbdError(ErrorCode::InvalidParameter, "parameter '" + name + "' of '" + instance.name + "' is not finite");
    }
    if (name == "inputs") {
      if (value < 2 || value != std::floor(value) || value > 1e6) {
        throw CbdError(ErrorCode::InvalidParameter,
                       "block '" + instance.name + "' needs an integer input count of at least 2");
      }
      arity = static_cast<std::size_t>(value);
    } else {
      parameter = value;
    }
  }
  return BlockSpec::make(kind, parameter, arity);
}

std::optional<InstancePorts> instance_ports(const Model& model, const BlockInstance& instance) {
  if (auto kind = parse_block_kind(instance.kind)) {
    InstancePorts ports;
    try {
      ports.inputs = primitive_spec(instance, *kind).input_ports();
    } catch (const CbdError&) {
      ports.inputs = BlockSpec{*kind, 0.0, default_arity(*kind)}.input_ports();
    }
    ports.outputs = {std::string(BlockSpec::output_port())};
    return ports;
  }
  if (const Definition* def = model.find(instance.kind)) return InstancePorts{def->inputs, def->outputs};
  return std::nullopt;
}

ResolvedEndpoint resolve_endpoint(const Model& model, const Definition& def, const Endpoint& ep, bool as_source) {
  using Kind = ResolvedEndpoint::Kind;
  auto fail = [&](const std::string& why) -> ResolvedEndpoint {
    throw CbdError(ErrorCode::UnknownPort, "in '" + def.name + "': " + ep.str() + ": " + why);
  };

  const auto block_it = std::find_if(def.blocks.begin(), def.blocks.end(),
                                     [&](const BlockInstance& b) { return b.name == ep.name; });
  if (block_it == def.blocks.end()) {
    if (ep.port) return fail("no block named '" + ep.name + "'");
    if (as_source && def.has_input(ep.name)) return {Kind::DefinitionInput, 0, ep.name};
    if (!as_source && def.has_output(ep.name)) return {Kind::DefinitionOutput, 0, ep.name};
    return fail(as_source ? "not a block or an input port" : "not a block or an output port");
  }

  const auto index = static_cast<std::size_t>(block_it - def.blocks.begin());
  auto ports = instance_ports(model, *block_it);
  if (!ports) return fail("block kind '" + block_it->kind + "' is unknown");
  const auto& candidates = as_source ? ports->outputs : ports->inputs;
  if (!ep.port) {
    if (candidates.size() != 1) {
      return fail("block has " + std::to_string(candidates.size()) + (as_source ? " outputs" : " inputs") +
                  "; name the port explicitly");
    }
    return {as_source ? Kind::BlockOutput : Kind::BlockInput, index, candidates.front()};
  }
  if (std::find(candidates.begin(), candidates.end(), *ep.port) == candidates.end()) {
    return fail(std::string("block has no ") + (as_source ? "output" : "input") + " port '" + *ep.port + "'");
  }
  return {as_source ? Kind::BlockOutput : Kind::BlockInput, index, *ep.port};
}

void check_references(const Model& model, const std::string& top) {
  if (!model.find(top)) throw CbdError(ErrorCode::UnknownDefinition, "no definition named '" + top + "'");
  std::set<std::string> done;
  std::vector<std::string> stack;
  std::function<void(const Definition&)> visit = [&](const Definition& def) {
    if (done.count(def.name)) return;
    stack.push_back(def.name);
    for (const auto& block : def.blocks) {
      if (parse_block_kind(block.kind)) continue;
      const Definition* child = model.find(block.kind);
      if (!child) {
        throw CbdError(ErrorCode::UnknownDefinition,
                       "block '" + block.name + "' in '" + def.name + "' refers to unknown definition '" + block.kind +
                           "'");
      }
      if (std::find(stack.begin(), stack.end(), child->name) != stack.end()) {
        std::string cycle;
        for (const auto& s : stack) cycle += s + " -> ";
        throw CbdError(ErrorCode::RecursiveDefinition, "recursive definition: " + cycle + child->name);
      }
      visit(*child);
    }
    stack.pop_back();
    done.insert(def.name);
  };
  visit(*model.find(top));
}

}  // namespace diraccbd
