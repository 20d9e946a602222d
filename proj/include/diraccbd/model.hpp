#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "diraccbd/blocks.hpp"

namespace diraccbd {

/// `NAME` or `NAME.PORT` as written in a link. An endpoint with only `name` set
/// refers either to a block (its single output or single input) or to a port
/// of the enclosing definition.
struct Endpoint {
  std::string name;
  std::optional<std::string> port;

  [[nodiscard]] std::string str() const { return port ? name + "." + *port : name; }
  friend bool operator==(const Endpoint&, const Endpoint&) = default;
};

struct BlockInstance {
  std::string name;
  std::string kind;  ///< primitive kind name or the name of another definition
  std::map<std::string, double> parameters;

  friend bool operator==(const BlockInstance&, const BlockInstance&) = default;
};

struct Link {
  Endpoint from;
  Endpoint to;

  friend bool operator==(const Link&, const Link&) = default;
};

struct Definition {
  std::string name;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::vector<BlockInstance> blocks;
  std::vector<Link> links;

  [[nodiscard]] const BlockInstance* find_block(const std::string& block) const;
  [[nodiscard]] bool has_input(const std::string& port) const;
  [[nodiscard]] bool has_output(const std::string& port) const;

  friend bool operator==(const Definition&, const Definition&) = default;
};

/// A set of named CBD definitions; blocks refer to primitives or to other definitions.
struct Model {
  std::vector<Definition> definitions;

  [[nodiscard]] const Definition* find(const std::string& name) const;
  friend bool operator==(const Model&, const Model&) = default;
};

/// Turns a primitive instance's parameters into a BlockSpec. Throws
/// InvalidParameter on unknown names or out-of-range values.
BlockSpec primitive_spec(const BlockInstance& instance, BlockKind kind);

/// Input/output port names of a block instance, which may be primitive or composite.
struct InstancePorts {
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
};
std::optional<InstancePorts> instance_ports(const Model& model, const BlockInstance& instance);

/// A link endpoint resolved against its definition.
struct ResolvedEndpoint {
  enum class Kind { DefinitionInput, DefinitionOutput, BlockInput, BlockOutput };
  Kind kind;
  std::size_t block = 0;  ///< index into Definition::blocks for block ports
  std::string port;
};

/// Resolves a link source (`as_source`) or destination. Throws UnknownPort.
ResolvedEndpoint resolve_endpoint(const Model& model, const Definition& def, const Endpoint& ep, bool as_source);

/// Throws UnknownDefinition or RecursiveDefinition for the definitions reachable from `top`.
void check_references(const Model& model, const std::string& top);

}  // namespace diraccbd
