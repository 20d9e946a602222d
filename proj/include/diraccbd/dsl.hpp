#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "diraccbd/error.hpp"
#include "diraccbd/model.hpp"

namespace diraccbd::dsl {

/// 1-based position in the source text.
struct Span {
  std::size_t line = 1;
  std::size_t column = 1;

  // spans never take part in structural comparison
  friend bool operator==(const Span&, const Span&) { return true; }
};

struct SourcePort {
  bool input = true;
  std::string name;
  Span span;
  friend bool operator==(const SourcePort&, const SourcePort&) = default;
};

struct SourceArg {
  std::optional<std::string> name;  ///< empty for a positional argument
  double value = 0.0;
  Span span;
  friend bool operator==(const SourceArg&, const SourceArg&) = default;
};

struct SourceBlock {
  std::string name;
  std::string kind;
  std::vector<SourceArg> args;
  Span span;
  Span kind_span;
  friend bool operator==(const SourceBlock&, const SourceBlock&) = default;
};

struct SourceEndpoint {
  std::string name;
  std::optional<std::string> port;
  Span span;
  friend bool operator==(const SourceEndpoint&, const SourceEndpoint&) = default;
};

struct SourceLink {
  SourceEndpoint from;
  SourceEndpoint to;
  Span span;
  friend bool operator==(const SourceLink&, const SourceLink&) = default;
};

struct SourceDefinition {
  std::string name;
  std::vector<SourcePort> ports;
  std::vector<SourceBlock> blocks;
  std::vector<SourceLink> links;
  Span span;
  friend bool operator==(const SourceDefinition&, const SourceDefinition&) = default;
};

struct SourceModel {
  std::vector<SourceDefinition> definitions;
  friend bool operator==(const SourceModel&, const SourceModel&) = default;
};

struct Diagnostic {
  ErrorCode code = ErrorCode::SyntaxError;
  std::string message;
  Span span;
  std::vector<std::string> expected;  ///< syntax errors only

  /// "line:column: Code: message"
  [[nodiscard]] std::string str() const;
};

struct ParseResult {
  SourceModel model;
  std::vector<Diagnostic> diagnostics;  ///< at most one syntax error; parsing stops there
  [[nodiscard]] bool ok() const noexcept { return diagnostics.empty(); }
};

ParseResult parse(std::string_view text);

/// Canonical text form; parse(print(m)) reproduces m up to spans.
std::string print(const SourceModel& model);

struct ValidationResult {
  std::optional<Model> model;
  std::vector<Diagnostic> diagnostics;  ///< every violation found, in source order per check
};

ValidationResult validate(const SourceModel& source);

/// parse + validate. Throws CbdError carrying the first diagnostic's code and
/// all diagnostics in the message.
Model load_model(std::string_view text);
Model load_model_file(const std::string& path);

}  // namespace diraccbd::dsl
