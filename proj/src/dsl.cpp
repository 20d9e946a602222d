#include "diraccbd/dsl.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace diraccbd::dsl {

std::string Diagnostic::str() const {
  return std::to_string(span.line) + ":" + std::to_string(span.column) + ": " + std::string(to_string(code)) + ": " +
         message;
}

namespace {

enum class Tok { Ident, Number, LParen, RParen, LBrace, RBrace, Semi, Comma, Dot, Arrow, Equals, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  double number = 0.0;
  Span span;
};

struct SyntaxFailure {
  Diagnostic diagnostic;
};

std::string describe(const Token& t) {
  switch (t.kind) {
    case Tok::End: return "end of input";
    case Tok::Ident: return "'" + t.text + "'";
    case Tok::Number: return "number " + t.text;
    default: return "'" + t.text + "'";
  }
}

bool ident_start(char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_'; }
bool ident_char(char c) { return ident_start(c) || (c >= '0' && c <= '9'); }
bool digit(char c) { return c >= '0' && c <= '9'; }

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  Token next() {
    skip_blank();
    Token t;
    t.span = {line_, column_};
    if (pos_ >= text_.size()) return t;
    const char c = text_[pos_];
    if (ident_start(c)) {
      std::size_t end = pos_;
      while (end < text_.size() && ident_char(text_[end])) ++end;
      t.kind = Tok::Ident;
      t.text = std::string(text_.substr(pos_, end - pos_));
      advance(end - pos_);
      return t;
    }
    if (c == '-' && peek(1) == '>') {
      t.kind = Tok::Arrow;
      t.text = "->";
      advance(2);
      return t;
    }
    if (digit(c) || ((c == '-' || c == '.') && (digit(peek(1)) || (peek(1) == '.' && digit(peek(2)))))) {
      return number(t);
    }
    static const std::map<char, Tok> punct{{'(', Tok::LParen}, {')', Tok::RParen}, {'{', Tok::LBrace},
                                           {'}', Tok::RBrace}, {';', Tok::Semi},   {',', Tok::Comma},
                                           {'.', Tok::Dot},    {'=', Tok::Equals}};
    if (auto it = punct.find(c); it != punct.end()) {
      t.kind = it->second;
      t.text = std::string(1, c);
      advance(1);
      return t;
    }
    std::string shown;
    if (static_cast<unsigned char>(c) >= 0x20 && static_cast<unsigned char>(c) < 0x7f) {
      shown = std::string("'") + c + "'";
    } else {
      char buf[8];
      std::snprintf(buf, sizeof buf, "0x%02X", static_cast<unsigned char>(c));
      shown = buf;
    }
    throw SyntaxFailure{{ErrorCode::SyntaxError, "unexpected character " + shown, t.span, {}}};
  }

 private:
  char peek(std::size_t ahead) const { return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0'; }

  void advance(std::size_t n) {
    for (std::size_t i = 0; i < n && pos_ < text_.size(); ++i, ++pos_) {
      if (text_[pos_] == '\n') {
        ++line_;
        column_ = 1;
      } else {
        ++column_;
      }
    }
  }

  void skip_blank() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance(1);
      } else if (c == '/' && peek(1) == '/') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance(1);
      } else {
        break;
      }
    }
  }

  Token number(Token t) {
    std::size_t end = pos_;
    if (text_[end] == '-') ++end;
    while (end < text_.size() && digit(text_[end])) ++end;
    if (end < text_.size() && text_[end] == '.') {
      ++end;
      while (end < text_.size() && digit(text_[end])) ++end;
    }
    if (end < text_.size() && (text_[end] == 'e' || text_[end] == 'E')) {
      std::size_t exp = end + 1;
      if (exp < text_.size() && (text_[exp] == '+' || text_[exp] == '-')) ++exp;
      if (exp < text_.size() && digit(text_[exp])) {
        end = exp;
        while (end < text_.size() && digit(text_[end])) ++end;
      }
    }
    t.kind = Tok::Number;
    t.text = std::string(text_.substr(pos_, end - pos_));
    std::string normalized = t.text;
    if (normalized.size() > 1 && normalized[0] == '-' && normalized[1] == '.') normalized.insert(1, "0");
    if (!normalized.empty() && normalized[0] == '.') normalized.insert(0, "0");
    auto [ptr, ec] = std::from_chars(normalized.data(), normalized.data() + normalized.size(), t.number);
    if (ec == std::errc::result_out_of_range || !std::isfinite(t.number)) {
      throw SyntaxFailure{{ErrorCode::SyntaxError, "number " + t.text + " is out of range", t.span, {}}};
    }
    if (ec != std::errc() || ptr != normalized.data() + normalized.size()) {
      throw SyntaxFailure{{ErrorCode::SyntaxError, "malformed number " + t.text, t.span, {}}};
    }
    advance(end - pos_);
    return t;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t column_ = 1;
};

const std::set<std::string>& keywords() {
  static const std::set<std::string> k{"cbd", "block", "in", "out"};
  return k;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : lexer_(text) { current_ = lexer_.next(); }

  SourceModel model() {
    SourceModel m;
    while (current_.kind != Tok::End) m.definitions.push_back(definition());
    return m;
  }

 private:
  [[noreturn]] void fail(std::vector<std::string> expected) {
    std::string message = "expected ";
    for (std::size_t i = 0; i < expected.size(); ++i) {
      if (i > 0) message += i + 1 == expected.size() ? " or " : ", ";
      message += expected[i];
    }
    message += ", found " + describe(current_);
    throw SyntaxFailure{{ErrorCode::SyntaxError, message, current_.span, std::move(expected)}};
  }

  Token take() {
    Token t = std::move(current_);
    current_ = lexer_.next();
    return t;
  }

  bool at(Tok kind) const { return current_.kind == kind; }
  bool at_word(const char* word) const { return current_.kind == Tok::Ident && current_.text == word; }

  Token expect(Tok kind, const char* shown) {
    if (!at(kind)) fail({shown});
    return take();
  }

  void expect_word(const char* word) {
    if (!at_word(word)) fail({std::string("'") + word + "'"});
    take();
  }

  Token name() {
    if (!at(Tok::Ident) || keywords().count(current_.text)) fail({"NAME"});
    return take();
  }

  SourceDefinition definition() {
    SourceDefinition def;
    def.span = current_.span;
    expect_word("cbd");
    def.name = name().text;
    expect(Tok::LParen, "'('");
    if (!at(Tok::RParen)) {
      port_group(def);
      while (at(Tok::Semi)) {
        take();
        port_group(def);
      }
    }
    if (!at(Tok::RParen)) fail({"';'", "','", "')'"});
    take();
    expect(Tok::LBrace, "'{'");
    while (!at(Tok::RBrace)) {
      if (at_word("block")) {
        def.blocks.push_back(block());
      } else if (at(Tok::Ident) && !keywords().count(current_.text)) {
        def.links.push_back(link());
      } else {
        fail({"'block'", "NAME", "'}'"});
      }
    }
    take();
    return def;
  }

  void port_group(SourceDefinition& def) {
    bool input;
    if (at_word("in")) {
      input = true;
    } else if (at_word("out")) {
      input = false;
    } else {
      fail({"'in'", "'out'"});
    }
    take();
    do {
      if (at(Tok::Comma)) take();
      Token n = name();
      def.ports.push_back({input, n.text, n.span});
    } while (at(Tok::Comma));
  }

  SourceBlock block() {
    SourceBlock b;
    b.span = current_.span;
    take();
    b.name = name().text;
    expect(Tok::Equals, "'='");
    if (!at(Tok::Ident)) fail({"KIND"});
    b.kind_span = current_.span;
    b.kind = take().text;
    expect(Tok::LParen, "'('");
    if (!at(Tok::RParen)) {
      b.args.push_back(arg());
      while (at(Tok::Comma)) {
        take();
        b.args.push_back(arg());
      }
    }
    if (!at(Tok::RParen)) fail({"','", "')'"});
    take();
    expect(Tok::Semi, "';'");
    return b;
  }

  SourceArg arg() {
    SourceArg a;
    a.span = current_.span;
    if (at(Tok::Number)) {
      a.value = take().number;
      return a;
    }
    if (!at(Tok::Ident)) fail({"NUMBER", "NAME"});
    a.name = take().text;
    expect(Tok::Equals, "'='");
    a.value = expect(Tok::Number, "NUMBER").number;
    return a;
  }

  SourceEndpoint endpoint() {
    SourceEndpoint ep;
    ep.span = current_.span;
    ep.name = name().text;
    if (at(Tok::Dot)) {
      take();
      if (!at(Tok::Ident)) fail({"NAME"});
      ep.port = take().text;
    }
    return ep;
  }

  SourceLink link() {
    SourceLink l;
    l.span = current_.span;
    l.from = endpoint();
    if (!at(Tok::Arrow)) fail(l.from.port ? std::vector<std::string>{"'->'"} : std::vector<std::string>{"'.'", "'->'"});
    take();
    l.to = endpoint();
    if (!at(Tok::Semi)) fail(l.to.port ? std::vector<std::string>{"';'"} : std::vector<std::string>{"'.'", "';'"});
    take();
    return l;
  }

  Lexer lexer_;
  Token current_;
};

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

ParseResult parse(std::string_view text) {
  ParseResult result;
  try {
    result.model = Parser(text).model();
  } catch (const SyntaxFailure& f) {
    result.diagnostics.push_back(f.diagnostic);
  }
  return result;
}

std::string print(const SourceModel& model) {
  std::ostringstream out;
  for (std::size_t d = 0; d < model.definitions.size(); ++d) {
    const auto& def = model.definitions[d];
    if (d > 0) out << "\n";
    out << "cbd " << def.name << "(";
    for (std::size_t i = 0; i < def.ports.size(); ++i) {
      const auto& p = def.ports[i];
      if (i == 0 || p.input != def.ports[i - 1].input) {
        if (i > 0) out << "; ";
        out << (p.input ? "in " : "out ");
      } else {
        out << ", ";
      }
      out << p.name;
    }
    out << ") {\n";
    for (const auto& b : def.blocks) {
      out << "  block " << b.name << " = " << b.kind << "(";
      for (std::size_t i = 0; i < b.args.size(); ++i) {
        if (i > 0) out << ", ";
        if (b.args[i].name) out << *b.args[i].name << " = ";
        out << format_number(b.args[i].value);
      }
      out << ");\n";
    }
    for (const auto& l : def.links) {
      auto ep = [](const SourceEndpoint& e) { return e.port ? e.name + "." + *e.port : e.name; };
      out << "  " << ep(l.from) << " -> " << ep(l.to) << ";\n";
    }
    out << "}\n";
  }
  return out.str();
}

ValidationResult validate(const SourceModel& source) {
  ValidationResult result;
  auto& diags = result.diagnostics;
  auto report = [&](ErrorCode code, std::string message, Span span) {
    diags.push_back({code, std::move(message), span, {}});
  };

  Model model;
  std::set<std::string> definition_names;
  for (const auto& sdef : source.definitions) {
    if (parse_block_kind(sdef.name)) {
      report(ErrorCode::DuplicateName, "definition '" + sdef.name + "' shadows a primitive kind", sdef.span);
    } else if (!definition_names.insert(sdef.name).second) {
      report(ErrorCode::DuplicateName, "definition '" + sdef.name + "' is defined more than once", sdef.span);
    }
  }

  for (const auto& sdef : source.definitions) {
    Definition def;
    def.name = sdef.name;
    std::set<std::string> scope;
    for (const auto& p : sdef.ports) {
      if (!scope.insert(p.name).second) {
        report(ErrorCode::DuplicateName, "name '" + p.name + "' is declared twice in '" + sdef.name + "'", p.span);
      }
      (p.input ? def.inputs : def.outputs).push_back(p.name);
    }
    for (const auto& sb : sdef.blocks) {
      if (!scope.insert(sb.name).second) {
        report(ErrorCode::DuplicateName, "name '" + sb.name + "' is declared twice in '" + sdef.name + "'", sb.span);
      }
      BlockInstance inst{sb.name, sb.kind, {}};
      const auto kind = parse_block_kind(sb.kind);
      if (!kind && !definition_names.count(sb.kind)) {
        report(ErrorCode::UnknownDefinition, "unknown block kind '" + sb.kind + "'", sb.kind_span);
      }
      bool args_ok = true;
      for (const auto& a : sb.args) {
        std::string pname;
        if (a.name) {
          pname = *a.name;
        } else if (kind && !primary_parameter(*kind).empty()) {
          pname = std::string(primary_parameter(*kind));
        } else {
          report(ErrorCode::InvalidParameter, "block '" + sb.name + "' takes no positional argument", a.span);
          args_ok = false;
          continue;
        }
        if (!kind) {
          report(ErrorCode::InvalidParameter, "composite block '" + sb.name + "' takes no arguments", a.span);
          args_ok = false;
          continue;
        }
        if (!inst.parameters.emplace(pname, a.value).second) {
          report(ErrorCode::InvalidParameter, "parameter '" + pname + "' of '" + sb.name + "' is given twice", a.span);
          args_ok = false;
        }
      }
      if (kind && args_ok) {
        try {
          (void)primitive_spec(inst, *kind);
        } catch (const CbdError& e) {
          report(e.code(), e.detail(), sb.span);
        }
      }
      def.blocks.push_back(std::move(inst));
    }
    for (const auto& sl : sdef.links) {
      def.links.push_back({{sl.from.name, sl.from.port}, {sl.to.name, sl.to.port}});
    }
    model.definitions.push_back(std::move(def));
  }

  // Links and drivers.
  for (std::size_t d = 0; d < source.definitions.size(); ++d) {
    const auto& sdef = source.definitions[d];
    const auto& def = model.definitions[d];
    std::map<std::pair<int, std::string>, std::vector<std::size_t>> drivers;  // (block or -1, port) -> links
    for (std::size_t l = 0; l < def.links.size(); ++l) {
      const auto& sl = sdef.links[l];
      bool ok = true;
      ResolvedEndpoint to{};
      try {
        (void)resolve_endpoint(model, def, def.links[l].from, true);
      } catch (const CbdError& e) {
        report(e.code(), e.detail(), sl.from.span);
        ok = false;
      }
      try {
        to = resolve_endpoint(model, def, def.links[l].to, false);
      } catch (const CbdError& e) {
        report(e.code(), e.detail(), sl.to.span);
        ok = false;
      }
      if (!ok) continue;
      const int owner = to.kind == ResolvedEndpoint::Kind::BlockInput ? static_cast<int>(to.block) : -1;
      drivers[{owner, to.port}].push_back(l);
    }
    for (std::size_t b = 0; b < def.blocks.size(); ++b) {
      const auto ports = instance_ports(model, def.blocks[b]);
      if (!ports) continue;
      for (const auto& port : ports->inputs) {
        const auto& links = drivers[{static_cast<int>(b), port}];
        if (links.empty()) {
          report(ErrorCode::UnconnectedInput, "input '" + def.blocks[b].name + "." + port + "' has no incoming link",
                 sdef.blocks[b].span);
        }
        for (std::size_t i = 1; i < links.size(); ++i) {
          report(ErrorCode::MultipleDrivers, "input '" + def.blocks[b].name + "." + port + "' has more than one driver",
                 sdef.links[links[i]].span);
        }
      }
    }
    for (const auto& port : def.outputs) {
      const auto& links = drivers[{-1, port}];
      if (links.empty()) {
        report(ErrorCode::UnconnectedInput, "output port '" + port + "' of '" + def.name + "' has no driver",
               sdef.span);
      }
      for (std::size_t i = 1; i < links.size(); ++i) {
        report(ErrorCode::MultipleDrivers, "output port '" + port + "' of '" + def.name + "' has more than one driver",
               sdef.links[links[i]].span);
      }
    }
  }

  // Recursion: report each back edge once, at the block that closes the cycle.
  std::map<std::string, int> color;  // 0 new, 1 on stack, 2 done
  std::function<void(std::size_t)> visit = [&](std::size_t d) {
    const auto& def = model.definitions[d];
    color[def.name] = 1;
    for (std::size_t b = 0; b < def.blocks.size(); ++b) {
      const auto& kind = def.blocks[b].kind;
      if (parse_block_kind(kind)) continue;
      const Definition* child = model.find(kind);
      if (!child) continue;
      const int c = color[child->name];
      if (c == 1) {
        report(ErrorCode::RecursiveDefinition,
               "block '" + def.blocks[b].name + "' makes '" + child->name + "' contain itself",
               source.definitions[d].blocks[b].span);
      } else if (c == 0) {
        visit(static_cast<std::size_t>(child - model.definitions.data()));
      }
    }
    color[def.name] = 2;
  };
  for (std::size_t d = 0; d < model.definitions.size(); ++d) {
    if (color[model.definitions[d].name] == 0) visit(d);
  }

  if (diags.empty()) result.model = std::move(model);
  return result;
}

namespace {

[[noreturn]] void raise(const std::vector<Diagnostic>& diags) {
  std::string message;
  for (std::size_t i = 0; i < diags.size(); ++i) {
    if (i > 0) message += "\n";
    message += diags[i].str();
  }
  throw CbdError(diags.front().code, message);
}

}  // namespace

Model load_model(std::string_view text) {
  auto parsed = parse(text);
  if (!parsed.ok()) raise(parsed.diagnostics);
  auto validated = validate(parsed.model);
  if (!validated.model) raise(validated.diagnostics);
  return std::move(*validated.model);
}

Model load_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CbdError(ErrorCode::IoError, "cannot read '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return load_model(buffer.str());
}

}  // namespace diraccbd::dsl
