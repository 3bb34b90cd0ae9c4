#pragma once

// Recursive-descent parser and serializer for the OpenQASM 2 subset:
//
//   program   := [ "OPENQASM" REAL ";" ] statement*
//   statement := "include" STRING ";"
//              | "qreg" ID "[" INT "]" ";"
//              | ID [ "(" [ expr { "," expr } ] ")" ] qubit { "," qubit } ";"
//   qubit     := ID "[" INT "]"
//   expr      := term { ("+" | "-") term }
//   term      := unary { ("*" | "/") unary }
//   unary     := ("-" | "+") unary | primary
//   primary   := REAL | INT | "pi" | "(" expr ")"
//
// Gates: u3(θ,φ,λ), u2(φ,λ), u1(λ), ry(θ), cx. The qelib1.inc include is
// recognized and ignored; gate definitions are built in.

#include "dqsim/circuit.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

namespace dqsim::qasm {

enum class ErrorCategory {
  Lexical,
  Syntax,
  UnknownGate,
  Arity,
  UndeclaredRegister,
  DuplicateRegister,
  IndexOutOfBounds,
  InvalidOperands,
  UnsupportedStatement,
  InvalidAngle,
  MultipleRegisters,
};

inline const char* category_name(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::Lexical: return "lexical error";
    case ErrorCategory::Syntax: return "syntax error";
    case ErrorCategory::UnknownGate: return "unknown gate";
    case ErrorCategory::Arity: return "arity mismatch";
    case ErrorCategory::UndeclaredRegister: return "undeclared register";
    case ErrorCategory::DuplicateRegister: return "duplicate register";
    case ErrorCategory::IndexOutOfBounds: return "index out of bounds";
    case ErrorCategory::InvalidOperands: return "invalid operands";
    case ErrorCategory::UnsupportedStatement: return "unsupported statement";
    case ErrorCategory::InvalidAngle: return "invalid angle";
    case ErrorCategory::MultipleRegisters: return "unsupported register layout";
  }
  return "error";
}

struct SourcePos {
  int line = 1;
  int column = 1;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(ErrorCategory category, SourcePos pos, const std::string& message)
      : std::runtime_error(std::to_string(pos.line) + ":" + std::to_string(pos.column) + ": " +
                           category_name(category) + ": " + message),
        category_(category),
        pos_(pos) {}

  ErrorCategory category() const { return category_; }
  SourcePos position() const { return pos_; }

 private:
  ErrorCategory category_;
  SourcePos pos_;
};

/// Immutable expression tree for gate angles.
class AngleExpr {
 public:
  enum class Op { Number, Pi, Negate, Add, Sub, Mul, Div };

  static AngleExpr number(double v) { return AngleExpr(Op::Number, v, nullptr, nullptr); }
  static AngleExpr pi() { return AngleExpr(Op::Pi, 0.0, nullptr, nullptr); }
  static AngleExpr negate(AngleExpr e) {
    return AngleExpr(Op::Negate, 0.0, std::make_shared<const AngleExpr>(std::move(e)), nullptr);
  }
  static AngleExpr binary(Op op, AngleExpr lhs, AngleExpr rhs) {
    return AngleExpr(op, 0.0, std::make_shared<const AngleExpr>(std::move(lhs)),
                     std::make_shared<const AngleExpr>(std::move(rhs)));
  }

  Op op() const { return op_; }

  double evaluate() const {
    switch (op_) {
      case Op::Number: return value_;
      case Op::Pi: return kPi;
      case Op::Negate: return -lhs_->evaluate();
      case Op::Add: return lhs_->evaluate() + rhs_->evaluate();
      case Op::Sub: return lhs_->evaluate() - rhs_->evaluate();
      case Op::Mul: return lhs_->evaluate() * rhs_->evaluate();
      case Op::Div: return lhs_->evaluate() / rhs_->evaluate();
    }
    return 0.0;
  }

  std::string to_string() const {
    switch (op_) {
      case Op::Number: {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", value_);
        return buf;
      }
      case Op::Pi: return "pi";
      case Op::Negate: return "-(" + lhs_->to_string() + ")";
      case Op::Add: return "(" + lhs_->to_string() + " + " + rhs_->to_string() + ")";
      case Op::Sub: return "(" + lhs_->to_string() + " - " + rhs_->to_string() + ")";
      case Op::Mul: return "(" + lhs_->to_string() + " * " + rhs_->to_string() + ")";
      case Op::Div: return "(" + lhs_->to_string() + " / " + rhs_->to_string() + ")";
    }
    return "?";
  }

 private:
  AngleExpr(Op op, double v, std::shared_ptr<const AngleExpr> l, std::shared_ptr<const AngleExpr> r)
      : op_(op), value_(v), lhs_(std::move(l)), rhs_(std::move(r)) {}

  Op op_;
  double value_;
  std::shared_ptr<const AngleExpr> lhs_;
  std::shared_ptr<const AngleExpr> rhs_;
};

struct Register {
  std::string name;
  long long size = 0;
  SourcePos pos;
};

struct QubitRef {
  std::string reg;
  long long index = 0;
  SourcePos pos;
};

struct GateStatement {
  std::string name;
  std::vector<AngleExpr> args;
  std::vector<QubitRef> operands;
  SourcePos pos;
};

struct Program {
  std::optional<std::string> version;
  std::vector<std::string> includes;
  std::vector<Register> registers;
  std::vector<GateStatement> statements;
};

struct GateSignature {
  std::string_view name;
  int n_params;
  int n_qubits;
};

inline constexpr GateSignature kGateTable[] = {
    {"u3", 3, 1}, {"u2", 2, 1}, {"u1", 1, 1}, {"ry", 1, 1}, {"cx", 0, 2},
};

inline const GateSignature* find_gate(std::string_view name) {
  for (const auto& g : kGateTable)
    if (g.name == name) return &g;
  return nullptr;
}

namespace detail {

enum class Tok { Identifier, Real, Integer, String, LParen, RParen, LBracket, RBracket, Comma, Semicolon, Plus, Minus, Star, Slash,
                 Arrow, LBrace, RBrace, EqEq, End };

inline const char* tok_name(Tok t) {
  switch (t) {
    case Tok::Identifier: return "identifier";
    case Tok::Real: return "real number";
    case Tok::Integer: return "integer";
    case Tok::String: return "string";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::LBracket: return "'['";
    case Tok::RBracket: return "']'";
    case Tok::Comma: return "','";
    case Tok::Semicolon: return "';'";
    case Tok::Plus: return "'+'";
    case Tok::Minus: return "'-'";
    case Tok::Star: return "'*'";
    case Tok::Slash: return "'/'";
    case Tok::Arrow: return "'->'";
    case Tok::LBrace: return "'{'";
    case Tok::RBrace: return "'}'";
    case Tok::EqEq: return "'=='";
    case Tok::End: return "end of input";
  }
  return "token";
}

struct Token {
  Tok kind = Tok::End;
  std::string text;
  SourcePos pos;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> tokenize() {
    std::vector<Token> out;
    for (;;) {
      skip_space_and_comments();
      Token t;
      t.pos = {line_, col_};
      if (at_end()) {
        t.kind = Tok::End;
        out.push_back(std::move(t));
        return out;
      }
      const char c = peek();
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        t.kind = Tok::Identifier;
        while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_')) t.text += advance();
      } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
        lex_number(t);
      } else if (c == '"') {
        advance();
        t.kind = Tok::String;
        while (!at_end() && peek() != '"' && peek() != '\n') t.text += advance();
        if (at_end() || peek() != '"') throw ParseError(ErrorCategory::Lexical, t.pos, "unterminated string literal");
        advance();
      } else if ((c == '-' && peek(1) == '>') || (c == '=' && peek(1) == '=')) {
        // Only needed so measure and if statements reach the parser, which
        // rejects them by keyword.
        t.kind = c == '-' ? Tok::Arrow : Tok::EqEq;
        t.text += advance();
        t.text += advance();
      } else {
        switch (c) {
          case '{': t.kind = Tok::LBrace; break;
          case '}': t.kind = Tok::RBrace; break;
          case '(': t.kind = Tok::LParen; break;
          case ')': t.kind = Tok::RParen; break;
          case '[': t.kind = Tok::LBracket; break;
          case ']': t.kind = Tok::RBracket; break;
          case ',': t.kind = Tok::Comma; break;
          case ';': t.kind = Tok::Semicolon; break;
          case '+': t.kind = Tok::Plus; break;
          case '-': t.kind = Tok::Minus; break;
          case '*': t.kind = Tok::Star; break;
          case '/': t.kind = Tok::Slash; break;
          default: {
            std::string shown = std::isprint(static_cast<unsigned char>(c)) ? std::string(1, c)
                                                                            : "\\x" + hex_byte(c);
            throw ParseError(ErrorCategory::Lexical, t.pos, "unexpected character '" + shown + "'");
          }
        }
        t.text = std::string(1, advance());
      }
      out.push_back(std::move(t));
    }
  }

 private:
  static std::string hex_byte(char c) {
    char buf[4];
    std::snprintf(buf, sizeof buf, "%02x", static_cast<unsigned>(static_cast<unsigned char>(c)));
    return buf;
  }

  bool at_end() const { return i_ >= src_.size(); }
  char peek(std::size_t ahead = 0) const { return i_ + ahead < src_.size() ? src_[i_ + ahead] : '\0'; }
  char advance() {
    const char c = src_[i_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  void skip_space_and_comments() {
    while (!at_end()) {
      const char c = peek();
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '/' && peek(1) == '/') {
        while (!at_end() && peek() != '\n') advance();
      } else {
        return;
      }
    }
  }

  void lex_number(Token& t) {
    bool is_real = false;
    while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) t.text += advance();
    if (!at_end() && peek() == '.') {
      is_real = true;
      t.text += advance();
      while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) t.text += advance();
    }
    if (!at_end() && (peek() == 'e' || peek() == 'E')) {
      const char sign = peek(1);
      const bool signed_exp = sign == '+' || sign == '-';
      if (std::isdigit(static_cast<unsigned char>(signed_exp ? peek(2) : sign))) {
        is_real = true;
        t.text += advance();
        if (signed_exp) t.text += advance();
        while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) t.text += advance();
      }
    }
    if (t.text == ".") throw ParseError(ErrorCategory::Lexical, t.pos, "malformed number '.'");
    t.kind = is_real ? Tok::Real : Tok::Integer;
  }

  std::string_view src_;
  std::size_t i_ = 0;
  int line_ = 1;
  int col_ = 1;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  Program parse_program() {
    Program prog;
    if (check_ident("OPENQASM")) {
      const Token kw = take();
      const Token ver = take();
      if (ver.kind != Tok::Real && ver.kind != Tok::Integer)
        throw ParseError(ErrorCategory::Syntax, ver.pos, "expected version number after OPENQASM");
      if (ver.text != "2.0" && ver.text != "2")
        throw ParseError(ErrorCategory::UnsupportedStatement, kw.pos, "only OPENQASM 2.0 is supported, got " + ver.text);
      expect(Tok::Semicolon);
      prog.version = ver.text;
    }
    while (cur().kind != Tok::End) parse_statement(prog);
    return prog;
  }

 private:
  static constexpr int kMaxDepth = 200;

  const Token& cur() const { return toks_[pos_]; }
  Token take() {
    Token t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }
  bool check_ident(std::string_view word) const { return cur().kind == Tok::Identifier && cur().text == word; }

  Token expect(Tok kind) {
    if (cur().kind != kind)
      throw ParseError(ErrorCategory::Syntax, cur().pos,
                       std::string("expected ") + tok_name(kind) + ", found " + describe(cur()));
    return take();
  }

  static std::string describe(const Token& t) {
    if (t.kind == Tok::End) return tok_name(t.kind);
    return std::string(tok_name(t.kind)) + " '" + t.text + "'";
  }

  const Register* find_register(const Program& p, std::string_view name) const {
    for (const auto& r : p.registers)
      if (r.name == name) return &r;
    return nullptr;
  }

  static long long parse_index(const Token& t) {
    long long v = 0;
    const auto* first = t.text.data();
    const auto* last = first + t.text.size();
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{} || res.ptr != last)
      throw ParseError(ErrorCategory::Lexical, t.pos, "integer literal '" + t.text + "' out of range");
    return v;
  }

  void parse_statement(Program& prog) {
    const Token head = cur();
    if (head.kind != Tok::Identifier)
      throw ParseError(ErrorCategory::Syntax, head.pos, "expected a statement, found " + describe(head));

    if (head.text == "include") {
      take();
      const Token file = expect(Tok::String);
      if (file.text != "qelib1.inc")
        throw ParseError(ErrorCategory::UnsupportedStatement, head.pos, "only qelib1.inc may be included");
      expect(Tok::Semicolon);
      prog.includes.push_back(file.text);
      return;
    }
    if (head.text == "qreg") {
      take();
      const Token name = expect(Tok::Identifier);
      expect(Tok::LBracket);
      const Token size = expect(Tok::Integer);
      expect(Tok::RBracket);
      expect(Tok::Semicolon);
      if (find_register(prog, name.text))
        throw ParseError(ErrorCategory::DuplicateRegister, name.pos, "register '" + name.text + "' already declared");
      const long long n = parse_index(size);
      if (n < 1) throw ParseError(ErrorCategory::Syntax, size.pos, "register size must be positive");
      prog.registers.push_back({name.text, n, name.pos});
      return;
    }
    static constexpr std::string_view kUnsupported[] = {"creg",  "measure", "barrier", "reset",
                                                        "if",    "opaque",  "gate",    "OPENQASM"};
    for (auto kw : kUnsupported)
      if (head.text == kw)
        throw ParseError(ErrorCategory::UnsupportedStatement, head.pos, "'" + head.text + "' statements are not supported");

    parse_gate_call(prog);
  }

  void parse_gate_call(Program& prog) {
    const Token name = take();
    const GateSignature* sig = find_gate(name.text);
    if (!sig) throw ParseError(ErrorCategory::UnknownGate, name.pos, "unknown gate '" + name.text + "'");

    GateStatement st;
    st.name = name.text;
    st.pos = name.pos;
    if (cur().kind == Tok::LParen) {
      take();
      if (cur().kind != Tok::RParen) {
        st.args.push_back(parse_expr(0));
        while (cur().kind == Tok::Comma) {
          take();
          st.args.push_back(parse_expr(0));
        }
      }
      expect(Tok::RParen);
    }
    st.operands.push_back(parse_qubit(prog, st));
    while (cur().kind == Tok::Comma) {
      take();
      st.operands.push_back(parse_qubit(prog, st));
    }
    expect(Tok::Semicolon);

    if (static_cast<int>(st.args.size()) != sig->n_params)
      throw ParseError(ErrorCategory::Arity, st.pos,
                       "'" + st.name + "' takes " + std::to_string(sig->n_params) + " parameter(s), got " +
                           std::to_string(st.args.size()));
    if (static_cast<int>(st.operands.size()) != sig->n_qubits)
      throw ParseError(ErrorCategory::Arity, st.pos,
                       "'" + st.name + "' acts on " + std::to_string(sig->n_qubits) + " qubit(s), got " +
                           std::to_string(st.operands.size()));
    if (st.operands.size() == 2 && st.operands[0].reg == st.operands[1].reg &&
        st.operands[0].index == st.operands[1].index)
      throw ParseError(ErrorCategory::InvalidOperands, st.pos, "'" + st.name + "' control and target coincide");
    prog.statements.push_back(std::move(st));
  }

  QubitRef parse_qubit(const Program& prog, const GateStatement& st) {
    const Token reg = expect(Tok::Identifier);
    const Register* r = find_register(prog, reg.text);
    if (!r) throw ParseError(ErrorCategory::UndeclaredRegister, reg.pos, "register '" + reg.text + "' is not declared");
    expect(Tok::LBracket);
    const Token idx = expect(Tok::Integer);
    expect(Tok::RBracket);
    const long long i = parse_index(idx);
    if (i < 0 || i >= r->size)
      throw ParseError(ErrorCategory::IndexOutOfBounds, idx.pos,
                       "index " + idx.text + " out of bounds for qreg " + r->name + "[" + std::to_string(r->size) +
                           "] in '" + st.name + "' statement at line " + std::to_string(st.pos.line));
    return {reg.text, i, reg.pos};
  }

  void enter(const Token& at) {
    if (++depth_ > kMaxDepth) throw ParseError(ErrorCategory::Syntax, at.pos, "expression nested too deeply");
  }

  AngleExpr parse_expr(int) {
    enter(cur());
    AngleExpr lhs = parse_term();
    while (cur().kind == Tok::Plus || cur().kind == Tok::Minus) {
      const auto op = take().kind == Tok::Plus ? AngleExpr::Op::Add : AngleExpr::Op::Sub;
      lhs = AngleExpr::binary(op, std::move(lhs), parse_term());
    }
    --depth_;
    return lhs;
  }

  AngleExpr parse_term() {
    AngleExpr lhs = parse_unary();
    while (cur().kind == Tok::Star || cur().kind == Tok::Slash) {
      const auto op = take().kind == Tok::Star ? AngleExpr::Op::Mul : AngleExpr::Op::Div;
      lhs = AngleExpr::binary(op, std::move(lhs), parse_unary());
    }
    return lhs;
  }

  AngleExpr parse_unary() {
    if (cur().kind == Tok::Minus || cur().kind == Tok::Plus) {
      const Token sign = take();
      enter(sign);
      AngleExpr inner = parse_unary();
      --depth_;
      return sign.kind == Tok::Minus ? AngleExpr::negate(std::move(inner)) : inner;
    }
    return parse_primary();
  }

  AngleExpr parse_primary() {
    const Token t = cur();
    switch (t.kind) {
      case Tok::Real:
      case Tok::Integer: {
        take();
        double v = 0;
        const auto* first = t.text.data();
        const auto* last = first + t.text.size();
        const auto res = std::from_chars(first, last, v);
        if (res.ec != std::errc{} || res.ptr != last)
          throw ParseError(ErrorCategory::Lexical, t.pos, "numeric literal '" + t.text + "' out of range");
        return AngleExpr::number(v);
      }
      case Tok::Identifier:
        if (t.text == "pi") {
          take();
          return AngleExpr::pi();
        }
        throw ParseError(ErrorCategory::Syntax, t.pos, "unknown identifier '" + t.text + "' in expression");
      case Tok::LParen: {
        take();
        AngleExpr e = parse_expr(0);
        expect(Tok::RParen);
        return e;
      }
      default:
        throw ParseError(ErrorCategory::Syntax, t.pos, "expected an expression, found " + describe(t));
    }
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  int depth_ = 0;
};

inline std::string format_angle(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

inline Program parse(std::string_view text) {
  detail::Lexer lexer(text);
  detail::Parser parser(lexer.tokenize());
  return parser.parse_program();
}

/// Evaluates angles and maps qubit i of the (single) register to circuit qubit i.
inline Circuit lower(const Program& p) {
  if (p.registers.size() != 1) {
    const SourcePos pos = p.registers.size() > 1 ? p.registers[1].pos : SourcePos{};
    throw ParseError(ErrorCategory::MultipleRegisters, pos,
                     "exactly one quantum register is supported, found " + std::to_string(p.registers.size()));
  }
  const Register& reg = p.registers.front();
  if (reg.size > kMaxQubits)
    throw ParseError(ErrorCategory::UnsupportedStatement, reg.pos, "register wider than 12 qubits");
  Circuit c(static_cast<int>(reg.size));
  for (const auto& st : p.statements) {
    std::vector<double> a;
    for (const auto& e : st.args) {
      const double v = e.evaluate();
      if (!std::isfinite(v))
        throw ParseError(ErrorCategory::InvalidAngle, st.pos, "angle '" + e.to_string() + "' is not finite");
      a.push_back(v);
    }
    const auto q0 = static_cast<int>(st.operands[0].index);
    if (st.name == "u3") c.add(Gate::u3(q0, a[0], a[1], a[2]));
    else if (st.name == "u2") c.add(Gate::u3(q0, kPi / 2, a[0], a[1]));
    else if (st.name == "u1") c.add(Gate::u1(q0, a[0]));
    else if (st.name == "ry") c.add(Gate::ry(q0, a[0]));
    else if (st.name == "cx") c.add(Gate::cx(q0, static_cast<int>(st.operands[1].index)));
    else throw ParseError(ErrorCategory::UnknownGate, st.pos, "unknown gate '" + st.name + "'");
  }
  return c;
}

inline Circuit parse_circuit(std::string_view text) { return lower(parse(text)); }

inline std::string serialize(const Circuit& c) {
  std::ostringstream os;
  os << "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[" << c.n_qubits() << "];\n";
  for (const auto& g : c.gates()) {
    switch (g.kind) {
      case GateKind::U3:
        os << "u3(" << detail::format_angle(g.params[0]) << ", " << detail::format_angle(g.params[1]) << ", "
           << detail::format_angle(g.params[2]) << ") q[" << g.qubits[0] << "];\n";
        break;
      case GateKind::U1: os << "u1(" << detail::format_angle(g.params[0]) << ") q[" << g.qubits[0] << "];\n"; break;
      case GateKind::RY: os << "ry(" << detail::format_angle(g.params[0]) << ") q[" << g.qubits[0] << "];\n"; break;
      case GateKind::CX: os << "cx q[" << g.qubits[0] << "], q[" << g.qubits[1] << "];\n"; break;
    }
  }
  return os.str();
}

/// Ground-state preparation circuit for the four-site half-filled ring.
inline constexpr std::string_view kFermiSeaPreparation = R"(include "qelib1.inc";
qreg q[4];
u3(6.806784082778, 0, 0) q[0];
u3(11.519173063162, -pi/2, pi/2) q[1];
cx q[0], q[1];
u3(11.950890905689, 0, 0) q[0];
u3(10.380094578894, 0, 0) q[1];
u1(7.853981633974) q[0];
u3(10.995574287564, -pi/2, pi/2) q[2];
cx q[0], q[2];
u3(8.639379797372, -pi/2, pi/2) q[1];
u3(10.995574287564, -pi/2, pi/2) q[3];
cx q[1], q[3];
u3(11.780972450962, 0, 0) q[3];
u3(11.780972450962, 0, 0) q[2];
u3(9.424777960769, -pi/2, pi/2) q[2];
cx q[3], q[2];
u3(11.780972450962, -pi/2, pi/2) q[3];
u1(10.995574287564) q[3];
u1(11.780972450962) q[2];
cx q[3], q[2];
u3(10.995574287564, 0, 0) q[3];
u1(8.639379797372) q[3];
u3(11.780972450962, 0, 0) q[2];
u3(7.853981633974, -pi/2, pi/2) q[2];
u3(7.853981633974, -pi/2, pi/2) q[0];
u3(7.853981633974, 0, 0) q[1];
u3(8.639379797372, 0, 0) q[0];
cx q[1], q[0];
u3(11.780972450962, 0, 0) q[1];
u1(9.424777960769) q[1];
u1(7.068583470577) q[0];
u3(9.424777960769, -pi/2, pi/2) q[0];
cx q[1], q[0];
u3(10.995574287564, 0, 0) q[1];
u1(10.210176124167) q[1];
u3(10.210176124167, 0, 0) q[0];
u3(7.853981633974, -pi/2, pi/2) q[0];
)";

}  // namespace dqsim::qasm
