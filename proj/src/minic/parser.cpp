#include "spectra/minic/parser.hpp"

#include <cctype>
#include <cstdint>
#include <set>
#include <utility>
#include <vector>

namespace spectra::minic {

ParseError::ParseError(SourcePos p, std::string exp, std::string fnd)
    : std::runtime_error("parse error at " + std::to_string(p.line) + ":" +
                         std::to_string(p.column) + ": expected " + exp +
                         ", found " + fnd),
      pos(p),
      expected(std::move(exp)),
      found(std::move(fnd)) {}

namespace {

enum class Tok {
  KwInt,
  KwIf,
  KwElse,
  KwWhile,
  KwReturn,
  Ident,
  IntLit,
  LParen,
  RParen,
  LBrace,
  RBrace,
  Comma,
  Semi,
  Assign,
  Plus,
  Minus,
  Star,
  Slash,
  Lt,
  Le,
  EqEq,
  Ne,
  Gt,
  Ge,
  AndAnd,
  OrOr,
  Eof,
};

struct Token {
  Tok kind;
  std::string text;
  std::uint64_t number = 0;  // magnitude for IntLit
  SourcePos pos;
};

std::string describe(const Token& t) {
  if (t.kind == Tok::Eof) return "end of input";
  return "'" + t.text + "'";
}

class Lexer {
 public:
  explicit Lexer(const std::string& text) : src_(text) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_ws_and_comments();
      Token t = next_token();
      bool eof = t.kind == Tok::Eof;
      out.push_back(std::move(t));
      if (eof) break;
    }
    return out;
  }

 private:
  char peek(std::size_t ahead = 0) const {
    std::size_t i = idx_ + ahead;
    return i < src_.size() ? src_[i] : '\0';
  }

  char advance() {
    char c = src_[idx_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  void skip_ws_and_comments() {
    for (;;) {
      char c = peek();
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
      } else if (c == '/' && peek(1) == '/') {
        while (peek() != '\n' && peek() != '\0') advance();
      } else {
        return;
      }
    }
  }

  Token next_token() {
    SourcePos pos{line_, col_};
    char c = peek();
    if (c == '\0') return {Tok::Eof, "", 0, pos};

    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::string word;
      while (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_') {
        word += advance();
      }
      Tok k = Tok::Ident;
      if (word == "int") k = Tok::KwInt;
      else if (word == "if") k = Tok::KwIf;
      else if (word == "else") k = Tok::KwElse;
      else if (word == "while") k = Tok::KwWhile;
      else if (word == "return") k = Tok::KwReturn;
      return {k, std::move(word), 0, pos};
    }

    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::string digits;
      std::uint64_t value = 0;
      bool overflow = false;
      while (std::isdigit(static_cast<unsigned char>(peek()))) {
        char d = advance();
        digits += d;
        if (value > (UINT64_MAX - static_cast<std::uint64_t>(d - '0')) / 10) {
          overflow = true;
        } else {
          value = value * 10 + static_cast<std::uint64_t>(d - '0');
        }
      }
      if (overflow) throw ParseError(pos, "integer literal in range", "'" + digits + "'");
      return {Tok::IntLit, std::move(digits), value, pos};
    }

    advance();
    switch (c) {
      case '(': return {Tok::LParen, "(", 0, pos};
      case ')': return {Tok::RParen, ")", 0, pos};
      case '{': return {Tok::LBrace, "{", 0, pos};
      case '}': return {Tok::RBrace, "}", 0, pos};
      case ',': return {Tok::Comma, ",", 0, pos};
      case ';': return {Tok::Semi, ";", 0, pos};
      case '+': return {Tok::Plus, "+", 0, pos};
      case '-': return {Tok::Minus, "-", 0, pos};
      case '*': return {Tok::Star, "*", 0, pos};
      case '/': return {Tok::Slash, "/", 0, pos};
      case '=':
        if (peek() == '=') {
          advance();
          return {Tok::EqEq, "==", 0, pos};
        }
        return {Tok::Assign, "=", 0, pos};
      case '<':
        if (peek() == '=') {
          advance();
          return {Tok::Le, "<=", 0, pos};
        }
        return {Tok::Lt, "<", 0, pos};
      case '>':
        if (peek() == '=') {
          advance();
          return {Tok::Ge, ">=", 0, pos};
        }
        return {Tok::Gt, ">", 0, pos};
      case '!':
        if (peek() == '=') {
          advance();
          return {Tok::Ne, "!=", 0, pos};
        }
        throw ParseError(pos, "'!='", "'!'");
      case '&':
        if (peek() == '&') {
          advance();
          return {Tok::AndAnd, "&&", 0, pos};
        }
        throw ParseError(pos, "'&&'", "'&'");
      case '|':
        if (peek() == '|') {
          advance();
          return {Tok::OrOr, "||", 0, pos};
        }
        throw ParseError(pos, "'||'", "'|'");
      default:
        throw ParseError(pos, "a token", std::string("'") + c + "'");
    }
  }

  const std::string& src_;
  std::size_t idx_ = 0;
  int line_ = 1;
  int col_ = 1;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  Program run() {
    Program prog;
    std::set<std::string> names;
    while (!at(Tok::Eof)) {
      FunDef f = fundef();
      if (!names.insert(f.name).second) {
        throw ParseError(f.pos, "a unique function name", "duplicate '" + f.name + "'");
      }
      prog.functions.push_back(std::move(f));
    }
    return prog;
  }

 private:
  const Token& cur() const { return toks_[idx_]; }
  const Token& peek(std::size_t ahead = 1) const {
    std::size_t i = idx_ + ahead;
    return i < toks_.size() ? toks_[i] : toks_.back();
  }
  bool at(Tok k) const { return cur().kind == k; }

  Token take() { return toks_[idx_++]; }

  Token expect(Tok k, const char* what) {
    if (!at(k)) throw ParseError(cur().pos, what, describe(cur()));
    return take();
  }

  FunDef fundef() {
    Token kw = expect(Tok::KwInt, "'int'");
    Token name = expect(Tok::Ident, "a function name");
    expect(Tok::LParen, "'('");
    std::vector<std::string> params;
    std::set<std::string> seen;
    if (!at(Tok::RParen)) {
      for (;;) {
        expect(Tok::KwInt, "'int'");
        Token p = expect(Tok::Ident, "a parameter name");
        if (!seen.insert(p.text).second) {
          throw ParseError(p.pos, "a unique parameter name", "duplicate '" + p.text + "'");
        }
        params.push_back(p.text);
        if (!at(Tok::Comma)) break;
        take();
      }
    }
    expect(Tok::RParen, "')'");
    Block body = block();
    return FunDef{name.text, std::move(params), std::move(body), kw.pos};
  }

  Block block() {
    expect(Tok::LBrace, "'{'");
    Block b;
    while (!at(Tok::RBrace)) {
      if (at(Tok::Eof)) throw ParseError(cur().pos, "'}'", describe(cur()));
      b.stmts.push_back(stmt());
    }
    take();
    return b;
  }

  Stmt stmt() {
    SourcePos pos = cur().pos;
    switch (cur().kind) {
      case Tok::KwInt: {
        take();
        Token name = expect(Tok::Ident, "a variable name");
        expect(Tok::Assign, "'='");
        ExprPtr init = expr();
        expect(Tok::Semi, "';'");
        return Stmt(pos, DeclStmt{name.text, std::move(init)});
      }
      case Tok::KwIf: {
        take();
        expect(Tok::LParen, "'('");
        ExprPtr cond = expr();
        expect(Tok::RParen, "')'");
        Block then_block = block();
        std::optional<Block> else_block;
        if (at(Tok::KwElse)) {
          take();
          else_block = block();
        }
        return Stmt(pos, IfStmt{std::move(cond), std::move(then_block), std::move(else_block)});
      }
      case Tok::KwWhile: {
        take();
        expect(Tok::LParen, "'('");
        ExprPtr cond = expr();
        expect(Tok::RParen, "')'");
        Block body = block();
        return Stmt(pos, WhileStmt{std::move(cond), std::move(body)});
      }
      case Tok::KwReturn: {
        take();
        ExprPtr value = expr();
        expect(Tok::Semi, "';'");
        return Stmt(pos, ReturnStmt{std::move(value)});
      }
      case Tok::Ident:
        if (peek().kind == Tok::Assign) {
          Token name = take();
          take();  // '='
          ExprPtr value = expr();
          expect(Tok::Semi, "';'");
          return Stmt(pos, AssignStmt{name.text, std::move(value)});
        }
        [[fallthrough]];
      default: {
        ExprPtr e = expr();
        expect(Tok::Semi, "';'");
        return Stmt(pos, ExprStmt{std::move(e)});
      }
    }
  }

  // Precedence climbing; comma is not an operator here.
  ExprPtr expr() { return or_expr(); }

  ExprPtr or_expr() {
    ExprPtr lhs = and_expr();
    while (at(Tok::OrOr)) {
      SourcePos pos = take().pos;
      lhs = make_expr(pos, BinaryExpr{BinOp::Or, std::move(lhs), and_expr()});
    }
    return lhs;
  }

  ExprPtr and_expr() {
    ExprPtr lhs = equality();
    while (at(Tok::AndAnd)) {
      SourcePos pos = take().pos;
      lhs = make_expr(pos, BinaryExpr{BinOp::And, std::move(lhs), equality()});
    }
    return lhs;
  }

  ExprPtr equality() {
    ExprPtr lhs = relational();
    while (at(Tok::EqEq) || at(Tok::Ne)) {
      BinOp op = at(Tok::EqEq) ? BinOp::Eq : BinOp::Ne;
      SourcePos pos = take().pos;
      lhs = make_expr(pos, BinaryExpr{op, std::move(lhs), relational()});
    }
    return lhs;
  }

  ExprPtr relational() {
    ExprPtr lhs = additive();
    for (;;) {
      BinOp op;
      if (at(Tok::Lt)) op = BinOp::Lt;
      else if (at(Tok::Le)) op = BinOp::Le;
      else if (at(Tok::Gt)) op = BinOp::Gt;
      else if (at(Tok::Ge)) op = BinOp::Ge;
      else break;
      SourcePos pos = take().pos;
      lhs = make_expr(pos, BinaryExpr{op, std::move(lhs), additive()});
    }
    return lhs;
  }

  ExprPtr additive() {
    ExprPtr lhs = multiplicative();
    while (at(Tok::Plus) || at(Tok::Minus)) {
      BinOp op = at(Tok::Plus) ? BinOp::Add : BinOp::Sub;
      SourcePos pos = take().pos;
      lhs = make_expr(pos, BinaryExpr{op, std::move(lhs), multiplicative()});
    }
    return lhs;
  }

  ExprPtr multiplicative() {
    ExprPtr lhs = primary();
    while (at(Tok::Star) || at(Tok::Slash)) {
      BinOp op = at(Tok::Star) ? BinOp::Mul : BinOp::Div;
      SourcePos pos = take().pos;
      lhs = make_expr(pos, BinaryExpr{op, std::move(lhs), primary()});
    }
    return lhs;
  }

  ExprPtr int_literal(SourcePos pos, bool negative) {
    Token t = expect(Tok::IntLit, "an integer literal");
    std::uint64_t limit = negative ? 9223372036854775808ULL : 9223372036854775807ULL;
    if (t.number > limit) {
      throw ParseError(t.pos, "integer literal in range", "'" + t.text + "'");
    }
    std::int64_t v = negative ? -static_cast<std::int64_t>(t.number - 1) - 1
                              : static_cast<std::int64_t>(t.number);
    return make_expr(pos, IntLit{v});
  }

  ExprPtr primary() {
    SourcePos pos = cur().pos;
    switch (cur().kind) {
      case Tok::IntLit:
        return int_literal(pos, false);
      case Tok::Minus:
        take();
        return int_literal(pos, true);
      case Tok::LParen: {
        take();
        ExprPtr first = expr();
        if (at(Tok::Comma)) {
          take();
          ExprPtr second = expr();
          expect(Tok::RParen, "')'");
          return make_expr(pos, CommaExpr{std::move(first), std::move(second)});
        }
        expect(Tok::RParen, "')'");
        return first;
      }
      case Tok::Ident: {
        Token name = take();
        if (at(Tok::LParen)) {
          take();
          std::vector<ExprPtr> args;
          if (!at(Tok::RParen)) {
            for (;;) {
              args.push_back(expr());
              if (!at(Tok::Comma)) break;
              take();
            }
          }
          expect(Tok::RParen, "')'");
          return make_expr(name.pos, CallExpr{name.text, std::move(args)});
        }
        return make_expr(name.pos, VarRef{name.text});
      }
      default:
        throw ParseError(pos, "an expression", describe(cur()));
    }
  }

  std::vector<Token> toks_;
  std::size_t idx_ = 0;
};

}  // namespace

Program parse(const std::string& text) {
  return Parser(Lexer(text).run()).run();
}

}  // namespace spectra::minic
