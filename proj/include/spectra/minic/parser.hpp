#pragma once

#include <stdexcept>
#include <string>

#include "spectra/minic/ast.hpp"

namespace spectra::minic {

class ParseError : public std::runtime_error {
 public:
  ParseError(SourcePos pos, std::string expected, std::string found);

  SourcePos pos;
  std::string expected;
  std::string found;
};

// Parses a whole translation unit. Grammar:
//
//   program := fundef*
//   fundef  := "int" IDENT "(" [params] ")" block
//   params  := "int" IDENT ("," "int" IDENT)*
//   block   := "{" stmt* "}"
//   stmt    := "int" IDENT "=" expr ";" | IDENT "=" expr ";" | expr ";"
//            | "if" "(" expr ")" block ["else" block]
//            | "while" "(" expr ")" block
//            | "return" expr ";"
//
// Expressions are comma-free C expressions over + - * / < <= == != > >= && ||,
// calls and parentheses; a top-level comma pair is written "(e1, e2)".
// "//" comments run to end of line. A leading "-" on an integer literal is
// folded into the literal.
//
// Enforces unique function names and unique parameter names per function.
Program parse(const std::string& text);

}  // namespace spectra::minic
