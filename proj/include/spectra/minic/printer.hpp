#pragma once

#include <string>

#include "spectra/minic/ast.hpp"

namespace spectra::minic {

// Renders source that reparses to a structurally equal tree. Parentheses are
// emitted only where precedence requires them; comma expressions are always
// parenthesized, matching the grammar.
std::string print(const Program& p);

std::string print(const Expr& e);

}  // namespace spectra::minic
