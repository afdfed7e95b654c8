#pragma once

#include <string>

#include "sl/ast.hpp"

namespace sl {

/// Prints a program back to surface syntax. The output re-parses to a
/// structurally equal AST and doubles as the stable dump behind `ast`.
std::string pretty_print(const Program& p);
std::string pretty_print(const Expr& e);

}  // namespace sl
