#pragma once

#include <vector>

#include "sl/ast.hpp"
#include "sl/token.hpp"

namespace sl {

/// Parses a token stream into a surface program. Throws CompileError with
/// ParseError/SwapOnNonPath/StrayBreak/StrayContinue diagnostics.
Program parse(const std::vector<Token>& tokens);

/// Convenience: tokenize + parse.
Program parse_source(std::string_view source);

}  // namespace sl
