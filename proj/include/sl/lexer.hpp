#pragma once

#include <string_view>
#include <vector>

#include "sl/token.hpp"

namespace sl {

/// Tokenizes source text. `#` starts a comment reaching the end of the line.
/// Physical newlines come through as Newline tokens; the stream always ends
/// with Eof. Throws CompileError (LexError) on unknown characters and
/// unterminated strings.
std::vector<Token> tokenize(std::string_view source);

}  // namespace sl
