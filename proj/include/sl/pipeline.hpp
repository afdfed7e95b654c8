#pragma once

#include <string>
#include <string_view>

#include "sl/ast.hpp"
#include "sl/ir.hpp"

namespace sl {

struct Compiled {
  Program surface;
  Program core;
  IRProgram ir;
};

/// Full frontend: tokenize, parse, resolve, desugar, lower, validate.
/// Throws CompileError carrying every diagnostic of the failing stage.
Compiled compile_source(std::string_view source);

}  // namespace sl
