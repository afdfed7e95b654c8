#pragma once

#include <vector>

#include "sl/diag.hpp"
#include "sl/ir.hpp"

namespace sl {

/// Checks the SSA discipline: every id assigned exactly once, every operand
/// defined by a definition that reaches the use along all paths, terminator
/// argument counts matching target block parameters, and well-formed
/// instructions. Returns diagnostics instead of aborting; an empty list means
/// the program is valid.
std::vector<Diag> validate_ir(const IRProgram& p);

}  // namespace sl
