#pragma once

#include "sl/ast.hpp"
#include "sl/ir.hpp"

namespace sl {

/// Lowers a desugared (core-form) program to the parameterized-block SSA
/// form: `while` becomes header/body/exit blocks, `if` becomes a branch plus
/// a join block whose parameters carry the variables assigned in either arm,
/// `break`/`continue` jump to the loop's exit/header, and `return` threads to
/// a single function-exit block carrying the result and the final values of
/// swapped parameters. Closure literals lower to extra functions whose
/// leading parameters receive the captured values.
IRProgram lower_program(const Program& core);

}  // namespace sl
