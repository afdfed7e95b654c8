#pragma once

#include <set>
#include <string>
#include <vector>

#include "sl/ast.hpp"

namespace sl {

/// Scope-level checks on a parsed program: unique function and parameter
/// names, and every variable/path root resolving to a local, an enclosing
/// closure binding, a top-level function, or a builtin. Swap-argument roots
/// must additionally be assignable locals. Returns all diagnostics found.
std::vector<Diag> resolve(const Program& p);

/// Names assigned anywhere in a statement list: plain assignments,
/// destructuring targets, compound targets and swap-argument roots. Does not
/// descend into closure literals (those have their own scope).
std::set<std::string> assigned_names(const Block& body);

}  // namespace sl
