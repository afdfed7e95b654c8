#pragma once

#include <string>

#include "sl/ir.hpp"

namespace sl {

/// Deterministic text dump. Value names come from the surface variables that
/// produced them; a name is reused across blocks whenever no block sees both
/// occupants, which keeps loop headers reading like their source variables.
std::string print_ir(const IRProgram& p);
std::string print_ir(const IRProgram& p, const IRFunction& fn);

}  // namespace sl
