#pragma once

#include <string>
#include <vector>

#include "sl/diag.hpp"
#include "sl/ir.hpp"

namespace sl {

/// Gate run before any transform: the program must validate, and every
/// instruction must belong to the closed pure instruction set (which the
/// Instr variant enforces by construction). Empty result means transformable.
std::vector<Diag> purity_gate(const IRProgram& p);

struct ForwardDiffResult {
  IRProgram program;
  std::string derived_name;  // the function computing (value, derivative)
};

/// Forward-mode differentiation of `fn` with respect to parameter `wrt`.
/// The result program contains everything from the input plus a function
/// `<fn>_d` with the original signature whose result is the tuple
/// (f(args), df/darg_wrt(args)). Tangents thread through block parameters,
/// so loop-carried values carry loop-carried tangents; every reachable
/// callee gets a `<name>_dual` version taking (primal, tangent) pairs.
/// Throws CompileError: UnknownFunction, BadParamIndex, ImpureInput, and
/// NonDifferentiableOp when a derivative-carrying value reaches a container
/// key, an aggregate, or a closure.
ForwardDiffResult forward_diff(const IRProgram& p, const std::string& fn,
                               uint32_t wrt);

}  // namespace sl
