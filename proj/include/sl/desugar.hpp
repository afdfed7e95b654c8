#pragma once

#include <set>
#include <string>
#include <vector>

#include "sl/ast.hpp"

namespace sl {

/// Fresh-name allocator for desugaring temporaries. Never returns a name in
/// `used`; records what it hands out.
struct TempNames {
  std::set<std::string> used;
  int counter = 0;

  std::string fresh();
};

/// Result of rewriting one call with swap arguments: statements to run before
/// the call (component extraction), the rewritten call whose swap arguments
/// are all plain variables, and the rebuild statements to run after it.
struct SwapExpansion {
  std::vector<StmtPtr> pre;
  ExprPtr call;
  std::vector<StmtPtr> post;
};

/// `r *= x` -> `r = r * x`. Accessor indexes that could have effects are
/// hoisted to temporaries so they evaluate once. The returned assignment may
/// still target an accessor path; expand_assignment_path applies next.
std::vector<StmtPtr> expand_compound_assign(const Stmt& s, TempNames& temps);

/// `A[i] = x` -> `set(&A, i, x)`; `foo.bar = v` -> `set(&foo, "bar", v)`.
/// The container part of the target stays a path; nested containers are
/// handled by expand_swap_args.
std::vector<StmtPtr> expand_assignment_path(const Stmt& s, TempNames& temps);

/// Rewrites accessor-path swap arguments of a call by decompose-and-rebuild:
/// each nested component is extracted into a fresh variable before the call
/// and written back after it, outermost container first, so the container no
/// longer holds the component while the callee updates it.
SwapExpansion expand_swap_args(const ExprPtr& call, TempNames& temps);

/// Lowers all imperative sugar: no compound assignment, assignment targets
/// are plain variables or bracketed variable lists, every swap argument is a
/// plain variable. Statement order preserves surface evaluation order.
/// Throws CompileError on swap-arity mismatches and overlapping swap paths.
Program desugar_program(const Program& p);

/// Checks the core-form invariants on a program (used by tests).
bool is_core_form(const Program& p, std::string* why = nullptr);

}  // namespace sl
