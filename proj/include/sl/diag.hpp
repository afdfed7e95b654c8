#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace sl {

struct SrcLoc {
  int line = 0;    // 1-based; 0 = unknown
  int column = 0;  // 1-based
};

enum class DiagKind {
  // frontend
  LexError,
  ParseError,
  SwapOnNonPath,
  StrayBreak,
  StrayContinue,
  UnknownVariable,
  DuplicateFunction,
  DuplicateParam,
  // desugar
  SwapArityMismatch,
  ArityMismatch,
  OverlappingSwapPaths,
  // ir validation
  MultipleAssignment,
  UseBeforeDef,
  TerminatorArityMismatch,
  MalformedInstr,
  BadEntryBlock,
  UnknownCallee,
  // transforms
  NonDifferentiableOp,
  ImpureInput,
  UnknownFunction,
  BadParamIndex,
};

const char* diag_kind_name(DiagKind k);

struct Diag {
  DiagKind kind;
  SrcLoc loc;
  std::string message;
  std::string context;  // function/block for IR-level diagnostics

  std::string to_string() const;
};

/// Thrown by pipeline stages that cannot produce output. Carries every
/// diagnostic collected before the stage gave up.
class CompileError : public std::runtime_error {
 public:
  explicit CompileError(Diag d);
  explicit CompileError(std::vector<Diag> ds);

  const Diag& first() const { return diags_.front(); }
  const std::vector<Diag>& diags() const { return diags_; }

 private:
  std::vector<Diag> diags_;
};

}  // namespace sl
