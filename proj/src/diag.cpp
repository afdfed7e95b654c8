#include "sl/diag.hpp"

namespace sl {

const char* diag_kind_name(DiagKind k) {
  switch (k) {
    case DiagKind::LexError: return "LexError";
    case DiagKind::ParseError: return "ParseError";
    case DiagKind::SwapOnNonPath: return "SwapOnNonPath";
    case DiagKind::StrayBreak: return "StrayBreak";
    case DiagKind::StrayContinue: return "StrayContinue";
    case DiagKind::UnknownVariable: return "UnknownVariable";
    case DiagKind::DuplicateFunction: return "DuplicateFunction";
    case DiagKind::DuplicateParam: return "DuplicateParam";
    case DiagKind::SwapArityMismatch: return "SwapArityMismatch";
    case DiagKind::ArityMismatch: return "ArityMismatch";
    case DiagKind::OverlappingSwapPaths: return "OverlappingSwapPaths";
    case DiagKind::MultipleAssignment: return "MultipleAssignment";
    case DiagKind::UseBeforeDef: return "UseBeforeDef";
    case DiagKind::TerminatorArityMismatch: return "TerminatorArityMismatch";
    case DiagKind::MalformedInstr: return "MalformedInstr";
    case DiagKind::BadEntryBlock: return "BadEntryBlock";
    case DiagKind::UnknownCallee: return "UnknownCallee";
    case DiagKind::NonDifferentiableOp: return "NonDifferentiableOp";
    case DiagKind::ImpureInput: return "ImpureInput";
    case DiagKind::UnknownFunction: return "UnknownFunction";
    case DiagKind::BadParamIndex: return "BadParamIndex";
  }
  return "Diag";
}

std::string Diag::to_string() const {
  std::string s = diag_kind_name(kind);
  if (loc.line > 0) {
    s += " at " + std::to_string(loc.line) + ":" + std::to_string(loc.column);
  }
  if (!context.empty()) {
    s += " [" + context + "]";
  }
  s += ": " + message;
  return s;
}

CompileError::CompileError(Diag d)
    : std::runtime_error(d.to_string()), diags_{std::move(d)} {}

CompileError::CompileError(std::vector<Diag> ds)
    : std::runtime_error(ds.empty() ? std::string("compile error")
                                    : ds.front().to_string()),
      diags_(std::move(ds)) {}

}  // namespace sl
