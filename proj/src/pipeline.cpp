#include "sl/pipeline.hpp"

#include "sl/desugar.hpp"
#include "sl/ir_validate.hpp"
#include "sl/lower.hpp"
#include "sl/parser.hpp"
#include "sl/resolver.hpp"

namespace sl {

Compiled compile_source(std::string_view source) {
  Compiled c;
  c.surface = parse_source(source);
  auto diags = resolve(c.surface);
  if (!diags.empty()) throw CompileError(std::move(diags));
  c.core = desugar_program(c.surface);
  c.ir = lower_program(c.core);
  auto ir_diags = validate_ir(c.ir);
  if (!ir_diags.empty()) throw CompileError(std::move(ir_diags));
  return c;
}

}  // namespace sl
