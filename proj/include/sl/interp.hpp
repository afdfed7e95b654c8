#pragma once

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sl/ir.hpp"
#include "sl/value.hpp"

namespace sl {

enum class EvalErrorKind {
  ArityMismatch,
  TypeError,
  IndexOutOfBounds,
  UnknownField,
  DivisionByZero,
  StepBudgetExceeded,
  NoMain,
  SwapArityMismatch,
  DestructureMismatch,
  NotCallable,
  Internal,
};

const char* eval_error_name(EvalErrorKind k);

class EvalError : public std::runtime_error {
 public:
  EvalError(EvalErrorKind kind, std::string msg)
      : std::runtime_error(std::move(msg)), kind_(kind) {}

  EvalErrorKind kind() const { return kind_; }
  const std::string& context() const { return context_; }
  void set_context(std::string ctx) {
    if (context_.empty()) context_ = std::move(ctx);
  }
  std::string describe() const;

 private:
  EvalErrorKind kind_;
  std::string context_;  // "fn NAME bbK", innermost frame
};

struct EvalConfig {
  bool reuse_enabled = true;
  bool trace = false;
  std::optional<uint64_t> max_steps;
};

struct CallOutcome {
  Value result;
  std::vector<Value> swapped;
  ReuseStats stats;
};

/// Evaluates an IR program. A single Interpreter is strictly single-threaded;
/// the shared IRProgram is read-only, so distinct Interpreters over it may
/// run on different threads. Values handed out by call()/run() must be
/// dropped before the Interpreter (they reference its heap).
class Interpreter {
 public:
  explicit Interpreter(const IRProgram& prog, EvalConfig cfg = {},
                       std::ostream& out = default_out(),
                       std::ostream* trace_out = nullptr);

  CallOutcome call(const std::string& fn_name, std::vector<Value> args);

  /// Runs `main` (zero parameters). Throws EvalError(NoMain) otherwise.
  CallOutcome run();

  Heap& heap() { return heap_; }
  const ReuseStats& stats() const { return heap_.stats(); }
  int64_t live_cells() const { return heap_.live_cells(); }

 private:
  static std::ostream& default_out();

  struct InstrPlan {
    std::vector<uint8_t> operand_last_use;  // gather order
    std::vector<uint8_t> dest_dead;
  };
  struct TermPlan {
    std::vector<uint8_t> first_last_use;   // jump args / true args / returns
    std::vector<uint8_t> second_last_use;  // false args
  };
  struct BlockPlan {
    std::vector<InstrPlan> instrs;
    TermPlan term;
  };
  struct FnPlan {
    std::vector<BlockPlan> blocks;
  };

  struct Frame {
    std::vector<Value> slots;
    std::vector<uint32_t> epoch;
    uint32_t cur_epoch = 1;
  };

  FnPlan build_plan(const IRFunction& fn) const;
  CallOutcome exec_function(uint32_t fn_index, std::vector<Value> args);
  void run_block_loop(uint32_t fn_index, Frame& fr, Value& result,
                      std::vector<Value>& swapped);
  template <typename Gather, typename Store>
  void exec_call(const Instr& ins, const CallInstr& c, Gather& gather,
                 Store& store);
  void exec_builtin(Builtin b, const CallInstr& c, std::vector<Value> args,
                    Value& result, std::vector<Value>& swapped);
  Value read_slot(Frame& fr, ValueId id, bool last_use);
  void write_slot(Frame& fr, ValueId id, Value v);
  void step();

  const IRProgram& prog_;
  EvalConfig cfg_;
  Heap heap_;
  std::ostream& out_;
  std::ostream* trace_out_;
  std::vector<FnPlan> plans_;
  uint64_t steps_ = 0;
};

// Reuse-aware update builtins; operands are consumed. Shared with the unit
// tests so the counter rules are checkable in isolation.
Value builtin_append(Heap& h, Value array, Value elem);
Value builtin_set(Heap& h, Value container, Value key, Value value);
std::pair<Value, Value> builtin_extract(Heap& h, Value container, Value key);
Value builtin_get(const Value& container, const Value& key);
Value builtin_len(const Value& v);
void builtin_print(std::ostream& out, const Value& v);

Value apply_prim(PrimOp op, const Value& a, const Value& b);
Value apply_prim(PrimOp op, const Value& a);
bool deep_equal(const Value& a, const Value& b);  // closures are an error

}  // namespace sl
