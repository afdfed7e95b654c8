#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "sl/builtins.hpp"

namespace sl {

using ValueId = uint32_t;
using BlockId = uint32_t;

/// Constant payload: unit, int, float, bool or string.
using IRLiteral = std::variant<std::monostate, int64_t, double, bool, std::string>;

enum class PrimOp { Add, Sub, Mul, Div, Lt, Le, Gt, Ge, Eq, Ne, Neg, Not };

const char* prim_name(PrimOp op);

struct ConstInstr {
  IRLiteral value;
};
struct PrimInstr {
  PrimOp op;
  std::vector<ValueId> args;  // 1 for Neg/Not, 2 otherwise
};

struct CalleeBuiltin {
  Builtin b;
};
struct CalleeFn {
  uint32_t index;
};
struct CalleeValue {
  ValueId id;
};
using Callee = std::variant<CalleeBuiltin, CalleeFn, CalleeValue>;

/// A call yields the explicit result plus the final value of every swapped
/// argument; dests[0] is the result, dests[1..] line up with swap_positions.
struct CallInstr {
  Callee callee;
  std::vector<ValueId> args;
  std::vector<uint32_t> swap_positions;  // strictly increasing arg indexes
};

struct MakeArrayInstr {
  std::vector<ValueId> elems;
};
struct MakeTupleInstr {
  std::vector<ValueId> elems;
};
struct MakeRecordInstr {
  std::vector<std::string> keys;
  std::vector<ValueId> values;
};
struct MakeClosureInstr {
  uint32_t fn_index;
  std::vector<ValueId> captures;
};

using InstrOp = std::variant<ConstInstr, PrimInstr, CallInstr, MakeArrayInstr,
                             MakeTupleInstr, MakeRecordInstr, MakeClosureInstr>;

struct Instr {
  std::vector<ValueId> dests;
  InstrOp op;
};

struct JumpTerm {
  BlockId target;
  std::vector<ValueId> args;
};
struct BranchTerm {
  ValueId cond;
  BlockId true_target;
  std::vector<ValueId> true_args;
  BlockId false_target;
  std::vector<ValueId> false_args;
};
struct ReturnTerm {
  ValueId value;
  std::vector<ValueId> swapped;  // final values of swapped params, in order
};
using Terminator = std::variant<JumpTerm, BranchTerm, ReturnTerm>;

struct IRBlock {
  std::vector<ValueId> params;
  std::vector<Instr> instrs;
  Terminator term;
};

struct IRFunction {
  std::string name;
  uint32_t n_params = 0;    // captures + declared parameters, ids 0..n-1
  uint32_t n_captures = 0;  // leading params that a closure cell supplies
  std::vector<bool> param_swapped;  // declared parameters only
  uint32_t n_values = 0;
  std::vector<std::string> value_names;  // hint per id, may be empty
  std::vector<IRBlock> blocks;           // blocks[0] is the entry
};

struct IRProgram {
  std::vector<IRFunction> functions;
  std::map<std::string, uint32_t> fn_index;

  const IRFunction* find(const std::string& name) const {
    auto it = fn_index.find(name);
    return it == fn_index.end() ? nullptr : &functions[it->second];
  }
};

}  // namespace sl
