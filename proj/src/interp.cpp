#include "sl/interp.hpp"

#include <cassert>
#include <iostream>

#include "sl/util.hpp"

namespace sl {

namespace {

[[noreturn]] void fail(EvalErrorKind k, std::string msg) {
  throw EvalError(k, std::move(msg));
}

bool is_num(const Value& v) {
  return v.kind() == ValueKind::Int || v.kind() == ValueKind::Float;
}

double as_f(const Value& v) {
  return v.kind() == ValueKind::Int ? static_cast<double>(v.as_int())
                                    : v.as_float();
}

int64_t wrap_add(int64_t a, int64_t b) {
  return static_cast<int64_t>(static_cast<uint64_t>(a) + static_cast<uint64_t>(b));
}
int64_t wrap_sub(int64_t a, int64_t b) {
  return static_cast<int64_t>(static_cast<uint64_t>(a) - static_cast<uint64_t>(b));
}
int64_t wrap_mul(int64_t a, int64_t b) {
  return static_cast<int64_t>(static_cast<uint64_t>(a) * static_cast<uint64_t>(b));
}

int64_t require_int_key(const Value& key, const char* who) {
  if (key.kind() != ValueKind::Int)
    fail(EvalErrorKind::TypeError,
         std::string(who) + " key for an array must be an int, got " +
             kind_name(key.kind()));
  return key.as_int();
}

size_t checked_index(int64_t i, size_t len, const char* what) {
  if (i < 0 || static_cast<size_t>(i) >= len)
    fail(EvalErrorKind::IndexOutOfBounds,
         "index " + std::to_string(i) + " out of bounds for " + what +
             " of length " + std::to_string(len));
  return static_cast<size_t>(i);
}

}  // namespace

const char* eval_error_name(EvalErrorKind k) {
  switch (k) {
    case EvalErrorKind::ArityMismatch: return "ArityMismatch";
    case EvalErrorKind::TypeError: return "TypeError";
    case EvalErrorKind::IndexOutOfBounds: return "IndexOutOfBounds";
    case EvalErrorKind::UnknownField: return "UnknownField";
    case EvalErrorKind::DivisionByZero: return "DivisionByZero";
    case EvalErrorKind::StepBudgetExceeded: return "StepBudgetExceeded";
    case EvalErrorKind::NoMain: return "NoMain";
    case EvalErrorKind::SwapArityMismatch: return "SwapArityMismatch";
    case EvalErrorKind::DestructureMismatch: return "DestructureMismatch";
    case EvalErrorKind::NotCallable: return "NotCallable";
    case EvalErrorKind::Internal: return "Internal";
  }
  return "EvalError";
}

std::string EvalError::describe() const {
  std::string s = eval_error_name(kind_);
  if (!context_.empty()) s += " [" + context_ + "]";
  s += ": ";
  s += what();
  return s;
}

// --- pure primitives ---------------------------------------------------

bool deep_equal(const Value& a, const Value& b) {
  if (a.kind() == ValueKind::Closure || b.kind() == ValueKind::Closure)
    fail(EvalErrorKind::TypeError, "closures cannot be compared");
  if (is_num(a) && is_num(b)) {
    if (a.kind() == ValueKind::Int && b.kind() == ValueKind::Int)
      return a.as_int() == b.as_int();
    return as_f(a) == as_f(b);
  }
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case ValueKind::Unit: return true;
    case ValueKind::Bool: return a.as_bool() == b.as_bool();
    case ValueKind::Str: return a.as_str() == b.as_str();
    case ValueKind::Array: {
      const auto& x = std::get<ArrayData>(a.cell()->data);
      const auto& y = std::get<ArrayData>(b.cell()->data);
      if (x.elems.size() != y.elems.size()) return false;
      for (size_t i = 0; i < x.elems.size(); ++i)
        if (!deep_equal(x.elems[i], y.elems[i])) return false;
      return true;
    }
    case ValueKind::Tuple: {
      const auto& x = std::get<TupleData>(a.cell()->data);
      const auto& y = std::get<TupleData>(b.cell()->data);
      if (x.elems.size() != y.elems.size()) return false;
      for (size_t i = 0; i < x.elems.size(); ++i)
        if (!deep_equal(x.elems[i], y.elems[i])) return false;
      return true;
    }
    case ValueKind::Record: {
      const auto& x = std::get<RecordData>(a.cell()->data);
      const auto& y = std::get<RecordData>(b.cell()->data);
      if (x.fields.size() != y.fields.size()) return false;
      for (const auto& [k, xv] : x.fields) {
        bool found = false;
        for (const auto& [k2, yv] : y.fields) {
          if (k == k2) {
            if (!deep_equal(xv, yv)) return false;
            found = true;
            break;
          }
        }
        if (!found) return false;
      }
      return true;
    }
    default: return false;
  }
}

Value apply_prim(PrimOp op, const Value& a, const Value& b) {
  switch (op) {
    case PrimOp::Add:
      if (a.kind() == ValueKind::Int && b.kind() == ValueKind::Int)
        return Value(wrap_add(a.as_int(), b.as_int()));
      if (is_num(a) && is_num(b)) return Value(as_f(a) + as_f(b));
      if (a.kind() == ValueKind::Str && b.kind() == ValueKind::Str)
        return Value(a.as_str() + b.as_str());
      fail(EvalErrorKind::TypeError,
           std::string("cannot add ") + kind_name(a.kind()) + " and " +
               kind_name(b.kind()));
    case PrimOp::Sub:
      if (a.kind() == ValueKind::Int && b.kind() == ValueKind::Int)
        return Value(wrap_sub(a.as_int(), b.as_int()));
      if (is_num(a) && is_num(b)) return Value(as_f(a) - as_f(b));
      fail(EvalErrorKind::TypeError,
           std::string("cannot subtract ") + kind_name(b.kind()) + " from " +
               kind_name(a.kind()));
    case PrimOp::Mul:
      if (a.kind() == ValueKind::Int && b.kind() == ValueKind::Int)
        return Value(wrap_mul(a.as_int(), b.as_int()));
      if (is_num(a) && is_num(b)) return Value(as_f(a) * as_f(b));
      fail(EvalErrorKind::TypeError,
           std::string("cannot multiply ") + kind_name(a.kind()) + " and " +
               kind_name(b.kind()));
    case PrimOp::Div:
      if (a.kind() == ValueKind::Int && b.kind() == ValueKind::Int) {
        int64_t d = b.as_int();
        if (d == 0)
          fail(EvalErrorKind::DivisionByZero, "integer division by zero");
        int64_t n = a.as_int();
        if (n == INT64_MIN && d == -1) return Value(n);  // wraps
        return Value(n / d);
      }
      if (is_num(a) && is_num(b)) return Value(as_f(a) / as_f(b));
      fail(EvalErrorKind::TypeError,
           std::string("cannot divide ") + kind_name(a.kind()) + " by " +
               kind_name(b.kind()));
    case PrimOp::Eq:
      return Value(deep_equal(a, b));
    case PrimOp::Ne:
      return Value(!deep_equal(a, b));
    default:
      break;
  }
  if (!is_num(a) || !is_num(b))
    fail(EvalErrorKind::TypeError,
         std::string("cannot order ") + kind_name(a.kind()) + " and " +
             kind_name(b.kind()));
  bool r;
  if (a.kind() == ValueKind::Int && b.kind() == ValueKind::Int) {
    int64_t x = a.as_int(), y = b.as_int();
    r = op == PrimOp::Lt   ? x < y
        : op == PrimOp::Le ? x <= y
        : op == PrimOp::Gt ? x > y
                           : x >= y;
  } else {
    double x = as_f(a), y = as_f(b);
    r = op == PrimOp::Lt   ? x < y
        : op == PrimOp::Le ? x <= y
        : op == PrimOp::Gt ? x > y
                           : x >= y;
  }
  return Value(r);
}

Value apply_prim(PrimOp op, const Value& a) {
  if (op == PrimOp::Neg) {
    if (a.kind() == ValueKind::Int) return Value(wrap_sub(0, a.as_int()));
    if (a.kind() == ValueKind::Float) return Value(-a.as_float());
    fail(EvalErrorKind::TypeError,
         std::string("cannot negate ") + kind_name(a.kind()));
  }
  if (a.kind() != ValueKind::Bool)
    fail(EvalErrorKind::TypeError, "'not' requires a bool");
  return Value(!a.as_bool());
}

// --- builtins ----------------------------------------------------------

Value builtin_append(Heap& h, Value array, Value elem) {
  if (array.kind() != ValueKind::Array)
    fail(EvalErrorKind::TypeError,
         std::string("append expects an array, got ") +
             kind_name(array.kind()));
  Cell* c = h.mutable_cell(array);
  auto& elems = std::get<ArrayData>(c->data).elems;
  if (elems.size() == elems.capacity()) ++h.stats().allocations;  // growth
  elems.push_back(std::move(elem));
  return array;
}

Value builtin_set(Heap& h, Value container, Value key, Value value) {
  if (container.kind() == ValueKind::Array) {
    int64_t i = require_int_key(key, "set");
    size_t len = std::get<ArrayData>(container.cell()->data).elems.size();
    size_t ix = checked_index(i, len, "array");
    Cell* c = h.mutable_cell(container);
    std::get<ArrayData>(c->data).elems[ix] = std::move(value);
    return container;
  }
  if (container.kind() == ValueKind::Record) {
    if (key.kind() != ValueKind::Str)
      fail(EvalErrorKind::TypeError, "set key for a record must be a string");
    Cell* c = h.mutable_cell(container);
    auto& fields = std::get<RecordData>(c->data).fields;
    for (auto& [k, v] : fields) {
      if (k == key.as_str()) {
        v = std::move(value);
        return container;
      }
    }
    fields.emplace_back(key.as_str(), std::move(value));  // insert new field
    return container;
  }
  fail(EvalErrorKind::TypeError,
       std::string("set expects an array or record, got ") +
           kind_name(container.kind()));
}

std::pair<Value, Value> builtin_extract(Heap& h, Value container, Value key) {
  if (container.kind() == ValueKind::Array) {
    int64_t i = require_int_key(key, "extract");
    size_t len = std::get<ArrayData>(container.cell()->data).elems.size();
    size_t ix = checked_index(i, len, "array");
    Cell* c = h.mutable_cell(container);
    auto& slot = std::get<ArrayData>(c->data).elems[ix];
    Value component = std::move(slot);
    slot = Value();
    return {std::move(container), std::move(component)};
  }
  if (container.kind() == ValueKind::Record) {
    if (key.kind() != ValueKind::Str)
      fail(EvalErrorKind::TypeError,
           "extract key for a record must be a string");
    {
      const auto& fields = std::get<RecordData>(container.cell()->data).fields;
      bool found = false;
      for (const auto& [k, v] : fields) found |= k == key.as_str();
      if (!found)
        fail(EvalErrorKind::UnknownField,
             "unknown field '" + key.as_str() + "'");
    }
    Cell* c = h.mutable_cell(container);
    for (auto& [k, v] : std::get<RecordData>(c->data).fields) {
      if (k == key.as_str()) {
        Value component = std::move(v);
        v = Value();
        return {std::move(container), std::move(component)};
      }
    }
  }
  fail(EvalErrorKind::TypeError,
       std::string("extract expects an array or record, got ") +
           kind_name(container.kind()));
}

Value builtin_get(const Value& container, const Value& key) {
  switch (container.kind()) {
    case ValueKind::Array: {
      const auto& elems = std::get<ArrayData>(container.cell()->data).elems;
      size_t ix = checked_index(require_int_key(key, "get"), elems.size(),
                                "array");
      return elems[ix];
    }
    case ValueKind::Tuple: {
      const auto& elems = std::get<TupleData>(container.cell()->data).elems;
      size_t ix = checked_index(require_int_key(key, "get"), elems.size(),
                                "tuple");
      return elems[ix];
    }
    case ValueKind::Str: {
      if (key.kind() != ValueKind::Int)
        fail(EvalErrorKind::TypeError, "string index must be an int");
      const auto& s = container.as_str();
      size_t ix = checked_index(key.as_int(), s.size(), "string");
      return Value(std::string(1, s[ix]));
    }
    case ValueKind::Record: {
      if (key.kind() != ValueKind::Str)
        fail(EvalErrorKind::TypeError, "record key must be a string");
      for (const auto& [k, v] : std::get<RecordData>(container.cell()->data).fields)
        if (k == key.as_str()) return v;
      fail(EvalErrorKind::UnknownField, "unknown field '" + key.as_str() + "'");
    }
    default:
      fail(EvalErrorKind::TypeError,
           std::string("cannot index ") + kind_name(container.kind()));
  }
}

Value builtin_len(const Value& v) {
  switch (v.kind()) {
    case ValueKind::Array:
      return Value(static_cast<int64_t>(
          std::get<ArrayData>(v.cell()->data).elems.size()));
    case ValueKind::Tuple:
      return Value(static_cast<int64_t>(
          std::get<TupleData>(v.cell()->data).elems.size()));
    case ValueKind::Record:
      return Value(static_cast<int64_t>(
          std::get<RecordData>(v.cell()->data).fields.size()));
    case ValueKind::Str:
      return Value(static_cast<int64_t>(v.as_str().size()));
    default:
      fail(EvalErrorKind::TypeError,
           std::string("len expects an aggregate or string, got ") +
               kind_name(v.kind()));
  }
}

void builtin_print(std::ostream& out, const Value& v) {
  out << format_value(v, /*top_level=*/true) << '\n';
}

// --- execution plan -----------------------------------------------------

namespace {

// operand ids in runtime gather order: callee value, plain args, swap args
void instr_operands(const Instr& ins, std::vector<ValueId>& out) {
  out.clear();
  std::visit(
      overloaded{
          [&](const ConstInstr&) {},
          [&](const PrimInstr& p) { out = p.args; },
          [&](const CallInstr& c) {
            if (const auto* v = std::get_if<CalleeValue>(&c.callee))
              out.push_back(v->id);
            size_t sw = 0;
            for (size_t i = 0; i < c.args.size(); ++i) {
              if (sw < c.swap_positions.size() && c.swap_positions[sw] == i) {
                ++sw;
                continue;
              }
              out.push_back(c.args[i]);
            }
            for (uint32_t pos : c.swap_positions) out.push_back(c.args[pos]);
          },
          [&](const MakeArrayInstr& m) { out = m.elems; },
          [&](const MakeTupleInstr& m) { out = m.elems; },
          [&](const MakeRecordInstr& m) { out = m.values; },
          [&](const MakeClosureInstr& m) { out = m.captures; },
      },
      ins.op);
}

}  // namespace

Interpreter::FnPlan Interpreter::build_plan(const IRFunction& fn) const {
  size_t nb = fn.blocks.size();
  size_t nv = fn.n_values;
  std::vector<std::vector<char>> live_in(nb, std::vector<char>(nv, 0));

  // per-block uses and defs
  std::vector<std::vector<ValueId>> uses(nb);
  std::vector<std::vector<char>> defs(nb, std::vector<char>(nv, 0));
  std::vector<ValueId> ops;
  for (size_t b = 0; b < nb; ++b) {
    const auto& blk = fn.blocks[b];
    for (ValueId p : blk.params) defs[b][p] = 1;
    for (const auto& ins : blk.instrs) {
      for (ValueId d : ins.dests) defs[b][d] = 1;
      instr_operands(ins, ops);
      for (ValueId o : ops) uses[b].push_back(o);
    }
    std::visit(overloaded{
                   [&](const JumpTerm& t) {
                     for (ValueId a : t.args) uses[b].push_back(a);
                   },
                   [&](const BranchTerm& t) {
                     uses[b].push_back(t.cond);
                     for (ValueId a : t.true_args) uses[b].push_back(a);
                     for (ValueId a : t.false_args) uses[b].push_back(a);
                   },
                   [&](const ReturnTerm& t) {
                     uses[b].push_back(t.value);
                     for (ValueId a : t.swapped) uses[b].push_back(a);
                   },
               },
               blk.term);
  }

  bool changed = true;
  while (changed) {
    changed = false;
    for (size_t b = nb; b-- > 0;) {
      std::vector<char> out(nv, 0);
      std::visit(overloaded{
                     [&](const JumpTerm& t) {
                       for (size_t v = 0; v < nv; ++v)
                         out[v] |= live_in[t.target][v];
                     },
                     [&](const BranchTerm& t) {
                       for (size_t v = 0; v < nv; ++v)
                         out[v] |= live_in[t.true_target][v] |
                                   live_in[t.false_target][v];
                     },
                     [&](const ReturnTerm&) {},
                 },
                 fn.blocks[b].term);
      std::vector<char> in(nv, 0);
      for (ValueId u : uses[b])
        if (!defs[b][u]) in[u] = 1;
      for (size_t v = 0; v < nv; ++v)
        if (out[v] && !defs[b][v]) in[v] = 1;
      if (in != live_in[b]) {
        live_in[b] = std::move(in);
        changed = true;
      }
    }
  }

  FnPlan plan;
  plan.blocks.resize(nb);
  for (size_t b = 0; b < nb; ++b) {
    const auto& blk = fn.blocks[b];
    BlockPlan& bp = plan.blocks[b];
    std::vector<char> future(nv, 0);

    // terminator flags: per edge, an argument moves when the target does not
    // otherwise need the id and no later occurrence on that edge uses it
    auto edge_flags = [&](const std::vector<ValueId>& args, BlockId target,
                          std::vector<uint8_t>& flags) {
      std::vector<char> f = live_in[target];
      flags.assign(args.size(), 0);
      for (size_t i = args.size(); i-- > 0;) {
        flags[i] = !f[args[i]];
        f[args[i]] = 1;
      }
      for (size_t v = 0; v < nv; ++v) future[v] |= f[v];
    };
    std::visit(
        overloaded{
            [&](const JumpTerm& t) {
              edge_flags(t.args, t.target, bp.term.first_last_use);
            },
            [&](const BranchTerm& t) {
              edge_flags(t.true_args, t.true_target, bp.term.first_last_use);
              edge_flags(t.false_args, t.false_target, bp.term.second_last_use);
              future[t.cond] = 1;
            },
            [&](const ReturnTerm& t) {
              std::vector<ValueId> rets{t.value};
              rets.insert(rets.end(), t.swapped.begin(), t.swapped.end());
              std::vector<char> f(nv, 0);
              bp.term.first_last_use.assign(rets.size(), 0);
              for (size_t i = rets.size(); i-- > 0;) {
                bp.term.first_last_use[i] = !f[rets[i]];
                f[rets[i]] = 1;
              }
              for (size_t v = 0; v < nv; ++v) future[v] |= f[v];
            },
        },
        blk.term);

    bp.instrs.resize(blk.instrs.size());
    std::vector<ValueId> operands;
    for (size_t i = blk.instrs.size(); i-- > 0;) {
      const auto& ins = blk.instrs[i];
      InstrPlan& ip = bp.instrs[i];
      ip.dest_dead.assign(ins.dests.size(), 0);
      for (size_t d = 0; d < ins.dests.size(); ++d) {
        ip.dest_dead[d] = !future[ins.dests[d]];
        future[ins.dests[d]] = 0;
      }
      instr_operands(ins, operands);
      ip.operand_last_use.assign(operands.size(), 0);
      for (size_t k = operands.size(); k-- > 0;) {
        ip.operand_last_use[k] = !future[operands[k]];
        future[operands[k]] = 1;
      }
    }
  }
  return plan;
}

// --- execution ----------------------------------------------------------

std::ostream& Interpreter::default_out() { return std::cout; }

Interpreter::Interpreter(const IRProgram& prog, EvalConfig cfg,
                         std::ostream& out, std::ostream* trace_out)
    : prog_(prog),
      cfg_(cfg),
      heap_(cfg.reuse_enabled),
      out_(out),
      trace_out_(trace_out) {
  plans_.reserve(prog.functions.size());
  for (const auto& fn : prog.functions) plans_.push_back(build_plan(fn));
}

void Interpreter::step() {
  if (cfg_.max_steps && ++steps_ > *cfg_.max_steps)
    fail(EvalErrorKind::StepBudgetExceeded,
         "step budget of " + std::to_string(*cfg_.max_steps) + " exceeded");
}

Value Interpreter::read_slot(Frame& fr, ValueId id, bool last_use) {
  if (last_use) return std::move(fr.slots[id]);
  return fr.slots[id];
}

void Interpreter::write_slot(Frame& fr, ValueId id, Value v) {
  if (fr.epoch[id] == fr.cur_epoch)
    fail(EvalErrorKind::Internal,
         "value " + std::to_string(id) + " written twice in one block run");
  fr.epoch[id] = fr.cur_epoch;
  fr.slots[id] = std::move(v);
}

CallOutcome Interpreter::exec_function(uint32_t fn_index,
                                       std::vector<Value> args) {
  const IRFunction& fn = prog_.functions[fn_index];
  if (args.size() != fn.n_params)
    fail(EvalErrorKind::ArityMismatch,
         "'" + fn.name + "' expects " +
             std::to_string(fn.n_params - fn.n_captures) +
             " argument(s), got " +
             std::to_string(args.size() - fn.n_captures));
  Frame fr;
  fr.slots.resize(fn.n_values);
  fr.epoch.assign(fn.n_values, 0);
  for (size_t i = 0; i < args.size(); ++i)
    write_slot(fr, static_cast<ValueId>(i), std::move(args[i]));

  CallOutcome out;
  try {
    run_block_loop(fn_index, fr, out.result, out.swapped);
  } catch (EvalError& e) {
    e.set_context("fn " + fn.name);
    throw;
  }
  out.stats = heap_.stats();
  return out;
}

void Interpreter::run_block_loop(uint32_t fn_index, Frame& fr, Value& result,
                                 std::vector<Value>& swapped) {
  const IRFunction& fn = prog_.functions[fn_index];
  const FnPlan& plan = plans_[fn_index];
  BlockId cur = 0;
  ++fr.cur_epoch;

  while (true) {
    const IRBlock& blk = fn.blocks[cur];
    const BlockPlan& bp = plan.blocks[cur];

    for (size_t i = 0; i < blk.instrs.size(); ++i) {
      step();
      const Instr& ins = blk.instrs[i];
      const InstrPlan& ip = bp.instrs[i];
      if (trace_out_ && cfg_.trace)
        *trace_out_ << "[trace] fn=" << fn.name << " bb" << cur << " #" << i
                    << " op" << ins.op.index() << "\n";

      size_t opk = 0;  // operand cursor, gather order
      auto gather = [&](ValueId id) {
        return read_slot(fr, id, ip.operand_last_use[opk++] != 0);
      };
      auto store = [&](size_t d, Value v) {
        if (!ip.dest_dead[d]) write_slot(fr, ins.dests[d], std::move(v));
      };

      std::visit(
          overloaded{
              [&](const ConstInstr& c) {
                store(0, std::visit(
                             overloaded{
                                 [](std::monostate) { return Value(); },
                                 [](int64_t v) { return Value(v); },
                                 [](double v) { return Value(v); },
                                 [](bool v) { return Value(v); },
                                 [](const std::string& s) { return Value(s); },
                             },
                             c.value));
              },
              [&](const PrimInstr& p) {
                if (p.args.size() == 1) {
                  Value a = gather(p.args[0]);
                  store(0, apply_prim(p.op, a));
                } else {
                  Value a = gather(p.args[0]);
                  Value b = gather(p.args[1]);
                  store(0, apply_prim(p.op, a, b));
                }
              },
              [&](const CallInstr& c) {
                exec_call(ins, c, gather, store);
              },
              [&](const MakeArrayInstr& m) {
                std::vector<Value> elems;
                elems.reserve(m.elems.size());
                for (ValueId e : m.elems) elems.push_back(gather(e));
                store(0, Value::adopt(heap_.new_array(std::move(elems))));
              },
              [&](const MakeTupleInstr& m) {
                std::vector<Value> elems;
                elems.reserve(m.elems.size());
                for (ValueId e : m.elems) elems.push_back(gather(e));
                store(0, Value::adopt(heap_.new_tuple(std::move(elems))));
              },
              [&](const MakeRecordInstr& m) {
                std::vector<std::pair<std::string, Value>> fields;
                fields.reserve(m.keys.size());
                for (size_t k = 0; k < m.keys.size(); ++k)
                  fields.emplace_back(m.keys[k], gather(m.values[k]));
                store(0, Value::adopt(heap_.new_record(std::move(fields))));
              },
              [&](const MakeClosureInstr& m) {
                std::vector<Value> caps;
                caps.reserve(m.captures.size());
                for (ValueId e : m.captures) caps.push_back(gather(e));
                store(0,
                      Value::adopt(heap_.new_closure(m.fn_index, std::move(caps))));
              },
          },
          ins.op);
    }

    // terminator
    step();
    const Terminator& term = blk.term;
    if (const auto* j = std::get_if<JumpTerm>(&term)) {
      std::vector<Value> vals;
      vals.reserve(j->args.size());
      for (size_t i = 0; i < j->args.size(); ++i)
        vals.push_back(read_slot(fr, j->args[i],
                                 bp.term.first_last_use[i] != 0));
      cur = j->target;
      ++fr.cur_epoch;
      const auto& params = fn.blocks[cur].params;
      for (size_t i = 0; i < params.size(); ++i)
        write_slot(fr, params[i], std::move(vals[i]));
      continue;
    }
    if (const auto* b = std::get_if<BranchTerm>(&term)) {
      const Value& cond = fr.slots[b->cond];
      if (cond.kind() != ValueKind::Bool)
        fail(EvalErrorKind::TypeError,
             std::string("branch condition must be a bool, got ") +
                 kind_name(cond.kind()));
      bool taken = cond.as_bool();
      const auto& args = taken ? b->true_args : b->false_args;
      const auto& flags = taken ? bp.term.first_last_use : bp.term.second_last_use;
      std::vector<Value> vals;
      vals.reserve(args.size());
      for (size_t i = 0; i < args.size(); ++i)
        vals.push_back(read_slot(fr, args[i], flags[i] != 0));
      cur = taken ? b->true_target : b->false_target;
      ++fr.cur_epoch;
      const auto& params = fn.blocks[cur].params;
      for (size_t i = 0; i < params.size(); ++i)
        write_slot(fr, params[i], std::move(vals[i]));
      continue;
    }
    const auto& r = std::get<ReturnTerm>(term);
    result = read_slot(fr, r.value, bp.term.first_last_use[0] != 0);
    swapped.clear();
    for (size_t i = 0; i < r.swapped.size(); ++i)
      swapped.push_back(
          read_slot(fr, r.swapped[i], bp.term.first_last_use[i + 1] != 0));
    return;
  }
}

template <typename Gather, typename Store>
void Interpreter::exec_call(const Instr& ins, const CallInstr& c,
                            Gather& gather, Store& store) {
  // gather in canonical order: callee value, plain args, swap args
  Value callee_value;
  bool have_callee_value = false;
  if (std::holds_alternative<CalleeValue>(c.callee)) {
    callee_value = gather(std::get<CalleeValue>(c.callee).id);
    have_callee_value = true;
  }
  std::vector<Value> args(c.args.size());
  size_t sw = 0;
  for (size_t i = 0; i < c.args.size(); ++i) {
    if (sw < c.swap_positions.size() && c.swap_positions[sw] == i) {
      ++sw;
      continue;
    }
    args[i] = gather(c.args[i]);
  }
  for (uint32_t pos : c.swap_positions) args[pos] = gather(c.args[pos]);

  Value result;
  std::vector<Value> swapped;

  if (const auto* bi = std::get_if<CalleeBuiltin>(&c.callee)) {
    exec_builtin(bi->b, c, std::move(args), result, swapped);
  } else {
    uint32_t target;
    std::vector<Value> full_args;
    const std::vector<bool>* declared_swaps;
    if (have_callee_value) {
      if (callee_value.kind() != ValueKind::Closure)
        fail(EvalErrorKind::NotCallable,
             std::string("value of kind ") + kind_name(callee_value.kind()) +
                 " is not callable");
      const auto& cl = std::get<ClosureData>(callee_value.cell()->data);
      target = cl.fn_index;
      full_args.reserve(cl.captures.size() + args.size());
      for (const auto& cap : cl.captures) full_args.push_back(cap);
      for (auto& a : args) full_args.push_back(std::move(a));
      declared_swaps = &prog_.functions[target].param_swapped;
    } else {
      target = std::get<CalleeFn>(c.callee).index;
      full_args = std::move(args);
      declared_swaps = &prog_.functions[target].param_swapped;
    }
    // swap marks at the call site must match the callee's signature
    const IRFunction& tf = prog_.functions[target];
    size_t declared = tf.n_params - tf.n_captures;
    if (c.args.size() != declared)
      fail(EvalErrorKind::ArityMismatch,
           "'" + tf.name + "' expects " + std::to_string(declared) +
               " argument(s), got " + std::to_string(c.args.size()));
    size_t swi = 0;
    for (size_t i = 0; i < declared; ++i) {
      bool marked =
          swi < c.swap_positions.size() && c.swap_positions[swi] == i;
      if (marked) ++swi;
      if (marked != (*declared_swaps)[i])
        fail(EvalErrorKind::SwapArityMismatch,
             "swap marks at the call site do not match '" + tf.name + "'");
    }
    CallOutcome sub = exec_function(target, std::move(full_args));
    result = std::move(sub.result);
    swapped = std::move(sub.swapped);
  }

  if (swapped.size() + 1 != ins.dests.size())
    fail(EvalErrorKind::Internal, "call produced unexpected swap results");
  store(0, std::move(result));
  for (size_t k = 0; k < swapped.size(); ++k)
    store(k + 1, std::move(swapped[k]));
}

void Interpreter::exec_builtin(Builtin b, const CallInstr& c,
                               std::vector<Value> args, Value& result,
                               std::vector<Value>& swapped) {
  const BuiltinSig& sig = builtin_sig(b);
  if (args.size() != static_cast<size_t>(sig.arity))
    fail(EvalErrorKind::ArityMismatch,
         "'" + std::string(sig.name) + "' expects " +
             std::to_string(sig.arity) + " argument(s), got " +
             std::to_string(args.size()));
  if (c.swap_positions !=
      std::vector<uint32_t>(sig.swap_positions.begin(), sig.swap_positions.end()))
    fail(EvalErrorKind::SwapArityMismatch,
         "swap marks at the call site do not match '" + std::string(sig.name) +
             "'");
  switch (b) {
    case Builtin::Append:
      swapped.push_back(
          builtin_append(heap_, std::move(args[0]), std::move(args[1])));
      return;
    case Builtin::Set:
      swapped.push_back(builtin_set(heap_, std::move(args[0]),
                                    std::move(args[1]), std::move(args[2])));
      return;
    case Builtin::Extract: {
      auto [container, component] =
          builtin_extract(heap_, std::move(args[0]), std::move(args[1]));
      result = std::move(component);
      swapped.push_back(std::move(container));
      return;
    }
    case Builtin::Get:
      result = builtin_get(args[0], args[1]);
      return;
    case Builtin::Len:
      result = builtin_len(args[0]);
      return;
    case Builtin::Print:
      builtin_print(out_, args[0]);
      return;
    case Builtin::CheckLen: {
      int64_t want = args[1].as_int();
      int64_t got;
      if (args[0].kind() == ValueKind::Array)
        got = static_cast<int64_t>(
            std::get<ArrayData>(args[0].cell()->data).elems.size());
      else if (args[0].kind() == ValueKind::Tuple)
        got = static_cast<int64_t>(
            std::get<TupleData>(args[0].cell()->data).elems.size());
      else
        fail(EvalErrorKind::DestructureMismatch,
             std::string("destructuring expects an array or tuple, got ") +
                 kind_name(args[0].kind()));
      if (got != want)
        fail(EvalErrorKind::DestructureMismatch,
             "destructuring length mismatch: expected " +
                 std::to_string(want) + ", got " + std::to_string(got));
      return;
    }
  }
}

CallOutcome Interpreter::call(const std::string& fn_name,
                              std::vector<Value> args) {
  auto it = prog_.fn_index.find(fn_name);
  if (it == prog_.fn_index.end())
    fail(EvalErrorKind::NoMain, "unknown function '" + fn_name + "'");
  return exec_function(it->second, std::move(args));
}

CallOutcome Interpreter::run() {
  auto it = prog_.fn_index.find("main");
  if (it == prog_.fn_index.end())
    fail(EvalErrorKind::NoMain, "program has no 'main' function");
  const IRFunction& fn = prog_.functions[it->second];
  if (fn.n_params != 0)
    fail(EvalErrorKind::NoMain, "'main' must take no parameters");
  return exec_function(it->second, {});
}

}  // namespace sl
