#include "sl/autodiff.hpp"

#include <map>

#include "sl/ir_validate.hpp"
#include "sl/util.hpp"

namespace sl {

std::vector<Diag> purity_gate(const IRProgram& p) {
  // The instruction set is closed by the Instr variant, so purity reduces to
  // structural validity: there is no store/mutate form to look for.
  return validate_ir(p);
}

namespace {

[[noreturn]] void reject(DiagKind k, const std::string& ctx, std::string msg) {
  throw CompileError(Diag{k, {}, std::move(msg), ctx});
}

// Which ids can carry a nonzero derivative. Conservative forward dataflow:
// arithmetic propagates, everything that crosses an aggregate or builtin
// boundary is cut off (and flagged at emission when it would matter).
std::vector<char> activity(const IRFunction& fn, bool all_params,
                           uint32_t wrt) {
  std::vector<char> active(fn.n_values, 0);
  if (all_params) {
    for (ValueId i = 0; i < fn.n_params; ++i) active[i] = 1;
  } else if (wrt < fn.n_params) {
    active[wrt] = 1;
  }
  bool changed = true;
  while (changed) {
    changed = false;
    auto mark = [&](ValueId id) {
      if (!active[id]) {
        active[id] = 1;
        changed = true;
      }
    };
    for (const auto& blk : fn.blocks) {
      for (const auto& ins : blk.instrs) {
        std::visit(
            overloaded{
                [&](const PrimInstr& x) {
                  if (x.op == PrimOp::Add || x.op == PrimOp::Sub ||
                      x.op == PrimOp::Mul || x.op == PrimOp::Div ||
                      x.op == PrimOp::Neg) {
                    for (ValueId a : x.args)
                      if (active[a]) mark(ins.dests[0]);
                  }
                },
                [&](const CallInstr& x) {
                  if (std::holds_alternative<CalleeFn>(x.callee)) {
                    bool any = false;
                    for (ValueId a : x.args) any |= active[a] != 0;
                    if (any)
                      for (ValueId d : ins.dests) mark(d);
                  }
                },
                [&](const auto&) {},
            },
            ins.op);
      }
      auto edge = [&](BlockId target, const std::vector<ValueId>& args) {
        const auto& params = fn.blocks[target].params;
        for (size_t i = 0; i < args.size() && i < params.size(); ++i)
          if (active[args[i]]) mark(params[i]);
      };
      std::visit(overloaded{
                     [&](const JumpTerm& t) { edge(t.target, t.args); },
                     [&](const BranchTerm& t) {
                       edge(t.true_target, t.true_args);
                       edge(t.false_target, t.false_args);
                     },
                     [&](const ReturnTerm&) {},
                 },
                 blk.term);
    }
  }
  return active;
}

struct DiffBuilder {
  const IRProgram& src;
  IRProgram out;
  std::map<uint32_t, uint32_t> dual_of;  // source fn index -> dual fn index

  explicit DiffBuilder(const IRProgram& p) : src(p) { out = p; }

  std::string unique_name(std::string base) {
    std::string name = base;
    while (out.fn_index.count(name)) name += "_";
    return name;
  }

  uint32_t dual_index(uint32_t fn_index) {
    if (auto it = dual_of.find(fn_index); it != dual_of.end())
      return it->second;
    uint32_t idx = static_cast<uint32_t>(out.functions.size());
    dual_of.emplace(fn_index, idx);  // before building: recursion lands here
    std::string name = unique_name(src.functions[fn_index].name + "_dual");
    out.functions.emplace_back();
    out.fn_index.emplace(name, idx);
    IRFunction dual =
        transform(src.functions[fn_index], name, /*seed_mode=*/false, 0);
    out.functions[idx] = std::move(dual);
    return idx;
  }

  IRFunction transform(const IRFunction& f, const std::string& name,
                       bool seed_mode, uint32_t wrt) {
    const std::string ctx = "fn " + f.name;
    if (f.n_captures != 0)
      reject(DiagKind::NonDifferentiableOp, ctx,
             "cannot differentiate a closure");

    std::vector<char> active = activity(f, !seed_mode, wrt);

    IRFunction g;
    g.name = name;
    g.n_captures = 0;

    // pre-allocate (primal, tangent) ids for every source id
    std::vector<ValueId> primal(f.n_values), tangent(f.n_values);
    auto hint_of = [&](ValueId v) {
      return v < f.value_names.size() ? f.value_names[v] : std::string();
    };
    if (seed_mode) {
      g.n_params = f.n_params;
      g.param_swapped = f.param_swapped;
      for (ValueId v = 0; v < f.n_params; ++v) {
        primal[v] = v;
        g.value_names.push_back(hint_of(v));
      }
      g.n_values = f.n_params;
      for (ValueId v = 0; v < f.n_params; ++v) {
        tangent[v] = g.n_values++;
        g.value_names.push_back("d" + hint_of(v));
      }
      for (ValueId v = f.n_params; v < f.n_values; ++v) {
        primal[v] = g.n_values++;
        g.value_names.push_back(hint_of(v));
        tangent[v] = g.n_values++;
        g.value_names.push_back(
            hint_of(v).empty() ? std::string() : "d" + hint_of(v));
      }
    } else {
      g.n_params = 2 * f.n_params;
      for (size_t i = 0; i < f.param_swapped.size(); ++i) {
        g.param_swapped.push_back(f.param_swapped[i]);
        g.param_swapped.push_back(f.param_swapped[i]);
      }
      g.n_values = 0;
      for (ValueId v = 0; v < f.n_values; ++v) {
        primal[v] = g.n_values++;
        g.value_names.push_back(hint_of(v));
        tangent[v] = g.n_values++;
        g.value_names.push_back(
            hint_of(v).empty() ? std::string() : "d" + hint_of(v));
      }
    }

    auto fresh = [&](const std::string& hint) {
      g.value_names.push_back(hint);
      return g.n_values++;
    };

    g.blocks.resize(f.blocks.size());
    for (size_t b = 0; b < f.blocks.size(); ++b) {
      const IRBlock& sb = f.blocks[b];
      IRBlock& db = g.blocks[b];
      for (ValueId p : sb.params) {
        db.params.push_back(primal[p]);
        db.params.push_back(tangent[p]);
      }
      auto emit = [&](std::vector<ValueId> dests, InstrOp op) {
        db.instrs.push_back(Instr{std::move(dests), std::move(op)});
      };
      auto zero_tangent = [&](ValueId src_id) {
        emit({tangent[src_id]}, ConstInstr{0.0});
      };

      if (b == 0 && seed_mode) {
        for (ValueId v = 0; v < f.n_params; ++v)
          emit({tangent[v]}, ConstInstr{v == wrt ? 1.0 : 0.0});
      }

      for (const auto& ins : sb.instrs) {
        std::visit(
            overloaded{
                [&](const ConstInstr& c) {
                  emit({primal[ins.dests[0]]}, ConstInstr{c.value});
                  zero_tangent(ins.dests[0]);
                },
                [&](const PrimInstr& p) {
                  std::vector<ValueId> pargs;
                  for (ValueId a : p.args) pargs.push_back(primal[a]);
                  emit({primal[ins.dests[0]]}, PrimInstr{p.op, pargs});
                  ValueId d = ins.dests[0];
                  switch (p.op) {
                    case PrimOp::Add:
                    case PrimOp::Sub:
                      emit({tangent[d]},
                           PrimInstr{p.op,
                                     {tangent[p.args[0]], tangent[p.args[1]]}});
                      break;
                    case PrimOp::Mul: {
                      ValueId t1 = fresh("");
                      ValueId t2 = fresh("");
                      emit({t1}, PrimInstr{PrimOp::Mul,
                                           {primal[p.args[0]],
                                            tangent[p.args[1]]}});
                      emit({t2}, PrimInstr{PrimOp::Mul,
                                           {primal[p.args[1]],
                                            tangent[p.args[0]]}});
                      emit({tangent[d]}, PrimInstr{PrimOp::Add, {t1, t2}});
                      break;
                    }
                    case PrimOp::Div: {
                      // d(a/b) = (da*b - a*db) / b^2
                      ValueId t1 = fresh("");
                      ValueId t2 = fresh("");
                      ValueId t3 = fresh("");
                      ValueId t4 = fresh("");
                      emit({t1}, PrimInstr{PrimOp::Mul,
                                           {tangent[p.args[0]],
                                            primal[p.args[1]]}});
                      emit({t2}, PrimInstr{PrimOp::Mul,
                                           {primal[p.args[0]],
                                            tangent[p.args[1]]}});
                      emit({t3}, PrimInstr{PrimOp::Sub, {t1, t2}});
                      emit({t4}, PrimInstr{PrimOp::Mul,
                                           {primal[p.args[1]],
                                            primal[p.args[1]]}});
                      emit({tangent[d]}, PrimInstr{PrimOp::Div, {t3, t4}});
                      break;
                    }
                    case PrimOp::Neg:
                      emit({tangent[d]},
                           PrimInstr{PrimOp::Neg, {tangent[p.args[0]]}});
                      break;
                    default:
                      zero_tangent(d);  // comparisons and logic: primals only
                  }
                },
                [&](const CallInstr& c) {
                  emit_call(f, ctx, active, primal, tangent, fresh, emit,
                            zero_tangent, ins, c);
                },
                [&](const MakeArrayInstr& m) {
                  for (ValueId a : m.elems) check_inactive(active, a, ctx,
                                                           "array element");
                  MakeArrayInstr out_m;
                  for (ValueId a : m.elems) out_m.elems.push_back(primal[a]);
                  emit({primal[ins.dests[0]]}, std::move(out_m));
                  zero_tangent(ins.dests[0]);
                },
                [&](const MakeTupleInstr& m) {
                  for (ValueId a : m.elems)
                    check_inactive(active, a, ctx, "tuple element");
                  MakeTupleInstr out_m;
                  for (ValueId a : m.elems) out_m.elems.push_back(primal[a]);
                  emit({primal[ins.dests[0]]}, std::move(out_m));
                  zero_tangent(ins.dests[0]);
                },
                [&](const MakeRecordInstr& m) {
                  for (ValueId a : m.values)
                    check_inactive(active, a, ctx, "record field");
                  MakeRecordInstr out_m;
                  out_m.keys = m.keys;
                  for (ValueId a : m.values) out_m.values.push_back(primal[a]);
                  emit({primal[ins.dests[0]]}, std::move(out_m));
                  zero_tangent(ins.dests[0]);
                },
                [&](const MakeClosureInstr&) {
                  reject(DiagKind::NonDifferentiableOp, ctx,
                         "closures cannot appear in differentiated code");
                },
            },
            ins.op);
      }

      std::visit(
          overloaded{
              [&](const JumpTerm& t) {
                JumpTerm nt{t.target, {}};
                for (ValueId a : t.args) {
                  nt.args.push_back(primal[a]);
                  nt.args.push_back(tangent[a]);
                }
                db.term = std::move(nt);
              },
              [&](const BranchTerm& t) {
                BranchTerm nt{primal[t.cond], t.true_target, {},
                              t.false_target, {}};
                for (ValueId a : t.true_args) {
                  nt.true_args.push_back(primal[a]);
                  nt.true_args.push_back(tangent[a]);
                }
                for (ValueId a : t.false_args) {
                  nt.false_args.push_back(primal[a]);
                  nt.false_args.push_back(tangent[a]);
                }
                db.term = std::move(nt);
              },
              [&](const ReturnTerm& t) {
                ValueId tup = fresh("");
                emit({tup},
                     MakeTupleInstr{{primal[t.value], tangent[t.value]}});
                ReturnTerm nt{tup, {}};
                for (ValueId s : t.swapped) {
                  nt.swapped.push_back(primal[s]);
                  if (!seed_mode) nt.swapped.push_back(tangent[s]);
                }
                db.term = std::move(nt);
              },
          },
          sb.term);
    }
    return g;
  }

  static void check_inactive(const std::vector<char>& active, ValueId id,
                             const std::string& ctx, const char* what) {
    if (active[id])
      reject(DiagKind::NonDifferentiableOp, ctx,
             std::string("a derivative-carrying value flows into a ") + what);
  }

  template <typename Fresh, typename Emit, typename ZeroTangent>
  void emit_call(const IRFunction& f, const std::string& ctx,
                 const std::vector<char>& active,
                 const std::vector<ValueId>& primal,
                 const std::vector<ValueId>& tangent, Fresh& fresh,
                 Emit& emit, ZeroTangent& zero_tangent, const Instr& ins,
                 const CallInstr& c) {
    (void)f;
    if (std::holds_alternative<CalleeValue>(c.callee))
      reject(DiagKind::NonDifferentiableOp, ctx,
             "closure calls cannot appear in differentiated code");

    if (const auto* bi = std::get_if<CalleeBuiltin>(&c.callee)) {
      switch (bi->b) {
        case Builtin::Get:
        case Builtin::Extract:
          if (c.args.size() > 1)
            check_inactive(active, c.args[1], ctx, "container key");
          break;
        case Builtin::Set:
          if (c.args.size() > 2) {
            check_inactive(active, c.args[1], ctx, "container key");
            check_inactive(active, c.args[2], ctx, "container slot");
          }
          break;
        case Builtin::Append:
          if (c.args.size() > 1)
            check_inactive(active, c.args[1], ctx, "container slot");
          break;
        default:
          break;
      }
      CallInstr nc{c.callee, {}, c.swap_positions};
      for (ValueId a : c.args) nc.args.push_back(primal[a]);
      std::vector<ValueId> dests;
      for (ValueId d : ins.dests) dests.push_back(primal[d]);
      emit(std::move(dests), std::move(nc));
      for (ValueId d : ins.dests) zero_tangent(d);
      return;
    }

    // user function: call its dual with (primal, tangent) pairs
    uint32_t target = std::get<CalleeFn>(c.callee).index;
    uint32_t dual = dual_index(target);
    CallInstr nc{CalleeFn{dual}, {}, {}};
    for (ValueId a : c.args) {
      nc.args.push_back(primal[a]);
      nc.args.push_back(tangent[a]);
    }
    for (uint32_t pos : c.swap_positions) {
      nc.swap_positions.push_back(2 * pos);
      nc.swap_positions.push_back(2 * pos + 1);
    }
    ValueId tup = fresh("");
    std::vector<ValueId> dests{tup};
    for (size_t k = 1; k < ins.dests.size(); ++k) {
      dests.push_back(primal[ins.dests[k]]);
      dests.push_back(tangent[ins.dests[k]]);
    }
    emit(std::move(dests), std::move(nc));
    ValueId c0 = fresh("");
    ValueId c1 = fresh("");
    emit({c0}, ConstInstr{int64_t{0}});
    emit({primal[ins.dests[0]]},
         CallInstr{CalleeBuiltin{Builtin::Get}, {tup, c0}, {}});
    emit({c1}, ConstInstr{int64_t{1}});
    emit({tangent[ins.dests[0]]},
         CallInstr{CalleeBuiltin{Builtin::Get}, {tup, c1}, {}});
  }
};

}  // namespace

ForwardDiffResult forward_diff(const IRProgram& p, const std::string& fn,
                               uint32_t wrt) {
  auto gate = purity_gate(p);
  if (!gate.empty()) {
    std::vector<Diag> diags{
        Diag{DiagKind::ImpureInput, {}, "input fails the purity gate", ""}};
    diags.insert(diags.end(), gate.begin(), gate.end());
    throw CompileError(std::move(diags));
  }
  auto it = p.fn_index.find(fn);
  if (it == p.fn_index.end())
    reject(DiagKind::UnknownFunction, "", "unknown function '" + fn + "'");
  const IRFunction& f = p.functions[it->second];
  if (wrt >= f.n_params - f.n_captures)
    reject(DiagKind::BadParamIndex, "fn " + fn,
           "parameter index " + std::to_string(wrt) + " out of range");

  DiffBuilder builder(p);
  std::string name = builder.unique_name(fn + "_d");
  uint32_t idx = static_cast<uint32_t>(builder.out.functions.size());
  builder.out.functions.emplace_back();
  builder.out.fn_index.emplace(name, idx);
  IRFunction derived = builder.transform(f, name, /*seed_mode=*/true, wrt);
  builder.out.functions[idx] = std::move(derived);
  return ForwardDiffResult{std::move(builder.out), name};
}

}  // namespace sl
